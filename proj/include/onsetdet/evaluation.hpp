// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "onsetdet/detector.hpp"
#include "onsetdet/run_config.hpp"
#include "onsetdet/timeline.hpp"
#include "onsetdet/training.hpp"

namespace onsetdet {

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Threshold sweep at every distinct score, highest first.
struct PRCurve {
  std::vector<PRPoint> points;
};

struct EvalConfig {
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int threads = 1;
};

/// TP/FP label per detection. A detection is a true positive when it fires
/// inside the observed prefix of a same-class, same-stream, still-unmatched
/// ground-truth instance; matching is greedy in score order, one detection
/// per instance. Detections must arrive sorted by descending score.
std::vector<char> match_detections(const std::vector<Detection>& dets,
                                   const std::vector<ActivityInstance>& ground_truth,
                                   double ratio);

/// Precision/recall over the labeled, score-sorted detections.
PRCurve pr_curve(const std::vector<std::pair<double, bool>>& labeled, int n_gt);

/// Step-wise area under the PR curve (no interpolation).
double average_precision(const PRCurve& curve);

/// AP of one class at one observation ratio, matching pooled detections
/// against the dataset's instances of that class.
double ap_for_class(const std::vector<Detection>& dets, const Dataset& gt,
                    int class_id, double ratio);

/// Unweighted mean over main classes with at least one instance.
double mean_ap(const std::vector<Detection>& dets, const Dataset& gt, double ratio);

/// Detections for every stream of a dataset under one model.
std::vector<Detection> detect_dataset(const DetectorModel& model, const Dataset& ds,
                                      DetectMethod method = DetectMethod::kEarly,
                                      int threads = 1);

/// Mean AP per observation ratio for a single trained model evaluated on
/// held-out streams.
std::vector<double> mean_ap_vs_ratio(const DetectorModel& model, const Dataset& test,
                                     const EvalConfig& cfg,
                                     DetectMethod method = DetectMethod::kEarly);
std::vector<double> mean_ap_vs_ratio(const std::vector<Detection>& dets,
                                     const Dataset& gt, const std::vector<double>& ratios);

/// Leave-one-set-out: trains one model per held-out set and pools the
/// held-out detections, merged in fold order. Fold seeds derive from
/// cfg.seed, so variants evaluated side by side share identical splits.
std::vector<Detection> cross_validated_detections(const Dataset& ds,
                                                  const RunConfig& cfg,
                                                  DetectMethod method = DetectMethod::kEarly,
                                                  int threads = 1);

struct AblationTable {
  std::vector<double> ratios;
  std::vector<std::pair<std::string, std::vector<double>>> rows;  // variant -> mean AP
};

/// Trains and cross-validates each onset representation under identical
/// splits and seeds.
AblationTable run_ablation(const Dataset& ds, const std::vector<SignatureVariant>& variants,
                           const RunConfig& cfg, const EvalConfig& eval);

/// Mean AP of the raw onset template responses themselves, treating local
/// maxima of each response series as detections. A diagnostic for how weak
/// the onset detectors are.
double onset_peak_mean_ap(const Dataset& train, const Dataset& test, const RunConfig& cfg);

}  // namespace onsetdet
