// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onsetdet/classifier.hpp"
#include "onsetdet/signature.hpp"

namespace onsetdet {

/// Every pipeline tunable in one place. Round-trips losslessly through its
/// JSON form; parsing rejects unknown keys.
struct RunConfig {
  int vocab = 64;                      // bag-of-words vocabulary size
  int kmeans_sample_cap = 20000;       // frames subsampled for codebook fitting
  int template_durations = 3;          // candidate window lengths per onset template
  CascadeConfig cascade;               // window 100, depth 3, scales {1,5,10}
  std::vector<double> progress_levels = default_progress_levels();
  double neg_ratio = 5.0;
  double neg_iou_max = 0.25;
  double prior_weight = 1.0;           // w in the detection score
  int duration_hypotheses = 3;         // spans evaluated per class at detect time
  double nms_factor = 0.5;
  SignatureVariant variant = SignatureVariant::kHistogramPlusMeanMax;
  bool mask_bow = false;               // train/score without the interval bag-of-words
  double svm_lambda = 1e-3;
  int svm_iterations = 300;
  double svm_learning_rate = 1.0;
  double platt_holdout = 0.2;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace onsetdet
