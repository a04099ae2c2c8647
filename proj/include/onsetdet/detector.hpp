// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "onsetdet/classifier.hpp"
#include "onsetdet/codebook.hpp"
#include "onsetdet/onset_matcher.hpp"
#include "onsetdet/signature.hpp"
#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Duration statistics and intention mixing for the detection prior.
/// Spans are end-minus-start frame gaps; sigma is floored at 2 frames.
struct DurationPrior {
  std::vector<int> class_ids;       // main classes, ascending
  Eigen::VectorXd mean_span;
  Eigen::VectorXd sigma_span;
  Eigen::VectorXd intent_prior;     // sums to 1; may be empty (no intentions)
  Eigen::MatrixXd class_given_intent;  // |I| x M, rows sum to 1
  double weight = 1.0;

  int index_of(int class_id) const;
};

inline constexpr int kModelVersion = 1;

/// Everything the streaming detector needs, immutable during detection.
struct DetectorModel {
  int version = kModelVersion;
  std::vector<ActivityClassInfo> classes;
  std::vector<std::string> intentions;
  Codebook codebook;
  std::vector<OnsetTemplate> templates;
  CascadeConfig cascade;
  SignatureVariant variant = SignatureVariant::kHistogramPlusMeanMax;
  bool mask_bow = false;
  ClassifierBank bank;
  DurationPrior prior;
  std::map<int, std::vector<int>> duration_spans;  // per main class: hypothesis spans
  double nms_factor = 0.5;
  GaussianBayesModel bayes;
  std::uint64_t seed = 0;
  std::uint64_t dataset_hash = 0;

  std::vector<int> main_ids() const;
  int onset_count() const { return static_cast<int>(templates.size()); }
  int context_length() const {
    return context_dim(variant, onset_count(), cascade, codebook.size());
  }

  /// Precomputes the per-(class, span-hypothesis) prior factors. Must be
  /// called after construction or deserialization, before scoring.
  void finalize();

  const std::vector<double>& hypothesis_priors(int class_id) const;

 private:
  std::map<int, std::vector<double>> hypothesis_prior_;
};

/// Intention-marginalized duration prior factor:
/// sum_I exp(weight * (log N(span; mu_C, sigma_C) + log P(C|I))) * P(I).
double duration_prior_factor(const DurationPrior& prior, int class_id, int span);

/// Causal per-stream state: word counts, onset responses and gradient
/// prefix tables up to the last pushed frame. Feed frames one at a time for
/// streaming use, or build() over a whole stream; both paths produce
/// bit-identical state.
class StreamContext {
 public:
  explicit StreamContext(const DetectorModel& model);

  static StreamContext build(const DetectorModel& model, const FeatureStream& stream);

  void push_frame(const Eigen::Ref<const Eigen::RowVectorXd>& frame);

  int frames() const { return hist_.frames(); }
  const IntegralHistogram& hist() const { return hist_; }

  /// Onset response G(t) for template k; t must be pushed already.
  double signature(int t, int k) const { return series_(t, k); }

  /// Materialized copy of the response series (for inspection/tests).
  OnsetSignatureSet signatures() const;

  /// Normalized interval bag-of-words into an internal scratch buffer.
  const Eigen::VectorXd& bow(Interval iv);

  /// Context block for frame t (cached per frame for non-interval variants).
  const Eigen::VectorXd& context(int t, int t1);

 private:
  const DetectorModel* model_;
  IntegralHistogram hist_;
  Eigen::MatrixXd series_;  // capacity x K
  std::vector<std::vector<std::vector<int>>> rising_prefix_;  // [k][scale][t+1]
  Eigen::VectorXd bow_scratch_;
  Eigen::VectorXd context_scratch_;
  int context_cache_t_ = -1;

  void fast_context(int t, Eigen::VectorXd& out) const;
};

/// One decision: the hypothesized occurrence of class_id judged at frame t.
struct Detection {
  std::string stream;
  int class_id = -1;
  int t = 0;
  Interval interval;
  double progress = 1.0;
  double score = 0.0;
};

struct FrameScore {
  double score = 0.0;
  double progress = 0.0;
  Interval interval{0, 0};
};

/// The early-detection score at frame t for one class: the best hypothesis
/// over progress levels and duration spans of calibrated classifier
/// probability times the duration/intention prior factor. Returns zero when
/// no hypothesis fits before frame 0.
FrameScore score_frame(const DetectorModel& model, StreamContext& ctx, int t,
                       int class_id);

/// Detection score for a fully observed interval: the progress-1.0
/// classifier fed the interval bag-of-words with the onset block zeroed.
FrameScore after_the_fact_score(const DetectorModel& model, StreamContext& ctx,
                                Interval iv, int class_id);

/// Score using the onset context alone; the bag-of-words block is masked.
FrameScore context_only_score(const DetectorModel& model, StreamContext& ctx, int t,
                              int class_id);

/// Frames that survive non-maximum suppression: strict local maxima of the
/// series (plateaus keep their first frame, zeros never qualify), greedily
/// kept by descending score, suppressing anything within `window` frames of
/// a kept peak.
std::vector<int> suppress_peaks(const std::vector<double>& series, int window);

enum class DetectMethod { kEarly, kAfterFact, kContextOnly, kBayes };

const char* to_string(DetectMethod m);
DetectMethod method_from_string(const std::string& s);

/// Full-stream detection: per-class frame scores, then non-maximum
/// suppression of local maxima within round(nms_factor * mean span) frames.
/// No threshold is applied; results are sorted by descending score.
std::vector<Detection> detect_stream(const DetectorModel& model,
                                     const FeatureStream& stream,
                                     DetectMethod method = DetectMethod::kEarly);

/// Per-class score traces (frames x main classes) for plotting/inspection.
Eigen::MatrixXd score_traces(const DetectorModel& model, const FeatureStream& stream,
                             DetectMethod method = DetectMethod::kEarly);

struct LatencyStats {
  double median_us = 0.0;
  double p90_us = 0.0;
  double p99_us = 0.0;
  double mean_us = 0.0;
  int frames = 0;
};

/// Per-frame latency of the detection loop over a stream whose features are
/// already computed; scoring covers every main class at every frame.
LatencyStats benchmark_detection(const DetectorModel& model,
                                 const FeatureStream& stream, int repeats);

}  // namespace onsetdet
