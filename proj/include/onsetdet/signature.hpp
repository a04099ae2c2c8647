// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "onsetdet/codebook.hpp"
#include "onsetdet/onset_matcher.hpp"
#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Parameters of the cascade gradient histogram: trailing window length,
/// recursion depth (2^depth - 1 nodes), and the gradient step sizes.
struct CascadeConfig {
  int window = 100;
  int depth = 3;
  std::vector<int> scales = {1, 5, 10};

  int nodes() const { return (1 << depth) - 1; }
  int bins_per_onset() const { return static_cast<int>(scales.size()) * nodes() * 2; }
  void check() const;
  bool operator==(const CascadeConfig&) const = default;
};

/// Signature-vector length for K onset channels under a cascade config.
inline int signature_length(int onsets, const CascadeConfig& cfg) {
  return onsets * cfg.bins_per_onset() + 2 * onsets;
}

/// Counts of rising (> 0) and non-rising (<= 0) gradients G(t) - G(t - step)
/// over an inclusive interval; the series is zero-extended below frame 0.
/// The two counts always sum to the interval length.
std::pair<int, int> gradient_counts(const Eigen::VectorXd& series, Interval iv, int step);

/// Raw cascade bin counts for one series at frame t: for each scale, the
/// recursive split of [t - window + 1, t], nodes emitted depth-first with
/// leaves before their parent, two bins per node.
Eigen::VectorXi cascade_histogram(const Eigen::VectorXd& series, int t,
                                  const CascadeConfig& cfg);

/// The full per-frame feature vector: per-onset cascade bins normalized by
/// their node length, then per-onset window means (sum / window, window
/// zero-extended), then per-onset window maxima.
Eigen::VectorXd signature_vector(const OnsetSignatureSet& sigs, int t,
                                 const CascadeConfig& cfg);

/// Onset-context representations compared in the ablation study.
enum class SignatureVariant {
  kHistogramPlusMeanMax,  // cascade bins + means + maxes (the full vector)
  kHistogramOnly,
  kMeanMaxOnly,
  kRawPriorFrames,  // bag-of-words of the frames just before the interval
  kNoOnset,         // the full-vector slot, zero-filled
};

const char* to_string(SignatureVariant v);
SignatureVariant variant_from_string(const std::string& s);

/// Number of frames the raw-prior-frames variant looks back from t1.
inline constexpr int kRawPriorSpan = 50;

int context_dim(SignatureVariant v, int onsets, const CascadeConfig& cfg, int vocab);

/// Context block fed to the classifiers next to the interval bag-of-words.
/// Signature variants depend on (sigs, t); the raw-prior variant depends on
/// the hypothesized interval start and the word counts instead.
Eigen::VectorXd context_features(SignatureVariant v, const OnsetSignatureSet& sigs,
                                 const IntegralHistogram& ih, int t, int t1,
                                 const CascadeConfig& cfg);

}  // namespace onsetdet
