// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "onsetdet/codebook.hpp"
#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Mean bag-of-words template of one onset class plus the candidate window
/// lengths (in frames) it is matched at.
struct OnsetTemplate {
  int class_id = -1;
  Eigen::VectorXd mean;         // L1-normalized, length W
  std::vector<int> durations;   // candidate window lengths, all >= 1
};

/// Per-onset response series over a stream; column k is the series for
/// templates[k], values clamped to [0, 1].
struct OnsetSignatureSet {
  std::vector<int> class_ids;
  Eigen::MatrixXd series;  // frames x K

  int frames() const { return static_cast<int>(series.rows()); }
  int onset_count() const { return static_cast<int>(series.cols()); }
};

/// Fits one template per onset class: mean of the normalized interval
/// histograms of its training instances. Candidate durations are
/// `n_durations` values evenly spaced between the 10th and 90th percentile
/// of the observed instance durations (rounded, deduplicated). Throws when
/// any onset class has no instances, listing the missing classes.
std::vector<OnsetTemplate> fit_onset_templates(const Dataset& ds, const Codebook& cb,
                                               int n_durations);

/// Squared Euclidean distance between a normalized histogram and the
/// template mean; lies in [0, 2] for L1-normalized inputs.
double template_distance(const Eigen::VectorXd& hist, const OnsetTemplate& tmpl);

/// Template response at frame t: the best clamped match score over the
/// template's candidate window lengths, windows truncated at frame 0.
/// Zero until the shortest window first fits.
double signature_value(const IntegralHistogram& ih, const OnsetTemplate& tmpl, int t);

/// Batch response series for every template over a full stream.
OnsetSignatureSet compute_signatures(const FeatureStream& stream, const Codebook& cb,
                                     const std::vector<OnsetTemplate>& templates);
OnsetSignatureSet compute_signatures(const IntegralHistogram& ih,
                                     const std::vector<OnsetTemplate>& templates);

/// Linear-interpolation percentile of a sample, p in [0, 100].
double percentile(std::vector<double> values, double p);

}  // namespace onsetdet
