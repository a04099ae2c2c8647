// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Bag-of-words vocabulary: one center per row.
struct Codebook {
  Eigen::MatrixXd centers;  // W x n_feat

  int size() const { return static_cast<int>(centers.rows()); }
  int dim() const { return static_cast<int>(centers.cols()); }
};

/// Lloyd's k-means with k-means++ seeding. Deterministic for a fixed seed;
/// iterates to a stable assignment or at most 100 rounds. Throws if the
/// input has fewer distinct rows than `vocab`.
Codebook fit_codebook(const Eigen::MatrixXd& points, int vocab, std::uint64_t seed);

/// Nearest-center word id per frame (Euclidean); ties go to the lowest index.
std::vector<int> quantize(const Eigen::MatrixXd& frames, const Codebook& cb);
std::vector<int> quantize(const FeatureStream& stream, const Codebook& cb);
int quantize_frame(const Eigen::Ref<const Eigen::RowVectorXd>& frame, const Codebook& cb);

/// Cumulative word-count table: row t+1 holds counts of words 0..t, so any
/// interval histogram is a row difference. Grows amortized O(W) per frame.
class IntegralHistogram {
 public:
  IntegralHistogram() = default;
  explicit IntegralHistogram(int words);

  static IntegralHistogram build(const std::vector<int>& words, int vocab);

  void append(int word);

  int frames() const { return frames_; }
  int words() const { return static_cast<int>(buf_.cols()); }

  /// cumulative[t], t in [0, frames()].
  Eigen::RowVectorXi cumulative(int t) const { return buf_.row(t); }

  /// Word counts over an inclusive interval; throws when out of range.
  Eigen::VectorXi counts(Interval iv) const;

 private:
  Eigen::MatrixXi buf_;  // capacity rows; rows 0..frames_ valid
  int frames_ = 0;
};

/// Interval word histogram; L1-normalized when `normalize` is set.
Eigen::VectorXd interval_histogram(const IntegralHistogram& ih, Interval iv,
                                   bool normalize);

}  // namespace onsetdet
