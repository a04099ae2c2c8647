// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/codebook.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "onsetdet/rng.hpp"

namespace onsetdet {

namespace {

constexpr int kMaxLloydIterations = 100;

// Index of the nearest center; strict less keeps the lowest index on ties.
int nearest_center(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& p) {
  int best = 0;
  double best_d = (centers.row(0) - p).squaredNorm();
  for (int j = 1; j < centers.rows(); ++j) {
    const double d = (centers.row(j) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

Eigen::MatrixXd distinct_rows(const Eigen::MatrixXd& points) {
  Eigen::MatrixXd out(points.rows(), points.cols());
  int n = 0;
  for (int i = 0; i < points.rows(); ++i) {
    bool seen = false;
    for (int j = 0; j < n && !seen; ++j)
      seen = (out.row(j) == points.row(i));
    if (!seen) out.row(n++) = points.row(i);
  }
  return out.topRows(n);
}

}  // namespace

Codebook fit_codebook(const Eigen::MatrixXd& points, int vocab, std::uint64_t seed) {
  if (vocab < 2) throw std::invalid_argument("fit_codebook: vocab must be >= 2");
  if (points.rows() == 0) throw std::invalid_argument("fit_codebook: no points");

  const Eigen::MatrixXd uniq = distinct_rows(points);
  if (uniq.rows() < vocab) {
    throw std::invalid_argument(
        "fit_codebook: need " + std::to_string(vocab) + " distinct points, have " +
        std::to_string(uniq.rows()) + " (short by " +
        std::to_string(vocab - uniq.rows()) + ")");
  }

  Rng rng(seed);
  const int n = static_cast<int>(points.rows());

  // k-means++ seeding over the full point set.
  Eigen::MatrixXd centers(vocab, points.cols());
  centers.row(0) = points.row(rng.uniform_int(0, n - 1));
  Eigen::VectorXd dist2(n);
  for (int i = 0; i < n; ++i)
    dist2[i] = (points.row(i) - centers.row(0)).squaredNorm();
  for (int k = 1; k < vocab; ++k) {
    const double total = dist2.sum();
    int pick = -1;
    if (total > 0.0) {
      double u = rng.uniform01() * total;
      for (int i = 0; i < n; ++i) {
        u -= dist2[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // numeric tail: last point with positive weight
        for (int i = n - 1; i >= 0; --i)
          if (dist2[i] > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      for (int i = 0; i < n && pick < 0; ++i)
        if (dist2[i] > 0.0) pick = i;
    }
    centers.row(k) = points.row(pick);
    for (int i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (points.row(i) - centers.row(k)).squaredNorm());
  }

  // Lloyd iterations until assignments stabilize.
  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int a = nearest_center(centers, points.row(i));
      if (a != assign[i]) {
        assign[i] = a;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(vocab, points.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(vocab);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[i]) += points.row(i);
      counts[assign[i]] += 1;
    }
    for (int k = 0; k < vocab; ++k) {
      if (counts[k] > 0) {
        centers.row(k) = sums.row(k) / counts[k];
      } else {
        // Move an empty cluster onto the point farthest from its center.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = (points.row(i) - centers.row(assign[i])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers.row(k) = points.row(far);
        assign[far] = k;
        changed = true;
      }
    }
    if (!changed) break;
  }

  return Codebook{centers};
}

std::vector<int> quantize(const Eigen::MatrixXd& frames, const Codebook& cb) {
  if (frames.cols() != cb.centers.cols())
    throw std::invalid_argument("quantize: feature dimension mismatch");
  std::vector<int> words(frames.rows());
  for (int t = 0; t < frames.rows(); ++t)
    words[t] = nearest_center(cb.centers, frames.row(t));
  return words;
}

std::vector<int> quantize(const FeatureStream& stream, const Codebook& cb) {
  return quantize(stream.frames, cb);
}

int quantize_frame(const Eigen::Ref<const Eigen::RowVectorXd>& frame, const Codebook& cb) {
  if (frame.size() != cb.centers.cols())
    throw std::invalid_argument("quantize_frame: feature dimension mismatch");
  int best = 0;
  double best_d = (cb.centers.row(0) - frame).squaredNorm();
  for (int j = 1; j < cb.centers.rows(); ++j) {
    const double d = (cb.centers.row(j) - frame).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

IntegralHistogram::IntegralHistogram(int words) {
  buf_ = Eigen::MatrixXi::Zero(16, words);
}

IntegralHistogram IntegralHistogram::build(const std::vector<int>& words, int vocab) {
  IntegralHistogram ih(vocab);
  ih.buf_.conservativeResize(static_cast<int>(words.size()) + 1, vocab);
  ih.buf_.row(0).setZero();
  for (std::size_t t = 0; t < words.size(); ++t) {
    ih.buf_.row(static_cast<int>(t) + 1) = ih.buf_.row(static_cast<int>(t));
    ih.buf_(static_cast<int>(t) + 1, words[t]) += 1;
  }
  ih.frames_ = static_cast<int>(words.size());
  return ih;
}

void IntegralHistogram::append(int word) {
  if (word < 0 || word >= words())
    throw std::invalid_argument("IntegralHistogram::append: word out of range");
  if (frames_ + 1 >= buf_.rows()) {
    Eigen::MatrixXi grown = Eigen::MatrixXi::Zero(buf_.rows() * 2, buf_.cols());
    grown.topRows(frames_ + 1) = buf_.topRows(frames_ + 1);
    buf_.swap(grown);
  }
  buf_.row(frames_ + 1) = buf_.row(frames_);
  buf_(frames_ + 1, word) += 1;
  ++frames_;
}

Eigen::VectorXi IntegralHistogram::counts(Interval iv) const {
  if (iv.t1 < 0 || iv.t1 > iv.t2 || iv.t2 >= frames_)
    throw std::out_of_range("IntegralHistogram::counts: interval out of range");
  return (buf_.row(iv.t2 + 1) - buf_.row(iv.t1)).transpose();
}

Eigen::VectorXd interval_histogram(const IntegralHistogram& ih, Interval iv,
                                   bool normalize) {
  const Eigen::VectorXi c = ih.counts(iv);
  Eigen::VectorXd h = c.cast<double>();
  if (normalize) h /= static_cast<double>(c.sum());
  return h;
}

}  // namespace onsetdet
