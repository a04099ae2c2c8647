// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "onsetdet/codebook.hpp"
#include "onsetdet/onset_matcher.hpp"
#include "onsetdet/signature.hpp"
#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Linear scorer with a fitted sigmoid on top:
/// prob(x) = sigmoid(platt_a * (w.x + bias) + platt_b).
struct LinearProbClassifier {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double platt_a = 1.0;
  double platt_b = 0.0;

  double score(const Eigen::VectorXd& x) const { return weights.dot(x) + bias; }
};

double predict_prob(const LinearProbClassifier& clf, const Eigen::VectorXd& x);

/// Probability from a raw score; exposed so callers that assemble the score
/// from vector segments avoid concatenating.
double prob_from_score(const LinearProbClassifier& clf, double raw_score);

struct TrainOptions {
  double lambda = 1e-3;      // L2 regularization
  int iterations = 300;      // full-batch subgradient steps
  double learning_rate = 1.0;
  double holdout = 0.2;      // calibration slice
  std::uint64_t seed = 1;
};

/// Labeled training matrix; y entries are +1 / -1.
struct TrainingSet {
  Eigen::MatrixXd features;  // n x dim
  std::vector<int> labels;
};

/// L2-regularized hinge-loss training by deterministic full-batch
/// subgradient descent, followed by a Platt sigmoid fit on a held-out
/// slice selected by a seeded shuffle. Samples are canonically ordered
/// first, so the result is independent of input order. Throws when only
/// one class is present.
LinearProbClassifier train_binary(const TrainingSet& samples, const TrainOptions& opts);

/// One binary classifier per (main class, progress level).
struct ClassifierBank {
  std::vector<double> progress_levels;                       // ascending
  std::map<int, std::vector<LinearProbClassifier>> per_class;  // class id -> per level

  const LinearProbClassifier& at(int class_id, int level_index) const;
  int input_dim() const;
};

inline std::vector<double> default_progress_levels() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

/// Diagonal-covariance Gaussian per class over bag-of-words vectors.
struct GaussianBayesModel {
  std::map<int, std::pair<Eigen::VectorXd, Eigen::VectorXd>> stats;  // mean, var

  static GaussianBayesModel fit(const std::map<int, std::vector<Eigen::VectorXd>>& by_class,
                                double var_floor = 1e-4);
};

/// Diagonal Gaussian log-density of a vector under a fitted class.
double gaussian_bayes_score(const GaussianBayesModel& model,
                            const Eigen::VectorXd& bow_vector, int class_id);

/// Everything build_training_set needs besides the dataset itself.
struct SamplerConfig {
  CascadeConfig cascade;
  SignatureVariant variant = SignatureVariant::kHistogramPlusMeanMax;
  bool mask_bow = false;      // context-only training
  double neg_ratio = 5.0;
  double neg_iou_max = 0.25;
  std::uint64_t seed = 1;
};

/// Per-stream precomputed features shared by training-set construction.
struct StreamFeatures {
  std::string id;
  IntegralHistogram hist;
  OnsetSignatureSet sigs;
};

std::vector<StreamFeatures> compute_stream_features(
    const Dataset& ds, const Codebook& cb, const std::vector<OnsetTemplate>& templates);

/// Positive samples at progress level d for every instance of `class_id`,
/// plus neg_ratio-times-as-many negatives drawn at random placements whose
/// hypothesized interval overlaps no instance of the class above the IoU
/// cutoff. Feature layout: [interval bag-of-words | context block].
TrainingSet build_training_set(const Dataset& ds,
                               const std::vector<StreamFeatures>& features,
                               int class_id, double progress,
                               const SamplerConfig& cfg);

}  // namespace onsetdet
