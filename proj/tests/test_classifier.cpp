// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include "onsetdet/classifier.hpp"
#include "onsetdet/rng.hpp"
#include "onsetdet/synthgen.hpp"
#include "oracles.hpp"

using namespace onsetdet;

namespace {

TrainingSet gaussian_blobs(int n_per_class, double separation, std::uint64_t seed,
                           int dim = 4) {
  Rng rng(seed);
  TrainingSet s;
  s.features.resize(2 * n_per_class, dim);
  s.labels.resize(2 * n_per_class);
  for (int i = 0; i < n_per_class; ++i) {
    for (int j = 0; j < dim; ++j) {
      s.features(i, j) = separation + 0.5 * rng.normal();
      s.features(n_per_class + i, j) = -separation + 0.5 * rng.normal();
    }
    s.labels[i] = +1;
    s.labels[n_per_class + i] = -1;
  }
  return s;
}

double accuracy(const LinearProbClassifier& clf, const TrainingSet& s) {
  int ok = 0;
  for (int i = 0; i < s.features.rows(); ++i) {
    const double score = clf.score(s.features.row(i).transpose());
    if ((score > 0.0 ? 1 : -1) == s.labels[i]) ++ok;
  }
  return static_cast<double>(ok) / s.features.rows();
}

}  // namespace

TEST_CASE("train_binary separates a linearly separable toy set") {
  const TrainingSet s = gaussian_blobs(40, 2.0, 5);
  TrainOptions opts;
  opts.seed = 9;
  const LinearProbClassifier clf = train_binary(s, opts);
  CHECK(accuracy(clf, s) == 1.0);
  CHECK(std::isfinite(clf.platt_a));
  CHECK(std::isfinite(clf.platt_b));
}

TEST_CASE("train_binary on mirrored data yields an antisymmetric score") {
  // Mirror pairs (x, +1) / (-x, -1): the optimum has zero bias, and the
  // batch subgradient path preserves that exactly, making score(-x) the
  // exact negation of score(x).
  Rng rng(31);
  const int n = 30, dim = 5;
  TrainingSet s;
  s.features.resize(2 * n, dim);
  s.labels.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      const double v = rng.normal() + 0.8;
      s.features(i, j) = v;
      s.features(n + i, j) = -v;
    }
    s.labels[i] = +1;
    s.labels[n + i] = -1;
  }
  TrainOptions opts;
  opts.seed = 3;
  const LinearProbClassifier clf = train_binary(s, opts);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = s.features.row(i).transpose();
    const double plus = clf.score(x);
    const double minus = clf.score((-x).eval());
    CHECK(std::abs(plus + minus) < 1e-6);
  }
  // Calibrated probability at zero score sits at the Platt midpoint.
  CHECK(prob_from_score(clf, 0.0) == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("train_binary is deterministic and order-invariant for a fixed seed") {
  const TrainingSet s = gaussian_blobs(25, 1.0, 21);
  TrainOptions opts;
  opts.seed = 77;
  const LinearProbClassifier a = train_binary(s, opts);
  const LinearProbClassifier b = train_binary(s, opts);
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.bias == b.bias);
  CHECK(a.platt_a == b.platt_a);
  CHECK(a.platt_b == b.platt_b);

  // Same samples presented in a different order.
  const std::vector<int> perm = Rng(123).permutation(static_cast<int>(s.labels.size()));
  TrainingSet shuffled;
  shuffled.features.resize(s.features.rows(), s.features.cols());
  shuffled.labels.resize(s.labels.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.features.row(static_cast<int>(i)) = s.features.row(perm[i]);
    shuffled.labels[i] = s.labels[perm[i]];
  }
  const LinearProbClassifier c = train_binary(shuffled, opts);
  CHECK((a.weights - c.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.bias == c.bias);
  CHECK(a.platt_a == c.platt_a);
}

TEST_CASE("train_binary rejects single-class input") {
  TrainingSet s;
  s.features = Eigen::MatrixXd::Random(6, 3);
  s.labels = {1, 1, 1, 1, 1, 1};
  CHECK_THROWS_AS(train_binary(s, TrainOptions{}), std::invalid_argument);
}

TEST_CASE("predict_prob follows the calibrated sigmoid") {
  LinearProbClassifier clf;
  clf.weights = Eigen::Vector2d(1.0, -2.0);
  clf.bias = 0.25;
  clf.platt_a = 1.7;
  clf.platt_b = -0.4;

  // Large positive scores saturate near 1.
  CHECK(predict_prob(clf, Eigen::Vector2d(50.0, -30.0)) > 0.999999);
  // At the sigmoid inflection the probability is exactly one half.
  const double inflection_score = -clf.platt_b / clf.platt_a;
  CHECK(prob_from_score(clf, inflection_score) == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d x(rng.normal(), rng.normal());
    const double raw = clf.weights.dot(x) + clf.bias;
    const double want = 1.0 / (1.0 + std::exp(-(clf.platt_a * raw + clf.platt_b)));
    const double got = predict_prob(clf, x);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
  CHECK_THROWS_AS(predict_prob(clf, Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("predict_prob is monotone in the raw score") {
  const TrainingSet s = gaussian_blobs(20, 1.5, 51);
  TrainOptions opts;
  opts.seed = 8;
  const LinearProbClassifier clf = train_binary(s, opts);
  double prev = -1.0;
  for (double score = -5.0; score <= 5.0; score += 0.25) {
    const double p = prob_from_score(clf, score);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("gaussian_bayes_score matches the per-dimension formula") {
  std::map<int, std::vector<Eigen::VectorXd>> by_class;
  Rng rng(61);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 30; ++i) {
      Eigen::VectorXd v(3);
      for (int j = 0; j < 3; ++j) v[j] = (c == 0 ? 1.0 : -1.0) + 0.3 * rng.normal();
      by_class[c].push_back(v);
    }
  const GaussianBayesModel model = GaussianBayesModel::fit(by_class);

  const auto& [mean0, var0] = model.stats.at(0);
  // The class mean maximizes the density at fixed variance.
  const double at_mean = gaussian_bayes_score(model, mean0, 0);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd v = mean0;
    for (int j = 0; j < 3; ++j) v[j] += 0.5 * rng.normal();
    CHECK(gaussian_bayes_score(model, v, 0) <= at_mean);
  }
  // Separated means: own-class score dominates at the class-1 mean.
  const auto& mean1 = model.stats.at(1).first;
  CHECK(gaussian_bayes_score(model, mean1, 1) > gaussian_bayes_score(model, mean1, 0));

  // Hand-computed diagonal log-density.
  Eigen::VectorXd probe(3);
  probe << 0.2, -0.7, 1.1;
  double want = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double d = probe[j] - mean0[j];
    want += -0.5 * std::log(2.0 * M_PI * var0[j]) - d * d / (2.0 * var0[j]);
  }
  CHECK(gaussian_bayes_score(model, probe, 0) == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_bayes_score(model, probe, 9), std::invalid_argument);
}

namespace {

// Tiny labeled world reused by the sampler tests.
struct SamplerWorld {
  Dataset ds;
  Codebook cb;
  std::vector<OnsetTemplate> templates;
  std::vector<StreamFeatures> features;
  int main_id = -1;
};

SamplerWorld make_sampler_world() {
  SamplerWorld w;
  Rng rng(71);
  const int T = 380, dim = 2;
  for (int si = 0; si < 2; ++si) {
    FeatureStream s;
    s.id = "s" + std::to_string(si);
    s.frames.resize(T, dim);
    for (int t = 0; t < T; ++t)
      s.frames.row(t) << rng.normal(), rng.normal();
    w.ds.streams.push_back(std::move(s));
    w.ds.stream_set.push_back("all");
    w.ds.stream_intention.push_back(-1);
  }
  const int onset = w.ds.register_class("cue", ActivityKind::kOnset);
  w.main_id = w.ds.register_class("act", ActivityKind::kMain);
  // Four instances per stream at fixed places.
  for (int si = 0; si < 2; ++si) {
    const std::string id = "s" + std::to_string(si);
    for (int i = 0; i < 4; ++i) {
      const int t1 = 30 + i * 85;
      w.ds.labels.push_back({id, onset, {t1 - 20, t1 - 10}, -1, ActivityKind::kOnset});
      w.ds.labels.push_back({id, w.main_id, {t1, t1 + 50}, -1, ActivityKind::kMain});
    }
  }
  Eigen::MatrixXd all(2 * T, dim);
  all << w.ds.streams[0].frames, w.ds.streams[1].frames;
  w.cb = fit_codebook(all, 4, 5);
  w.templates = fit_onset_templates(w.ds, w.cb, 2);
  w.features = compute_stream_features(w.ds, w.cb, w.templates);
  return w;
}

}  // namespace

TEST_CASE("build_training_set honors the counting and placement contracts") {
  const SamplerWorld w = make_sampler_world();
  SamplerConfig cfg;
  cfg.cascade.window = 32;
  cfg.neg_ratio = 5.0;
  cfg.seed = 13;

  const TrainingSet at_full = build_training_set(w.ds, w.features, w.main_id, 1.0, cfg);
  REQUIRE(at_full.labels.size() == 8 + 40);  // 8 positives, neg_ratio x 8 negatives
  int pos = 0;
  for (int y : at_full.labels) pos += y > 0 ? 1 : 0;
  CHECK(pos == 8);

  // d = 1.0: the positive bag-of-words covers the full instance interval.
  const Eigen::VectorXd want_full = interval_histogram(
      w.features[0].hist, {30, 80}, true);
  CHECK((at_full.features.row(0).head(4).transpose() - want_full).cwiseAbs().maxCoeff() ==
        0.0);

  // d = 0.1 on [30, 80]: the observed segment is [30, 35].
  const TrainingSet at_tenth = build_training_set(w.ds, w.features, w.main_id, 0.1, cfg);
  const Eigen::VectorXd want_tenth = interval_histogram(
      w.features[0].hist, {30, 35}, true);
  CHECK((at_tenth.features.row(0).head(4).transpose() - want_tenth)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // Feature width is bag-of-words plus the context block.
  CHECK(at_full.features.cols() ==
        4 + context_dim(cfg.variant, 1, cfg.cascade, 4));
}

TEST_CASE("build_training_set fails for a class with no instances") {
  SamplerWorld w = make_sampler_world();
  const int ghost = w.ds.register_class("ghost", ActivityKind::kMain);
  SamplerConfig cfg;
  CHECK_THROWS_AS(build_training_set(w.ds, w.features, ghost, 0.5, cfg),
                  std::runtime_error);
}

TEST_CASE("held-out AUC on a separable generator configuration exceeds 0.9") {
  const GeneratedDataset gen = sample_scenario(strong_onset_config(), 2024);
  const Dataset train = gen.dataset.subset_by_set({"set0", "set1", "set2"});
  const Dataset test = gen.dataset.subset_by_set({"set3"});

  Eigen::MatrixXd frames(0, 0);
  long total = 0;
  for (const auto& s : train.streams) total += s.length();
  frames.resize(total, train.streams[0].dim());
  long row = 0;
  for (const auto& s : train.streams) {
    frames.middleRows(row, s.length()) = s.frames;
    row += s.length();
  }
  const Codebook cb = fit_codebook(frames, 16, 7);
  const std::vector<OnsetTemplate> templates = fit_onset_templates(train, cb, 3);

  SamplerConfig scfg;
  scfg.seed = 5;
  const int cid = train.main_class_ids()[0];
  const auto train_features = compute_stream_features(train, cb, templates);
  const TrainingSet train_set =
      build_training_set(train, train_features, cid, 1.0, scfg);
  TrainOptions opts;
  opts.seed = 15;
  const LinearProbClassifier clf = train_binary(train_set, opts);

  scfg.seed = 6;
  const auto test_features = compute_stream_features(test, cb, templates);
  const TrainingSet test_set = build_training_set(test, test_features, cid, 1.0, scfg);
  // Rank-based AUC over the held-out set.
  std::vector<std::pair<double, int>> scored;
  for (int i = 0; i < test_set.features.rows(); ++i)
    scored.push_back({clf.score(test_set.features.row(i).transpose()), test_set.labels[i]});
  std::sort(scored.begin(), scored.end());
  double rank_sum = 0.0;
  int n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].second > 0) {
      rank_sum += static_cast<double>(i + 1);
      ++n_pos;
    } else {
      ++n_neg;
    }
  }
  const double auc = (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * (double)n_neg);
  CHECK(auc > 0.9);
}
