// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include <set>

#include "onsetdet/evaluation.hpp"
#include "onsetdet/rng.hpp"
#include "onsetdet/synthgen.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace onsetdet;

namespace {

Detection det(const std::string& stream, int cls, int t, double score) {
  Detection d;
  d.stream = stream;
  d.class_id = cls;
  d.t = t;
  d.interval = {t, t + 10};
  d.score = score;
  return d;
}

ActivityInstance gt(const std::string& stream, int cls, int t1, int t2) {
  ActivityInstance g;
  g.stream = stream;
  g.class_id = cls;
  g.interval = {t1, t2};
  g.kind = ActivityKind::kMain;
  return g;
}

}  // namespace

TEST_CASE("match_detections basic TP/FP rules") {
  const std::vector<ActivityInstance> truth = {gt("s", 0, 100, 200)};

  // One detection inside the prefix.
  std::vector<Detection> dets = {det("s", 0, 120, 0.9)};
  CHECK(match_detections(dets, truth, 0.5) == std::vector<char>{1});

  // Two detections on one instance: only the higher-scored one matches.
  dets = {det("s", 0, 120, 0.9), det("s", 0, 130, 0.7)};
  CHECK(match_detections(dets, truth, 0.5) == std::vector<char>{1, 0});

  // Past the ratio prefix but inside the interval: FP early, TP at 1.0.
  dets = {det("s", 0, 190, 0.9)};
  CHECK(match_detections(dets, truth, 0.5) == std::vector<char>{0});
  CHECK(match_detections(dets, truth, 1.0) == std::vector<char>{1});

  // Firing before the instance starts never counts.
  dets = {det("s", 0, 99, 0.9)};
  CHECK(match_detections(dets, truth, 1.0) == std::vector<char>{0});

  // Wrong stream or class never matches.
  dets = {det("other", 0, 120, 0.9), det("s", 1, 120, 0.8)};
  CHECK(match_detections(dets, truth, 1.0) == std::vector<char>{0, 0});

  // Unsorted input is rejected.
  dets = {det("s", 0, 120, 0.1), det("s", 0, 130, 0.9)};
  CHECK_THROWS_AS(match_detections(dets, truth, 0.5), std::invalid_argument);
}

TEST_CASE("match_detections eligibility and TP sets grow with the ratio") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ActivityInstance> truth;
    for (int i = 0; i < 4; ++i) {
      const int t1 = 50 + i * 140;
      truth.push_back(gt("s", rng.uniform_int(0, 1), t1, t1 + rng.uniform_int(20, 90)));
    }
    // Detections shaped like real suppressed output: at most one per
    // instance neighborhood.
    std::vector<Detection> dets;
    for (int i = 0; i < 4; ++i)
      dets.push_back(det("s", truth[i].class_id,
                         truth[i].interval.t1 + rng.uniform_int(-10, 60),
                         1.0 - 0.07 * i));
    const double a = rng.uniform(0.1, 0.9);
    const double b = rng.uniform(a, 1.0);

    // The eligibility relation itself is nested in the ratio.
    for (const auto& d : dets)
      for (const auto& g : truth) {
        const bool elig_a =
            g.interval.t1 <= d.t && d.t <= observed_prefix(g, a).t2;
        const bool elig_b =
            g.interval.t1 <= d.t && d.t <= observed_prefix(g, b).t2;
        if (elig_a) CHECK(elig_b);
      }

    const std::vector<char> la = match_detections(dets, truth, a);
    const std::vector<char> lb = match_detections(dets, truth, b);
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (la[i]) CHECK(lb[i]);  // every TP at the smaller ratio stays a TP
  }
}

TEST_CASE("pr_curve and average_precision on the worked example") {
  // Scores [0.9 TP, 0.8 FP, 0.7 TP] with 2 ground truths: AP = 0.8333...
  const std::vector<std::pair<double, bool>> labeled = {
      {0.9, true}, {0.8, false}, {0.7, true}};
  const PRCurve curve = pr_curve(labeled, 2);
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[0].precision == 1.0);
  CHECK(curve.points[0].recall == 0.5);
  CHECK(curve.points[2].recall == 1.0);
  const double ap = average_precision(curve);
  CHECK(ap == doctest::Approx(1.0 * 0.5 + (2.0 / 3.0) * 0.5).epsilon(1e-12));
  CHECK(ap == doctest::Approx(oracles::brute_average_precision(labeled, 2)).epsilon(1e-12));
}

TEST_CASE("average_precision edge cases") {
  CHECK(average_precision(pr_curve({{0.9, true}, {0.5, true}}, 2)) == 1.0);
  CHECK(average_precision(pr_curve({{0.9, false}, {0.5, false}}, 3)) == 0.0);
  CHECK_THROWS_AS(pr_curve({}, 0), std::invalid_argument);

  // Recall is nondecreasing as the threshold drops.
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<double, bool>> labeled;
    const int n = rng.uniform_int(1, 40);
    for (int i = 0; i < n; ++i)
      labeled.push_back({rng.uniform01(), rng.bernoulli(0.4)});
    const PRCurve curve = pr_curve(labeled, 10);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].recall >= curve.points[i - 1].recall);
      CHECK(curve.points[i].precision >= 0.0);
      CHECK(curve.points[i].precision <= 1.0);
    }
  }
}

TEST_CASE("average_precision matches brute force and survives monotone transforms") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_gt = rng.uniform_int(1, 12);
    std::vector<std::pair<double, bool>> labeled;
    const int n = rng.uniform_int(1, 30);
    int tp_budget = n_gt;  // matching never yields more TPs than instances
    for (int i = 0; i < n; ++i) {
      const bool tp = tp_budget > 0 && rng.bernoulli(0.5);
      if (tp) --tp_budget;
      labeled.push_back({rng.uniform_int(1, 10) / 10.0, tp});
    }
    const double ap = average_precision(pr_curve(labeled, n_gt));
    const double want = oracles::brute_average_precision(labeled, n_gt);
    CHECK(ap == doctest::Approx(want).epsilon(1e-9));
    CHECK(ap >= 0.0);
    CHECK(ap <= 1.0 + 1e-12);

    // Strictly monotone transform of all scores leaves AP unchanged.
    std::vector<std::pair<double, bool>> warped = labeled;
    for (auto& [s, tp] : warped) s = std::exp(3.0 * s) + 1.0;
    CHECK(average_precision(pr_curve(warped, n_gt)) == doctest::Approx(ap).epsilon(1e-9));
  }
}

TEST_CASE("mean_ap_vs_ratio columns, single class, and monotone eligibility") {
  // Hand-built detections over a two-class ground truth.
  Dataset ds;
  ds.register_class("m0", ActivityKind::kMain);
  ds.register_class("m1", ActivityKind::kMain);
  FeatureStream s;
  s.id = "s";
  s.frames = Eigen::MatrixXd::Zero(600, 1);
  ds.streams.push_back(s);
  ds.stream_set = {"a"};
  ds.stream_intention = {-1};
  ds.labels.push_back(gt("s", 0, 50, 150));
  ds.labels.push_back(gt("s", 0, 300, 400));
  ds.labels.push_back(gt("s", 1, 480, 560));

  std::vector<Detection> dets = {det("s", 0, 60, 0.95), det("s", 0, 390, 0.9),
                                 det("s", 1, 485, 0.85), det("s", 1, 30, 0.5)};
  const std::vector<double> ratios = {0.1, 0.5, 1.0};
  const std::vector<double> table = mean_ap_vs_ratio(dets, ds, ratios);
  CHECK(table.size() == ratios.size());
  // With identical detections, a larger ratio can only help.
  CHECK(table[0] <= table[1]);
  CHECK(table[1] <= table[2]);

  // Single-class dataset: mean AP equals that class's AP.
  Dataset solo = ds;
  solo.labels = {gt("s", 0, 50, 150), gt("s", 0, 300, 400)};
  std::vector<Detection> solo_dets = {det("s", 0, 60, 0.95), det("s", 0, 390, 0.9)};
  CHECK(mean_ap(solo_dets, solo, 1.0) ==
        doctest::Approx(ap_for_class(solo_dets, solo, 0, 1.0)).epsilon(1e-12));
}

TEST_CASE("cross validation never evaluates a training stream and is deterministic") {
  const GeneratedDataset gen =
      sample_scenario(test_support::balanced_tiny_scenario(3, 2), 77);

  RunConfig cfg;
  cfg.vocab = 8;
  cfg.svm_iterations = 40;
  cfg.progress_levels = {0.5, 1.0};
  cfg.seed = 5;

  const std::vector<Detection> a =
      cross_validated_detections(gen.dataset, cfg, DetectMethod::kEarly, 1);
  const std::vector<Detection> b =
      cross_validated_detections(gen.dataset, cfg, DetectMethod::kEarly, 2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].stream == b[i].stream);
    CHECK(a[i].score == b[i].score);
    CHECK(a[i].t == b[i].t);
  }
  // Every stream of the dataset is covered exactly by its own fold.
  std::set<std::string> seen;
  for (const auto& d : a) seen.insert(d.stream);
  CHECK(seen.size() <= gen.dataset.streams.size());
}

TEST_CASE("run_ablation rows are deterministic and NO_ONSET matches its definition") {
  const GeneratedDataset gen =
      sample_scenario(test_support::balanced_tiny_scenario(2, 2), 99);

  RunConfig cfg;
  cfg.vocab = 8;
  cfg.svm_iterations = 40;
  cfg.progress_levels = {0.5, 1.0};
  cfg.seed = 3;
  EvalConfig eval;
  eval.ratios = {0.5, 1.0};
  eval.threads = 2;

  const AblationTable table = run_ablation(
      gen.dataset,
      {SignatureVariant::kNoOnset, SignatureVariant::kNoOnset}, cfg, eval);
  REQUIRE(table.rows.size() == 2);
  REQUIRE(table.rows[0].second.size() == 2);
  for (std::size_t i = 0; i < table.rows[0].second.size(); ++i)
    CHECK(table.rows[0].second[i] == table.rows[1].second[i]);
}
