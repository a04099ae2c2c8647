// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include "onsetdet/rng.hpp"
#include "onsetdet/signature.hpp"
#include "oracles.hpp"

using namespace onsetdet;

namespace {

Eigen::VectorXd random_series(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = rng.uniform01();
  return g;
}

}  // namespace

TEST_CASE("gradient_counts on constant and strictly increasing series") {
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(30, 0.4);
  const auto [up_flat, down_flat] = gradient_counts(flat, {5, 14}, 1);
  CHECK(up_flat == 0);  // zero gradients count as non-rising
  CHECK(down_flat == 10);

  Eigen::VectorXd inc(30);
  for (int i = 0; i < 30; ++i) inc[i] = 0.01 * i + 0.1;
  const auto [up_inc, down_inc] = gradient_counts(inc, {5, 14}, 1);
  CHECK(up_inc == 10);
  CHECK(down_inc == 0);

  CHECK_THROWS_AS(gradient_counts(flat, {25, 30}, 1), std::out_of_range);
  CHECK_THROWS_AS(gradient_counts(flat, {0, 5}, 0), std::invalid_argument);
}

TEST_CASE("gradient_counts matches the per-frame oracle on sawtooth and random series") {
  Rng rng(7);
  Eigen::VectorXd saw(40);
  for (int i = 0; i < 40; ++i) saw[i] = (i % 5) * 0.2;
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::VectorXd& g = trial % 2 == 0 ? saw : random_series(40, trial);
    const int t1 = rng.uniform_int(0, 39);
    const int t2 = rng.uniform_int(t1, 39);
    const int s = rng.uniform_int(1, 7);
    const auto got = gradient_counts(g, {t1, t2}, s);
    const auto want = oracles::brute_gradient_counts(g, t1, t2, s);
    CHECK(got == want);
    CHECK(got.first + got.second == t2 - t1 + 1);
  }
}

TEST_CASE("cascade_histogram emits 14 numbers for depth 3 and one scale") {
  CascadeConfig cfg;
  cfg.window = 16;
  cfg.depth = 3;
  cfg.scales = {1};
  const Eigen::VectorXd g = random_series(40, 3);
  const Eigen::VectorXi h = cascade_histogram(g, 30, cfg);
  CHECK(h.size() == 14);  // (2^3 - 1) nodes, two bins each
}

TEST_CASE("cascade_histogram on a constant series puts everything in non-rising bins") {
  CascadeConfig cfg;
  cfg.window = 20;
  cfg.depth = 3;
  cfg.scales = {1, 4};
  const Eigen::VectorXd g = Eigen::VectorXd::Constant(60, 0.7);
  const Eigen::VectorXi h = cascade_histogram(g, 45, cfg);
  const auto nodes = oracles::brute_cascade_nodes(45, cfg);
  for (int s = 0; s < 2; ++s)
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      CHECK(h[s * 14 + 2 * static_cast<int>(n)] == 0);
      CHECK(h[s * 14 + 2 * static_cast<int>(n) + 1] == nodes[n].length());
    }
}

TEST_CASE("cascade partition invariant: parent bins equal the sum of children") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    CascadeConfig cfg;
    cfg.depth = rng.uniform_int(2, 4);
    cfg.window = rng.uniform_int(1 << (cfg.depth - 1), 64);
    cfg.scales = {rng.uniform_int(1, 6)};
    const int T = rng.uniform_int(10, 80);
    const Eigen::VectorXd g = random_series(T, rng.next_u64());
    const int t = rng.uniform_int(0, T - 1);

    // Recount every node directly and check both the partition identity and
    // the emitted bins.
    const auto nodes = oracles::brute_cascade_nodes(t, cfg);
    const Eigen::VectorXi h = cascade_histogram(g, t, cfg);
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const auto want = oracles::brute_gradient_counts(g, nodes[n].t1, nodes[n].t2,
                                                       cfg.scales[0]);
      CHECK(h[2 * static_cast<int>(n)] == want.first);
      CHECK(h[2 * static_cast<int>(n) + 1] == want.second);
      CHECK(want.first + want.second == nodes[n].length());
    }
    // Emission order is left subtree, right subtree, parent: with depth d,
    // the root sits last and its children end their own subtree blocks.
    const int nodes_per_sub = (1 << (cfg.depth - 1)) - 1;
    const int root = static_cast<int>(nodes.size()) - 1;
    if (cfg.depth >= 2) {
      const int left_root = nodes_per_sub - 1;
      const int right_root = 2 * nodes_per_sub - 1;
      CHECK(h[2 * root] == h[2 * left_root] + h[2 * right_root]);
      CHECK(h[2 * root + 1] == h[2 * left_root + 1] + h[2 * right_root + 1]);
    }
  }
}

TEST_CASE("signature_vector has the documented layout and length") {
  CascadeConfig cfg;  // window 100, depth 3, scales {1, 5, 10}
  OnsetSignatureSet sigs;
  sigs.class_ids = {0, 1, 2, 3};
  sigs.series = Eigen::MatrixXd::Zero(150, 4);
  const Eigen::VectorXd x = signature_vector(sigs, 120, cfg);
  CHECK(x.size() == 4 * 3 * 14 + 8);  // 176
  CHECK(signature_length(4, cfg) == 176);
}

TEST_CASE("signature_vector of all-zero signatures") {
  CascadeConfig cfg;
  cfg.window = 32;
  cfg.depth = 3;
  cfg.scales = {1, 5};
  OnsetSignatureSet sigs;
  sigs.class_ids = {0, 1};
  sigs.series = Eigen::MatrixXd::Zero(100, 2);
  const Eigen::VectorXd x = signature_vector(sigs, 80, cfg);
  const int cascade_len = 2 * cfg.bins_per_onset();
  for (int i = 0; i < cascade_len; i += 2) {
    CHECK(x[i] == 0.0);      // rising bins empty
    CHECK(x[i + 1] == 1.0);  // normalized non-rising bins full
  }
  for (int i = cascade_len; i < x.size(); ++i) CHECK(x[i] == 0.0);  // means, maxes
}

TEST_CASE("a planted ramp raises only its own channel's rising bins") {
  CascadeConfig cfg;
  cfg.window = 24;
  cfg.depth = 2;
  cfg.scales = {1};
  OnsetSignatureSet sigs;
  sigs.class_ids = {0, 1};
  sigs.series = Eigen::MatrixXd::Zero(60, 2);
  for (int t = 20; t < 44; ++t) sigs.series(t, 1) = 0.02 * (t - 19);

  const Eigen::VectorXd got = signature_vector(sigs, 43, cfg);
  const Eigen::VectorXd want = oracles::brute_signature_vector(sigs.series, 43, cfg);
  CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);

  const int per_onset = cfg.bins_per_onset();
  for (int n = 0; n < cfg.nodes(); ++n) {
    CHECK(got[2 * n] == 0.0);                  // channel 0 rising bins untouched
    CHECK(got[per_onset + 2 * n] > 0.0);       // channel 1 rising bins positive
  }
}

TEST_CASE("signature_vector equals the brute-force construction on random inputs") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    CascadeConfig cfg;
    cfg.depth = rng.uniform_int(1, 4);
    cfg.window = rng.uniform_int(1 << (cfg.depth - 1), 40);
    const int n_scales = rng.uniform_int(1, 3);
    cfg.scales.clear();
    for (int i = 0; i < n_scales; ++i) cfg.scales.push_back(rng.uniform_int(1, 8));
    const int K = rng.uniform_int(1, 4);
    const int T = rng.uniform_int(5, 90);
    OnsetSignatureSet sigs;
    for (int k = 0; k < K; ++k) sigs.class_ids.push_back(k);
    sigs.series.resize(T, K);
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < K; ++k) sigs.series(t, k) = rng.uniform01();

    const int t = rng.uniform_int(0, T - 1);
    const Eigen::VectorXd got = signature_vector(sigs, t, cfg);
    const Eigen::VectorXd want = oracles::brute_signature_vector(sigs.series, t, cfg);
    REQUIRE(got.size() == want.size());
    CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);
    CHECK(got.size() == signature_length(K, cfg));
  }
}

TEST_CASE("signature_vector depends only on the lookback window") {
  Rng rng(17);
  CascadeConfig cfg;
  cfg.window = 16;
  cfg.depth = 3;
  cfg.scales = {1, 4};
  const int T = 120;
  OnsetSignatureSet sigs;
  sigs.class_ids = {0};
  sigs.series = random_series(T, 5);

  const int t = 100;
  const int lookback = cfg.window - 1 + 4;  // window plus the largest scale
  OnsetSignatureSet altered = sigs;
  for (int i = 0; i < t - lookback; ++i) altered.series(i, 0) = rng.uniform01();
  const Eigen::VectorXd a = signature_vector(sigs, t, cfg);
  const Eigen::VectorXd b = signature_vector(altered, t, cfg);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cascade config invariants are enforced") {
  CascadeConfig bad;
  bad.window = 3;
  bad.depth = 3;  // needs window >= 4
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
  bad.window = 4;
  CHECK_NOTHROW(bad.check());
  bad.scales = {0};
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("context_features variants have the advertised dimensions") {
  CascadeConfig cfg;
  const int K = 4, W = 16;
  OnsetSignatureSet sigs;
  sigs.class_ids = {0, 1, 2, 3};
  sigs.series = Eigen::MatrixXd::Zero(80, K);
  std::vector<int> words(80, 0);
  const IntegralHistogram ih = IntegralHistogram::build(words, W);

  CHECK(context_dim(SignatureVariant::kHistogramPlusMeanMax, K, cfg, W) == 176);
  CHECK(context_dim(SignatureVariant::kHistogramOnly, K, cfg, W) == 168);
  CHECK(context_dim(SignatureVariant::kMeanMaxOnly, K, cfg, W) == 8);
  CHECK(context_dim(SignatureVariant::kRawPriorFrames, K, cfg, W) == W);
  CHECK(context_dim(SignatureVariant::kNoOnset, K, cfg, W) == 176);

  for (SignatureVariant v :
       {SignatureVariant::kHistogramPlusMeanMax, SignatureVariant::kHistogramOnly,
        SignatureVariant::kMeanMaxOnly, SignatureVariant::kRawPriorFrames,
        SignatureVariant::kNoOnset}) {
    const Eigen::VectorXd ctx = context_features(v, sigs, ih, 50, 40, cfg);
    CHECK(ctx.size() == context_dim(v, K, cfg, W));
  }
  CHECK(context_features(SignatureVariant::kNoOnset, sigs, ih, 50, 40, cfg).cwiseAbs().sum() == 0.0);
  // Raw-prior context at the very start of a stream has nothing to look at.
  CHECK(context_features(SignatureVariant::kRawPriorFrames, sigs, ih, 0, 0, cfg)
            .cwiseAbs()
            .sum() == 0.0);
}
