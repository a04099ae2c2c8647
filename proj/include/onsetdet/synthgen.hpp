// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Generator of intention-driven activity sequences with planted (or
/// deliberately absent) onset correlations. Streams emit per-frame feature
/// vectors from Gaussian clusters keyed by latent words; each activity class
/// is a multinomial over those words. Main activities share an ambiguous
/// early-phase word distribution and diverge later, so early detection
/// genuinely depends on pre-activity context.
struct ScenarioConfig {
  int feature_dim = 6;
  int latent_words = 12;
  double cluster_spread = 3.0;   // scale of the latent word centers
  double noise = 0.3;            // isotropic emission noise

  std::vector<std::string> intentions = {"friendly", "hostile", "avoiding"};
  Eigen::VectorXd intention_prior;                // sums to 1

  std::vector<std::string> onset_names;
  std::vector<std::string> main_names;

  /// P(onset k inserted before an instance of main class C), K x M.
  Eigen::MatrixXd onset_given_main;
  /// Probability that a background gap hosts an uncorrelated onset.
  double background_onset_rate = 0.0;

  /// Per intention: (M+1) x M transition rows (row 0 = sequence start,
  /// row c+1 = previous activity c); every row sums to 1.
  std::vector<Eigen::MatrixXd> transitions;

  std::vector<double> main_span_mean, main_span_sigma;    // per main class
  std::vector<double> onset_span_mean, onset_span_sigma;  // per onset class

  double early_phase = 0.45;  // leading fraction of a main drawn from the shared dist
  int min_activities = 2, max_activities = 6;
  int gap_min = 10, gap_max = 35;  // background between segments
  /// Onset end to main start. The default range deliberately extends past
  /// the raw-prior-frames lookback, so a fixed 50-frame window often misses
  /// the onset while the longer signature window still covers it.
  int onset_gap_min = 15, onset_gap_max = 75;

  int sets = 8, streams_per_set = 8;
  double fps = 30.0;

  /// Emission distributions over latent words.
  Eigen::VectorXd background_dist;
  Eigen::VectorXd early_dist;      // shared across main classes
  Eigen::MatrixXd main_late_dist;  // M x latent_words
  Eigen::MatrixXd onset_dist;      // K x latent_words

  void check() const;  // throws on invalid probability rows
};

struct GeneratedDataset {
  Dataset dataset;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

/// Deterministic sampling: the same (config, seed) pair always produces the
/// same dataset, streams independent of each other's draw order.
GeneratedDataset sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

/// Built-in scenarios: "strong_onset" (high correlation, low noise),
/// "weak_onset" (loose correlation, noisy matching), "no_onset_control"
/// (onsets occur but carry no information about what follows).
ScenarioConfig strong_onset_config();
ScenarioConfig weak_onset_config();
ScenarioConfig no_onset_control_config();
std::map<std::string, ScenarioConfig> preset_configs();

std::string scenario_config_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_config_from_json(const std::string& text);
std::uint64_t scenario_config_hash(const ScenarioConfig& cfg);

}  // namespace onsetdet
