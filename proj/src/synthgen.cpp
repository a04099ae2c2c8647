// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/synthgen.hpp"

#include <stdexcept>

#include <json.hpp>

#include "onsetdet/rng.hpp"

namespace onsetdet {

using nlohmann::json;

namespace {

void check_row(const Eigen::VectorXd& row, const char* what) {
  if (row.size() == 0) throw std::invalid_argument(std::string(what) + ": empty row");
  if (row.minCoeff() < 0.0)
    throw std::invalid_argument(std::string(what) + ": negative probability");
  if (std::abs(row.sum() - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
}

std::vector<double> row_weights(const Eigen::VectorXd& row) {
  return {row.data(), row.data() + row.size()};
}

}  // namespace

void ScenarioConfig::check() const {
  const int K = static_cast<int>(onset_names.size());
  const int M = static_cast<int>(main_names.size());
  if (M < 1) throw std::invalid_argument("scenario: need at least one main class");
  if (feature_dim < 1 || latent_words < 2)
    throw std::invalid_argument("scenario: bad emission dimensions");
  check_row(intention_prior, "intention_prior");
  if (static_cast<int>(intentions.size()) != intention_prior.size())
    throw std::invalid_argument("scenario: intention tables misaligned");
  if (onset_given_main.rows() != K || onset_given_main.cols() != M)
    throw std::invalid_argument("scenario: onset_given_main must be K x M");
  if (onset_given_main.size() > 0 &&
      (onset_given_main.minCoeff() < 0.0 || onset_given_main.maxCoeff() > 1.0))
    throw std::invalid_argument("scenario: onset correlations must lie in [0, 1]");
  if (static_cast<int>(transitions.size()) != intention_prior.size())
    throw std::invalid_argument("scenario: one transition table per intention");
  for (const auto& tr : transitions) {
    if (tr.rows() != M + 1 || tr.cols() != M)
      throw std::invalid_argument("scenario: transition tables must be (M+1) x M");
    for (int r = 0; r < tr.rows(); ++r) check_row(tr.row(r), "transition row");
  }
  if (static_cast<int>(main_span_mean.size()) != M ||
      static_cast<int>(main_span_sigma.size()) != M ||
      static_cast<int>(onset_span_mean.size()) != K ||
      static_cast<int>(onset_span_sigma.size()) != K)
    throw std::invalid_argument("scenario: span tables misaligned");
  check_row(background_dist, "background_dist");
  check_row(early_dist, "early_dist");
  if (main_late_dist.rows() != M || onset_dist.rows() != K)
    throw std::invalid_argument("scenario: emission tables misaligned");
  for (int r = 0; r < main_late_dist.rows(); ++r)
    check_row(main_late_dist.row(r), "main_late_dist row");
  for (int r = 0; r < onset_dist.rows(); ++r)
    check_row(onset_dist.row(r), "onset_dist row");
  if (background_dist.size() != latent_words || early_dist.size() != latent_words ||
      main_late_dist.cols() != latent_words || onset_dist.cols() != latent_words)
    throw std::invalid_argument("scenario: emission rows must span latent_words");
  if (min_activities < 1 || max_activities < min_activities)
    throw std::invalid_argument("scenario: bad activity count range");
  if (gap_min < 1 || gap_max < gap_min || onset_gap_min < 1 ||
      onset_gap_max < onset_gap_min)
    throw std::invalid_argument("scenario: bad gap ranges");
  if (background_onset_rate < 0.0 || background_onset_rate > 1.0)
    throw std::invalid_argument("scenario: background_onset_rate must lie in [0, 1]");
}

namespace {

struct Segment {
  int early_frames = 0;
  int length = 0;
  int label_class = -1;  // -1 for background
  ActivityKind kind = ActivityKind::kMain;
};

int sample_span(Rng& rng, double mean, double sigma) {
  return std::max(4, round_half_up(rng.normal(mean, sigma)));
}

}  // namespace

GeneratedDataset sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.check();
  const int K = static_cast<int>(cfg.onset_names.size());
  const int M = static_cast<int>(cfg.main_names.size());

  // Latent word geometry is part of the sampled world.
  Rng geom(derive_seed(seed, 0x6E0));
  Eigen::MatrixXd centers(cfg.latent_words, cfg.feature_dim);
  for (int w = 0; w < cfg.latent_words; ++w)
    for (int j = 0; j < cfg.feature_dim; ++j)
      centers(w, j) = cfg.cluster_spread * geom.normal();

  GeneratedDataset out;
  out.seed = seed;
  out.config_hash = scenario_config_hash(cfg);
  Dataset& ds = out.dataset;
  ds.intentions = cfg.intentions;
  for (int k = 0; k < K; ++k) ds.register_class(cfg.onset_names[k], ActivityKind::kOnset);
  for (int m = 0; m < M; ++m) ds.register_class(cfg.main_names[m], ActivityKind::kMain);

  for (int set = 0; set < cfg.sets; ++set) {
    for (int sj = 0; sj < cfg.streams_per_set; ++sj) {
      const int stream_index = set * cfg.streams_per_set + sj;
      Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(stream_index)));

      const int intention = rng.discrete(row_weights(cfg.intention_prior));
      const int n_main = rng.uniform_int(cfg.min_activities, cfg.max_activities);

      std::vector<Segment> segments;
      auto background = [&](int len) {
        Segment s;
        s.length = len;
        segments.push_back(s);
      };
      auto onset_segment = [&](int k) {
        Segment s;
        s.length = sample_span(rng, cfg.onset_span_mean[k], cfg.onset_span_sigma[k]) + 1;
        s.label_class = k;  // onset classes registered first
        s.kind = ActivityKind::kOnset;
        segments.push_back(s);
      };

      int prev = -1;
      for (int a = 0; a < n_main; ++a) {
        background(rng.uniform_int(cfg.gap_min, cfg.gap_max));
        if (cfg.background_onset_rate > 0.0 && rng.bernoulli(cfg.background_onset_rate)) {
          onset_segment(rng.uniform_int(0, K - 1));
          background(rng.uniform_int(cfg.gap_min, cfg.gap_max));
        }
        const int C = rng.discrete(row_weights(cfg.transitions[intention].row(prev + 1)));
        for (int k = 0; k < K; ++k) {
          if (!rng.bernoulli(cfg.onset_given_main(k, C))) continue;
          onset_segment(k);
          background(rng.uniform_int(cfg.onset_gap_min, cfg.onset_gap_max));
        }
        Segment s;
        s.length = sample_span(rng, cfg.main_span_mean[C], cfg.main_span_sigma[C]) + 1;
        s.early_frames = round_half_up(cfg.early_phase * s.length);
        s.label_class = K + C;
        s.kind = ActivityKind::kMain;
        segments.push_back(s);
        prev = C;
      }
      background(rng.uniform_int(cfg.gap_min, cfg.gap_max));

      int total = 0;
      for (const auto& s : segments) total += s.length;

      FeatureStream stream;
      stream.id = "set" + std::to_string(set) + "_s" + std::to_string(sj);
      stream.fps = cfg.fps;
      stream.frames.resize(total, cfg.feature_dim);

      int t = 0;
      for (const auto& s : segments) {
        const int t1 = t;
        for (int i = 0; i < s.length; ++i, ++t) {
          Eigen::VectorXd row_dist;
          if (s.label_class >= 0 && s.kind == ActivityKind::kOnset) {
            row_dist = cfg.onset_dist.row(s.label_class);
          } else if (s.label_class >= 0) {
            row_dist = i >= s.early_frames
                           ? Eigen::VectorXd(cfg.main_late_dist.row(s.label_class - K))
                           : cfg.early_dist;
          } else {
            row_dist = cfg.background_dist;
          }
          const int word = rng.discrete(row_weights(row_dist));
          for (int j = 0; j < cfg.feature_dim; ++j)
            stream.frames(t, j) = centers(word, j) + cfg.noise * rng.normal();
        }
        if (s.label_class >= 0) {
          ActivityInstance inst;
          inst.stream = stream.id;
          inst.class_id = s.label_class;
          inst.interval = {t1, t - 1};
          inst.intention = intention;
          inst.kind = s.kind;
          ds.labels.push_back(inst);
        }
      }

      ds.streams.push_back(std::move(stream));
      ds.stream_set.push_back("set" + std::to_string(set));
      ds.stream_intention.push_back(intention);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Word layout: 0 background, 1-2 shared early phase, 3..2+M main late
// phase, 3+M..2+M+K onsets. latent_words = 3 + M + K.
struct PresetKnobs {
  double designated_correlation;  // P(designated onset | its main class)
  double onset_sharpness;         // mass on the onset's own word
  double noise;
  double background_confusion;    // background leakage onto onset words
  double background_onset_rate;
};

ScenarioConfig make_preset(const PresetKnobs& knobs) {
  ScenarioConfig cfg;
  cfg.onset_names = {"pointing", "reaching", "standing_up", "waving"};
  cfg.main_names = {"handshake", "hug", "punch", "throw", "run_away"};
  const int K = 4, M = 5;
  cfg.latent_words = 3 + M + K;
  cfg.feature_dim = 6;
  cfg.noise = knobs.noise;
  cfg.background_onset_rate = knobs.background_onset_rate;

  cfg.intention_prior = Eigen::VectorXd::Constant(3, 1.0 / 3.0);

  // Designated onsets: pointing->punch, reaching->throw,
  // standing_up->run_away, waving->handshake and hug.
  cfg.onset_given_main = Eigen::MatrixXd::Zero(K, M);
  const double p = knobs.designated_correlation;
  cfg.onset_given_main.row(0) << 0.02, 0.02, p, 0.05, 0.05;
  cfg.onset_given_main.row(1) << 0.02, 0.02, 0.05, p, 0.02;
  cfg.onset_given_main.row(2) << 0.05, 0.05, 0.05, 0.05, p;
  cfg.onset_given_main.row(3) << p, p, 0.02, 0.02, 0.02;

  // Intention-conditioned base preferences plus mild sequence coupling.
  Eigen::MatrixXd base(3, M);
  base.row(0) << 0.38, 0.34, 0.02, 0.06, 0.20;  // friendly
  base.row(1) << 0.05, 0.03, 0.45, 0.37, 0.10;  // hostile
  base.row(2) << 0.10, 0.05, 0.08, 0.12, 0.65;  // avoiding
  Eigen::MatrixXd follow(M, M);
  follow.row(0) << 0.30, 0.40, 0.05, 0.05, 0.20;  // after handshake
  follow.row(1) << 0.35, 0.25, 0.05, 0.05, 0.30;  // after hug
  follow.row(2) << 0.02, 0.02, 0.30, 0.26, 0.40;  // after punch
  follow.row(3) << 0.02, 0.02, 0.26, 0.30, 0.40;  // after throw
  follow.row(4) << 0.15, 0.10, 0.15, 0.20, 0.40;  // after run_away
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXd tr(M + 1, M);
    tr.row(0) = base.row(i);
    for (int prev = 0; prev < M; ++prev) {
      Eigen::VectorXd row = 0.75 * base.row(i) + 0.25 * follow.row(prev);
      tr.row(prev + 1) = row / row.sum();
    }
    cfg.transitions.push_back(tr);
  }

  cfg.main_span_mean = {70.0, 85.0, 55.0, 60.0, 90.0};
  cfg.main_span_sigma = {9.0, 10.0, 7.0, 7.0, 11.0};
  cfg.onset_span_mean = {14.0, 16.0, 15.0, 14.0};
  cfg.onset_span_sigma = {3.0, 3.0, 3.0, 3.0};

  const int V = cfg.latent_words;
  Eigen::VectorXd bg = Eigen::VectorXd::Zero(V);
  bg[0] = 0.82;
  bg[1] = bg[2] = 0.045;
  for (int m = 0; m < M; ++m) bg[3 + m] = 0.018;
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(V, 1.0 / V);
  cfg.background_dist =
      (1.0 - knobs.background_confusion) * bg + knobs.background_confusion * uniform;
  cfg.background_dist /= cfg.background_dist.sum();

  cfg.early_dist = Eigen::VectorXd::Zero(V);
  cfg.early_dist[0] = 0.03;
  cfg.early_dist[1] = cfg.early_dist[2] = 0.485;

  cfg.main_late_dist = Eigen::MatrixXd::Zero(M, V);
  for (int m = 0; m < M; ++m) {
    cfg.main_late_dist(m, 0) = 0.07;
    cfg.main_late_dist(m, 1) = cfg.main_late_dist(m, 2) = 0.04;
    cfg.main_late_dist(m, 3 + m) = 0.85;
  }

  cfg.onset_dist = Eigen::MatrixXd::Zero(K, V);
  for (int k = 0; k < K; ++k) {
    const double rest = 1.0 - knobs.onset_sharpness - 0.15;
    cfg.onset_dist(k, 0) = 0.15;
    cfg.onset_dist(k, 1) = cfg.onset_dist(k, 2) = rest / 2.0;
    cfg.onset_dist(k, 3 + M + k) = knobs.onset_sharpness;
  }
  return cfg;
}

}  // namespace

ScenarioConfig strong_onset_config() {
  // Background onsets keep the context block from being sufficient on its
  // own; the classifiers must pair it with interval evidence.
  return make_preset({0.95, 0.70, 0.25, 0.05, 0.35});
}

ScenarioConfig weak_onset_config() {
  return make_preset({0.50, 0.35, 1.0, 0.35, 0.35});
}

ScenarioConfig no_onset_control_config() {
  PresetKnobs knobs{0.0, 0.70, 0.3, 0.05, 0.5};
  ScenarioConfig cfg = make_preset(knobs);
  cfg.onset_given_main.setZero();
  return cfg;
}

std::map<std::string, ScenarioConfig> preset_configs() {
  return {{"strong_onset", strong_onset_config()},
          {"weak_onset", weak_onset_config()},
          {"no_onset_control", no_onset_control_config()}};
}

// ---------------------------------------------------------------------------
// JSON round trip

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

std::string scenario_config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["feature_dim"] = cfg.feature_dim;
  j["latent_words"] = cfg.latent_words;
  j["cluster_spread"] = cfg.cluster_spread;
  j["noise"] = cfg.noise;
  j["intentions"] = cfg.intentions;
  j["intention_prior"] = vector_to_json(cfg.intention_prior);
  j["onset_names"] = cfg.onset_names;
  j["main_names"] = cfg.main_names;
  j["onset_given_main"] = matrix_to_json(cfg.onset_given_main);
  j["background_onset_rate"] = cfg.background_onset_rate;
  json trans = json::array();
  for (const auto& tr : cfg.transitions) trans.push_back(matrix_to_json(tr));
  j["transitions"] = trans;
  j["main_span_mean"] = cfg.main_span_mean;
  j["main_span_sigma"] = cfg.main_span_sigma;
  j["onset_span_mean"] = cfg.onset_span_mean;
  j["onset_span_sigma"] = cfg.onset_span_sigma;
  j["early_phase"] = cfg.early_phase;
  j["min_activities"] = cfg.min_activities;
  j["max_activities"] = cfg.max_activities;
  j["gap_min"] = cfg.gap_min;
  j["gap_max"] = cfg.gap_max;
  j["onset_gap_min"] = cfg.onset_gap_min;
  j["onset_gap_max"] = cfg.onset_gap_max;
  j["sets"] = cfg.sets;
  j["streams_per_set"] = cfg.streams_per_set;
  j["fps"] = cfg.fps;
  j["background_dist"] = vector_to_json(cfg.background_dist);
  j["early_dist"] = vector_to_json(cfg.early_dist);
  j["main_late_dist"] = matrix_to_json(cfg.main_late_dist);
  j["onset_dist"] = matrix_to_json(cfg.onset_dist);
  return j.dump(2);
}

ScenarioConfig scenario_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario config: invalid JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.latent_words = j.at("latent_words").get<int>();
  cfg.cluster_spread = j.at("cluster_spread").get<double>();
  cfg.noise = j.at("noise").get<double>();
  cfg.intentions = j.at("intentions").get<std::vector<std::string>>();
  cfg.intention_prior = vector_from_json(j.at("intention_prior"));
  cfg.onset_names = j.at("onset_names").get<std::vector<std::string>>();
  cfg.main_names = j.at("main_names").get<std::vector<std::string>>();
  cfg.onset_given_main = matrix_from_json(j.at("onset_given_main"));
  cfg.background_onset_rate = j.at("background_onset_rate").get<double>();
  cfg.transitions.clear();
  for (const auto& tr : j.at("transitions")) cfg.transitions.push_back(matrix_from_json(tr));
  cfg.main_span_mean = j.at("main_span_mean").get<std::vector<double>>();
  cfg.main_span_sigma = j.at("main_span_sigma").get<std::vector<double>>();
  cfg.onset_span_mean = j.at("onset_span_mean").get<std::vector<double>>();
  cfg.onset_span_sigma = j.at("onset_span_sigma").get<std::vector<double>>();
  cfg.early_phase = j.at("early_phase").get<double>();
  cfg.min_activities = j.at("min_activities").get<int>();
  cfg.max_activities = j.at("max_activities").get<int>();
  cfg.gap_min = j.at("gap_min").get<int>();
  cfg.gap_max = j.at("gap_max").get<int>();
  cfg.onset_gap_min = j.at("onset_gap_min").get<int>();
  cfg.onset_gap_max = j.at("onset_gap_max").get<int>();
  cfg.sets = j.at("sets").get<int>();
  cfg.streams_per_set = j.at("streams_per_set").get<int>();
  cfg.fps = j.at("fps").get<double>();
  cfg.background_dist = vector_from_json(j.at("background_dist"));
  cfg.early_dist = vector_from_json(j.at("early_dist"));
  cfg.main_late_dist = matrix_from_json(j.at("main_late_dist"));
  cfg.onset_dist = matrix_from_json(j.at("onset_dist"));
  return cfg;
}

std::uint64_t scenario_config_hash(const ScenarioConfig& cfg) {
  const std::string text = scenario_config_to_json(cfg);
  return fnv1a(text.data(), text.size());
}

}  // namespace onsetdet
