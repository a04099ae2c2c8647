// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace onsetdet {

using nlohmann::json;

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["vocab"] = cfg.vocab;
  j["kmeans_sample_cap"] = cfg.kmeans_sample_cap;
  j["template_durations"] = cfg.template_durations;
  j["cascade_window"] = cfg.cascade.window;
  j["cascade_depth"] = cfg.cascade.depth;
  j["cascade_scales"] = cfg.cascade.scales;
  j["progress_levels"] = cfg.progress_levels;
  j["neg_ratio"] = cfg.neg_ratio;
  j["neg_iou_max"] = cfg.neg_iou_max;
  j["prior_weight"] = cfg.prior_weight;
  j["duration_hypotheses"] = cfg.duration_hypotheses;
  j["nms_factor"] = cfg.nms_factor;
  j["variant"] = to_string(cfg.variant);
  j["mask_bow"] = cfg.mask_bow;
  j["svm_lambda"] = cfg.svm_lambda;
  j["svm_iterations"] = cfg.svm_iterations;
  j["svm_learning_rate"] = cfg.svm_learning_rate;
  j["platt_holdout"] = cfg.platt_holdout;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");

  static const std::set<std::string> known = {
      "vocab", "kmeans_sample_cap", "template_durations", "cascade_window",
      "cascade_depth", "cascade_scales", "progress_levels", "neg_ratio",
      "neg_iou_max", "prior_weight", "duration_hypotheses", "nms_factor",
      "variant", "mask_bow", "svm_lambda", "svm_iterations", "svm_learning_rate",
      "platt_holdout", "seed"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "'");

  RunConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("vocab", cfg.vocab);
  get("kmeans_sample_cap", cfg.kmeans_sample_cap);
  get("template_durations", cfg.template_durations);
  get("cascade_window", cfg.cascade.window);
  get("cascade_depth", cfg.cascade.depth);
  get("cascade_scales", cfg.cascade.scales);
  get("progress_levels", cfg.progress_levels);
  get("neg_ratio", cfg.neg_ratio);
  get("neg_iou_max", cfg.neg_iou_max);
  get("prior_weight", cfg.prior_weight);
  get("duration_hypotheses", cfg.duration_hypotheses);
  get("nms_factor", cfg.nms_factor);
  if (j.contains("variant")) cfg.variant = variant_from_string(j.at("variant"));
  get("mask_bow", cfg.mask_bow);
  get("svm_lambda", cfg.svm_lambda);
  get("svm_iterations", cfg.svm_iterations);
  get("svm_learning_rate", cfg.svm_learning_rate);
  get("platt_holdout", cfg.platt_holdout);
  get("seed", cfg.seed);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return run_config_from_json(text);
}

}  // namespace onsetdet
