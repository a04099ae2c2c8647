// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace onsetdet {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "onsetdet-model";

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

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t from_hex64(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

}  // namespace

std::string model_to_json(const ModelBundle& bundle) {
  const DetectorModel& m = bundle.model;
  json j;
  j["format"] = kFormatName;
  j["version"] = m.version;
  j["config"] = json::parse(run_config_to_json(bundle.config));
  j["provenance"]["seed"] = hex64(m.seed);
  j["provenance"]["dataset_hash"] = hex64(m.dataset_hash);

  json classes = json::array();
  for (const auto& c : m.classes)
    classes.push_back({{"name", c.name},
                       {"kind", c.kind == ActivityKind::kOnset ? "onset" : "main"}});
  j["classes"] = classes;
  j["intentions"] = m.intentions;
  j["codebook"] = matrix_to_json(m.codebook.centers);

  json templates = json::array();
  for (const auto& t : m.templates)
    templates.push_back({{"class_id", t.class_id},
                         {"mean", vector_to_json(t.mean)},
                         {"durations", t.durations}});
  j["templates"] = templates;

  j["cascade"] = {{"window", m.cascade.window},
                  {"depth", m.cascade.depth},
                  {"scales", m.cascade.scales}};
  j["variant"] = to_string(m.variant);
  j["mask_bow"] = m.mask_bow;
  j["nms_factor"] = m.nms_factor;

  json bank;
  bank["progress_levels"] = m.bank.progress_levels;
  json clfs = json::array();
  for (const auto& [cid, per_level] : m.bank.per_class) {
    for (std::size_t li = 0; li < per_level.size(); ++li) {
      const auto& c = per_level[li];
      clfs.push_back({{"class_id", cid},
                      {"level_index", li},
                      {"weights", vector_to_json(c.weights)},
                      {"bias", c.bias},
                      {"platt_a", c.platt_a},
                      {"platt_b", c.platt_b}});
    }
  }
  bank["classifiers"] = clfs;
  j["bank"] = bank;

  json prior;
  prior["class_ids"] = m.prior.class_ids;
  prior["mean_span"] = vector_to_json(m.prior.mean_span);
  prior["sigma_span"] = vector_to_json(m.prior.sigma_span);
  prior["intent_prior"] = vector_to_json(m.prior.intent_prior);
  prior["class_given_intent"] = matrix_to_json(m.prior.class_given_intent);
  prior["weight"] = m.prior.weight;
  j["prior"] = prior;

  json spans;
  for (const auto& [cid, v] : m.duration_spans) spans[std::to_string(cid)] = v;
  j["duration_spans"] = spans;

  json bayes = json::array();
  for (const auto& [cid, stats] : m.bayes.stats)
    bayes.push_back({{"class_id", cid},
                     {"mean", vector_to_json(stats.first)},
                     {"var", vector_to_json(stats.second)}});
  j["bayes"] = bayes;
  return j.dump(2);
}

ModelBundle model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw LoadError(std::string("model: invalid JSON: ") + e.what());
  }
  if (j.value("format", std::string()) != kFormatName)
    throw LoadError("model: not an onsetdet model file");
  const int version = j.value("version", -1);
  if (version != kModelVersion)
    throw LoadError("model: version " + std::to_string(version) +
                    " does not match supported version " +
                    std::to_string(kModelVersion));

  ModelBundle bundle;
  bundle.config = run_config_from_json(j.at("config").dump());
  DetectorModel& m = bundle.model;
  m.version = version;
  m.seed = from_hex64(j.at("provenance").at("seed").get<std::string>());
  m.dataset_hash = from_hex64(j.at("provenance").at("dataset_hash").get<std::string>());

  for (const auto& c : j.at("classes"))
    m.classes.push_back({c.at("name").get<std::string>(),
                         c.at("kind").get<std::string>() == "onset"
                             ? ActivityKind::kOnset
                             : ActivityKind::kMain});
  m.intentions = j.at("intentions").get<std::vector<std::string>>();
  m.codebook.centers = matrix_from_json(j.at("codebook"));

  for (const auto& t : j.at("templates")) {
    OnsetTemplate tmpl;
    tmpl.class_id = t.at("class_id").get<int>();
    tmpl.mean = vector_from_json(t.at("mean"));
    tmpl.durations = t.at("durations").get<std::vector<int>>();
    m.templates.push_back(std::move(tmpl));
  }

  m.cascade.window = j.at("cascade").at("window").get<int>();
  m.cascade.depth = j.at("cascade").at("depth").get<int>();
  m.cascade.scales = j.at("cascade").at("scales").get<std::vector<int>>();
  m.variant = variant_from_string(j.at("variant").get<std::string>());
  m.mask_bow = j.at("mask_bow").get<bool>();
  m.nms_factor = j.at("nms_factor").get<double>();

  m.bank.progress_levels = j.at("bank").at("progress_levels").get<std::vector<double>>();
  for (const auto& c : j.at("bank").at("classifiers")) {
    const int cid = c.at("class_id").get<int>();
    const int li = c.at("level_index").get<int>();
    auto& per_level = m.bank.per_class[cid];
    if (static_cast<int>(per_level.size()) <= li) per_level.resize(li + 1);
    LinearProbClassifier clf;
    clf.weights = vector_from_json(c.at("weights"));
    clf.bias = c.at("bias").get<double>();
    clf.platt_a = c.at("platt_a").get<double>();
    clf.platt_b = c.at("platt_b").get<double>();
    per_level[li] = std::move(clf);
  }

  const json& prior = j.at("prior");
  m.prior.class_ids = prior.at("class_ids").get<std::vector<int>>();
  m.prior.mean_span = vector_from_json(prior.at("mean_span"));
  m.prior.sigma_span = vector_from_json(prior.at("sigma_span"));
  m.prior.intent_prior = vector_from_json(prior.at("intent_prior"));
  m.prior.class_given_intent = matrix_from_json(prior.at("class_given_intent"));
  m.prior.weight = prior.at("weight").get<double>();

  for (const auto& [key, v] : j.at("duration_spans").items())
    m.duration_spans[std::stoi(key)] = v.get<std::vector<int>>();

  for (const auto& b : j.at("bayes"))
    m.bayes.stats[b.at("class_id").get<int>()] = {vector_from_json(b.at("mean")),
                                                  vector_from_json(b.at("var"))};

  m.finalize();
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("model: cannot write '" + path + "'");
  out << model_to_json(bundle) << '\n';
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("model: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace onsetdet
