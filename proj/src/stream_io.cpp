// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/stream_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "onsetdet/rng.hpp"

namespace onsetdet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sidecar_path(const std::string& path) {
  fs::path p(path);
  p.replace_extension(".header.json");
  return p.string();
}

json read_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw LoadError(std::string(what) + ": cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw LoadError(std::string(what) + ": invalid JSON in '" + path + "': " + e.what());
  }
}

const char* kind_name(ActivityKind k) {
  return k == ActivityKind::kOnset ? "onset" : "main";
}

ActivityKind kind_from_name(const std::string& s, const std::string& where) {
  if (s == "onset") return ActivityKind::kOnset;
  if (s == "main") return ActivityKind::kMain;
  throw LoadError("labels: unknown kind '" + s + "' in " + where);
}

}  // namespace

void write_stream_jsonl(const FeatureStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("stream: cannot write '" + path + "'");
  for (int t = 0; t < stream.length(); ++t) {
    json rec;
    rec["t"] = t;
    std::vector<double> x(stream.frames.cols());
    for (int j = 0; j < stream.frames.cols(); ++j) x[j] = stream.frames(t, j);
    rec["x"] = x;
    out << rec.dump() << '\n';
  }
  json header;
  header["id"] = stream.id;
  header["fps"] = stream.fps;
  header["n_feat"] = stream.dim();
  std::ofstream hout(sidecar_path(path));
  if (!hout) throw LoadError("stream: cannot write sidecar for '" + path + "'");
  hout << header.dump() << '\n';
}

FeatureStream read_stream_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("stream: cannot open '" + path + "'");

  FeatureStream stream;
  int n_feat = -1;
  const std::string side = sidecar_path(path);
  if (fs::exists(side)) {
    const json header = read_json_file(side, "stream header");
    stream.id = header.value("id", fs::path(path).stem().string());
    stream.fps = header.value("fps", 30.0);
    n_feat = header.value("n_feat", -1);
  }

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw LoadError("stream: invalid JSON at " + path + ":" +
                      std::to_string(line_no) + ": " + e.what());
    }
    if (!rec.contains("x")) {
      // Inline header line (no sidecar present).
      if (rows.empty() && rec.contains("id")) {
        stream.id = rec.value("id", stream.id);
        stream.fps = rec.value("fps", stream.fps);
        n_feat = rec.value("n_feat", n_feat);
        continue;
      }
      throw LoadError("stream: frame record without 'x' at " + path + ":" +
                      std::to_string(line_no));
    }
    rows.push_back(rec.at("x").get<std::vector<double>>());
    if (n_feat >= 0 && static_cast<int>(rows.back().size()) != n_feat)
      throw LoadError("stream: frame width mismatch at " + path + ":" +
                      std::to_string(line_no));
  }
  if (rows.empty()) throw LoadError("stream: no frames in '" + path + "'");
  if (stream.id.empty()) stream.id = fs::path(path).stem().string();

  stream.frames.resize(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows[0].size())
      throw LoadError("stream: ragged frame rows in '" + path + "'");
    for (std::size_t j = 0; j < rows[t].size(); ++j)
      stream.frames(static_cast<int>(t), static_cast<int>(j)) = rows[t][j];
  }
  return stream;
}

FeatureStream read_stream_csv(const std::string& path, double fps) {
  std::ifstream in(path);
  if (!in) throw LoadError("stream: cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw LoadError("stream: non-numeric cell at " + path + ":" +
                        std::to_string(line_no));
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw LoadError("stream: no frames in '" + path + "'");

  FeatureStream stream;
  stream.id = fs::path(path).stem().string();
  stream.fps = fps;
  stream.frames.resize(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows[0].size())
      throw LoadError("stream: ragged CSV rows in '" + path + "'");
    for (std::size_t j = 0; j < rows[t].size(); ++j)
      stream.frames(static_cast<int>(t), static_cast<int>(j)) = rows[t][j];
  }
  return stream;
}

FeatureStream read_stream_any(const std::string& path, double fps) {
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".csv") return read_stream_csv(path, fps);
  return read_stream_jsonl(path);
}

void write_labels_json(const Dataset& ds, const std::string& path) {
  json arr = json::array();
  for (const auto& l : ds.labels) {
    json rec;
    rec["stream"] = l.stream;
    rec["class"] = ds.classes[l.class_id].name;
    rec["kind"] = kind_name(l.kind);
    rec["t1"] = l.interval.t1;
    rec["t2"] = l.interval.t2;
    if (l.intention >= 0)
      rec["intention"] = ds.intentions[l.intention];
    else
      rec["intention"] = nullptr;
    arr.push_back(rec);
  }
  std::ofstream out(path);
  if (!out) throw LoadError("labels: cannot write '" + path + "'");
  out << arr.dump(2) << '\n';
}

void read_labels_json(Dataset& ds, const std::string& path) {
  const json arr = read_json_file(path, "labels");
  if (!arr.is_array()) throw LoadError("labels: expected a JSON array in '" + path + "'");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& rec = arr[i];
    ActivityInstance inst;
    const std::string where = path + "[" + std::to_string(i) + "]";
    try {
      inst.stream = rec.at("stream").get<std::string>();
      inst.kind = kind_from_name(rec.at("kind").get<std::string>(), where);
      inst.class_id = ds.register_class(rec.at("class").get<std::string>(), inst.kind);
      inst.interval.t1 = rec.at("t1").get<int>();
      inst.interval.t2 = rec.at("t2").get<int>();
    } catch (const json::exception& e) {
      throw LoadError("labels: bad record in " + where + ": " + e.what());
    }
    if (rec.contains("intention") && !rec.at("intention").is_null()) {
      const std::string name = rec.at("intention").get<std::string>();
      int id = ds.intention_id(name);
      if (id < 0) {
        ds.intentions.push_back(name);
        id = static_cast<int>(ds.intentions.size()) - 1;
      }
      inst.intention = id;
    }
    ds.labels.push_back(std::move(inst));
  }
}

void write_dataset(const Dataset& ds, const std::string& dir, std::uint64_t seed,
                   std::uint64_t config_hash) {
  fs::create_directories(fs::path(dir) / "streams");
  json manifest;
  manifest["version"] = 1;
  manifest["intentions"] = ds.intentions;
  json classes = json::array();
  for (const auto& c : ds.classes)
    classes.push_back({{"name", c.name}, {"kind", kind_name(c.kind)}});
  manifest["classes"] = classes;
  json streams = json::array();
  for (std::size_t i = 0; i < ds.streams.size(); ++i) {
    const auto& s = ds.streams[i];
    const std::string rel = "streams/" + s.id + ".jsonl";
    write_stream_jsonl(s, (fs::path(dir) / rel).string());
    json rec;
    rec["id"] = s.id;
    rec["file"] = rel;
    rec["fps"] = s.fps;
    rec["set"] = ds.stream_set[i];
    if (ds.stream_intention[i] >= 0)
      rec["intention"] = ds.intentions[ds.stream_intention[i]];
    else
      rec["intention"] = nullptr;
    streams.push_back(rec);
  }
  manifest["streams"] = streams;
  manifest["labels_file"] = "labels.json";
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(seed));
  manifest["provenance"]["seed"] = std::string(hex);
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash));
  manifest["provenance"]["config_hash"] = std::string(hex);

  write_labels_json(ds, (fs::path(dir) / "labels.json").string());
  std::ofstream out(fs::path(dir) / "dataset.json");
  if (!out) throw LoadError("dataset: cannot write manifest in '" + dir + "'");
  out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const std::string& manifest_path) {
  fs::path mpath(manifest_path);
  if (fs::is_directory(mpath)) mpath /= "dataset.json";
  const json manifest = read_json_file(mpath.string(), "dataset");
  const fs::path dir = mpath.parent_path();

  Dataset ds;
  if (manifest.contains("intentions"))
    ds.intentions = manifest.at("intentions").get<std::vector<std::string>>();
  if (manifest.contains("classes"))
    for (const auto& c : manifest.at("classes"))
      ds.register_class(c.at("name").get<std::string>(),
                        kind_from_name(c.at("kind").get<std::string>(), "manifest"));

  if (!manifest.contains("streams"))
    throw LoadError("dataset: manifest lacks 'streams'");
  for (const auto& rec : manifest.at("streams")) {
    FeatureStream s = read_stream_jsonl((dir / rec.at("file").get<std::string>()).string());
    s.id = rec.value("id", s.id);
    if (rec.contains("fps")) s.fps = rec.at("fps").get<double>();
    ds.streams.push_back(std::move(s));
    ds.stream_set.push_back(rec.value("set", std::string("all")));
    int intent = -1;
    if (rec.contains("intention") && !rec.at("intention").is_null())
      intent = ds.intention_id(rec.at("intention").get<std::string>());
    ds.stream_intention.push_back(intent);
  }

  const std::string labels_file = manifest.value("labels_file", std::string("labels.json"));
  read_labels_json(ds, (dir / labels_file).string());
  return ds;
}

std::uint64_t dataset_hash(const Dataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix_str = [&](const std::string& s) { h = fnv1a(s.data(), s.size(), h); };
  auto mix_int = [&](std::int64_t v) { h = fnv1a(&v, sizeof v, h); };
  auto mix_dbl = [&](double v) { h = fnv1a(&v, sizeof v, h); };

  for (std::size_t i = 0; i < ds.streams.size(); ++i) {
    const auto& s = ds.streams[i];
    mix_str(s.id);
    mix_dbl(s.fps);
    mix_str(ds.stream_set[i]);
    mix_int(ds.stream_intention[i]);
    for (int t = 0; t < s.frames.rows(); ++t)
      for (int j = 0; j < s.frames.cols(); ++j) mix_dbl(s.frames(t, j));
  }
  for (const auto& c : ds.classes) {
    mix_str(c.name);
    mix_int(c.kind == ActivityKind::kOnset ? 0 : 1);
  }
  for (const auto& name : ds.intentions) mix_str(name);
  for (const auto& l : ds.labels) {
    mix_str(l.stream);
    mix_int(l.class_id);
    mix_int(l.interval.t1);
    mix_int(l.interval.t2);
    mix_int(l.intention);
    mix_int(l.kind == ActivityKind::kOnset ? 0 : 1);
  }
  return h;
}

}  // namespace onsetdet
