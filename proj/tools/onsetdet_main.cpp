// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface: generate synthetic datasets, train detectors, run
// streaming detection, evaluate AP against observation ratios, compare
// onset representations, and benchmark the per-frame cost.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "onsetdet/evaluation.hpp"
#include "onsetdet/model_io.hpp"
#include "onsetdet/run_config.hpp"
#include "onsetdet/stream_io.hpp"
#include "onsetdet/synthgen.hpp"
#include "onsetdet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace onsetdet;

namespace {

RunConfig config_from_flags(const std::string& config_path, std::uint64_t seed,
                            bool seed_set) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = load_run_config(config_path);
  if (seed_set) cfg.seed = seed;  // flags override config keys
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

json detections_to_json(const std::vector<Detection>& dets,
                        const std::vector<ActivityClassInfo>& classes) {
  json arr = json::array();
  for (const auto& d : dets) {
    json rec;
    rec["stream"] = d.stream;
    rec["class"] = classes[d.class_id].name;
    rec["t"] = d.t;
    rec["t1"] = d.interval.t1;
    rec["t2"] = d.interval.t2;
    rec["d"] = d.progress;
    rec["score"] = d.score;
    arr.push_back(rec);
  }
  return arr;
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<double> parse_ratios(const std::string& arg,
                                 const std::vector<double>& fallback) {
  if (arg.empty()) return fallback;
  std::vector<double> out;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

int cmd_gen(const std::string& preset, const std::string& config_path,
            std::uint64_t seed, const std::string& out_dir) {
  ScenarioConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw LoadError("scenario config: cannot open '" + config_path + "'");
    cfg = scenario_config_from_json(std::string(
        (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  } else {
    const auto presets = preset_configs();
    const auto it = presets.find(preset);
    if (it == presets.end())
      throw std::invalid_argument("unknown preset '" + preset + "'");
    cfg = it->second;
  }
  const GeneratedDataset gen = sample_scenario(cfg, seed);
  write_dataset(gen.dataset, out_dir, gen.seed, gen.config_hash);
  std::cout << "wrote dataset: " << out_dir << " (streams="
            << gen.dataset.streams.size() << ", labels=" << gen.dataset.labels.size()
            << ")\n";
  return 0;
}

int cmd_train(const std::string& data, const std::string& config_path,
              std::uint64_t seed, bool seed_set, const std::string& out_model) {
  const RunConfig cfg = config_from_flags(config_path, seed, seed_set);
  const Dataset ds = load_dataset(data);
  const auto violations = validate_dataset(ds);
  if (!violations.empty())
    throw std::runtime_error("dataset invalid: " + violations.front().rule + " (" +
                             violations.front().message + ")");
  ModelBundle bundle;
  bundle.config = cfg;
  bundle.model = train_detector_model(ds, cfg);
  save_model(bundle, out_model);
  std::cout << "wrote model: " << out_model << "\n";
  return 0;
}

int cmd_detect(const std::string& model_path, const std::string& stream_path,
               const std::string& out_path, const std::string& method_name,
               const std::string& traces_path, const std::string& signatures_path) {
  const ModelBundle bundle = load_model(model_path);
  const FeatureStream stream = read_stream_any(stream_path);
  const DetectMethod method = method_from_string(method_name);
  const std::vector<Detection> dets = detect_stream(bundle.model, stream, method);
  write_text(out_path, detections_to_json(dets, bundle.model.classes).dump(2) + "\n");
  std::cout << "wrote detections: " << out_path << " (" << dets.size() << ")\n";

  if (!traces_path.empty()) {
    const Eigen::MatrixXd traces = score_traces(bundle.model, stream, method);
    std::string csv = "t";
    for (int cid : bundle.model.main_ids())
      csv += "," + bundle.model.classes[cid].name;
    csv += "\n";
    for (int t = 0; t < traces.rows(); ++t) {
      csv += std::to_string(t);
      for (int c = 0; c < traces.cols(); ++c) csv += "," + csv_number(traces(t, c));
      csv += "\n";
    }
    write_text(traces_path, csv);
  }
  if (!signatures_path.empty()) {
    StreamContext ctx = StreamContext::build(bundle.model, stream);
    const OnsetSignatureSet sigs = ctx.signatures();
    std::string csv = "t";
    for (int cid : sigs.class_ids) csv += "," + bundle.model.classes[cid].name;
    csv += "\n";
    for (int t = 0; t < sigs.frames(); ++t) {
      csv += std::to_string(t);
      for (int k = 0; k < sigs.onset_count(); ++k)
        csv += "," + csv_number(sigs.series(t, k));
      csv += "\n";
    }
    write_text(signatures_path, csv);
  }
  return 0;
}

void write_ratio_table(
    const fs::path& path, const std::vector<double>& ratios,
    const std::vector<std::pair<std::string, std::vector<double>>>& cols) {
  std::string csv = "ratio";
  for (const auto& [name, vals] : cols) csv += "," + name;
  csv += "\n";
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    csv += csv_number(ratios[r]);
    for (const auto& [name, vals] : cols) csv += "," + csv_number(vals[r]);
    csv += "\n";
  }
  write_text(path, csv);
}

int cmd_eval(const std::string& model_path, const std::string& data,
             const std::string& ratios_arg, const std::string& out_dir,
             const std::vector<std::string>& methods, int threads) {
  const ModelBundle bundle = load_model(model_path);
  const Dataset ds = load_dataset(data);

  EvalConfig eval;
  eval.threads = threads;
  eval.ratios = parse_ratios(ratios_arg, eval.ratios);

  std::vector<std::pair<std::string, std::vector<double>>> cols;
  for (const std::string& name : methods) {
    const DetectMethod method = method_from_string(name);
    const std::vector<Detection> dets =
        detect_dataset(bundle.model, ds, method, threads);
    cols.emplace_back(name, mean_ap_vs_ratio(dets, ds, eval.ratios));

    // Per-class PR curves at every ratio.
    for (double ratio : eval.ratios) {
      for (int cid : ds.main_class_ids()) {
        std::vector<Detection> class_dets;
        for (const auto& d : dets)
          if (d.class_id == cid) class_dets.push_back(d);
        std::stable_sort(class_dets.begin(), class_dets.end(),
                         [](const Detection& a, const Detection& b) {
                           return a.score > b.score;
                         });
        std::vector<ActivityInstance> class_gt;
        for (const auto& l : ds.labels)
          if (l.class_id == cid) class_gt.push_back(l);
        if (class_gt.empty()) continue;
        const std::vector<char> labels = match_detections(class_dets, class_gt, ratio);
        std::vector<std::pair<double, bool>> scored(class_dets.size());
        for (std::size_t i = 0; i < class_dets.size(); ++i)
          scored[i] = {class_dets[i].score, labels[i] != 0};
        const PRCurve curve = pr_curve(scored, static_cast<int>(class_gt.size()));
        std::string csv = "threshold,precision,recall\n";
        for (const auto& p : curve.points)
          csv += csv_number(p.threshold) + "," + csv_number(p.precision) + "," +
                 csv_number(p.recall) + "\n";
        char ratio_buf[16];
        std::snprintf(ratio_buf, sizeof ratio_buf, "%.1f", ratio);
        write_text(fs::path(out_dir) / ("pr_" + name + "_" + ds.classes[cid].name +
                                        "_r" + ratio_buf + ".csv"),
                   csv);
      }
    }
  }
  write_ratio_table(fs::path(out_dir) / "mean_ap_vs_ratio.csv", eval.ratios, cols);
  std::cout << "wrote evaluation tables: " << out_dir << "\n";
  return 0;
}

int cmd_ablate(const std::string& data, const std::string& config_path,
               std::uint64_t seed, bool seed_set,
               const std::vector<std::string>& variant_names,
               const std::string& ratios_arg, const std::string& out_dir,
               int threads) {
  const RunConfig cfg = config_from_flags(config_path, seed, seed_set);
  const Dataset ds = load_dataset(data);
  EvalConfig eval;
  eval.threads = threads;
  eval.ratios = parse_ratios(ratios_arg, eval.ratios);
  std::vector<SignatureVariant> variants;
  for (const auto& name : variant_names) variants.push_back(variant_from_string(name));
  const AblationTable table = run_ablation(ds, variants, cfg, eval);
  write_ratio_table(fs::path(out_dir) / "ablation.csv", table.ratios, table.rows);
  std::cout << "wrote ablation table: " << out_dir << "/ablation.csv\n";
  return 0;
}

int cmd_bench(const std::string& model_path, const std::string& stream_path,
              int repeat, const std::string& out_path) {
  const ModelBundle bundle = load_model(model_path);
  const FeatureStream stream = read_stream_any(stream_path);
  const LatencyStats stats = benchmark_detection(bundle.model, stream, repeat);
  json j;
  j["frames_timed"] = stats.frames;
  j["median_us"] = stats.median_us;
  j["p90_us"] = stats.p90_us;
  j["p99_us"] = stats.p99_us;
  j["mean_us"] = stats.mean_us;
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
    std::cout << "wrote benchmark: " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"onsetdet: early activity detection on feature streams"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::string gen_preset = "strong_onset", gen_config, gen_out;
  std::uint64_t gen_seed = 1;
  gen->add_option("--preset", gen_preset, "built-in scenario name");
  gen->add_option("--config", gen_config, "scenario config JSON (overrides --preset)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output dataset directory")->required();

  auto* train = app.add_subcommand("train", "train a detector on a dataset");
  std::string train_data, train_config, train_out;
  std::uint64_t train_seed = 1;
  train->add_option("--data", train_data, "dataset directory or manifest")->required();
  train->add_option("--config", train_config, "run config JSON");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "training seed");
  train->add_option("--out-model", train_out, "output model path")->required();

  auto* detect = app.add_subcommand("detect", "detect activities in one stream");
  std::string det_model, det_stream, det_out, det_method = "early";
  std::string det_traces, det_sigs;
  detect->add_option("--model", det_model)->required();
  detect->add_option("--stream", det_stream, "stream file (.jsonl or .csv)")->required();
  detect->add_option("--out", det_out, "detections JSON path")->required();
  detect->add_option("--method", det_method, "early | after_fact | context_only | bayes");
  detect->add_option("--traces", det_traces, "optional per-frame score CSV");
  detect->add_option("--signatures", det_sigs, "optional onset response CSV");

  auto* eval = app.add_subcommand("eval", "evaluate a model on held-out data");
  std::string eval_model, eval_data, eval_ratios, eval_out;
  std::vector<std::string> eval_methods = {"early"};
  int eval_threads = 1;
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--ratios", eval_ratios, "comma-separated observation ratios");
  eval->add_option("--out-dir", eval_out)->required();
  eval->add_option("--methods", eval_methods, "detection methods to compare");
  eval->add_option("--threads", eval_threads);

  auto* ablate = app.add_subcommand(
      "ablate", "cross-validated comparison of onset representations");
  std::string abl_data, abl_config, abl_ratios, abl_out;
  std::uint64_t abl_seed = 1;
  std::vector<std::string> abl_variants = {
      "histogram_plus_mean_max", "histogram_only", "mean_max_only",
      "raw_prior_frames", "no_onset"};
  int abl_threads = 1;
  ablate->add_option("--data", abl_data)->required();
  ablate->add_option("--config", abl_config);
  auto* abl_seed_opt = ablate->add_option("--seed", abl_seed);
  ablate->add_option("--variants", abl_variants);
  ablate->add_option("--ratios", abl_ratios);
  ablate->add_option("--out-dir", abl_out)->required();
  ablate->add_option("--threads", abl_threads);

  auto* bench = app.add_subcommand("bench", "per-frame latency of the detection loop");
  std::string bench_model, bench_stream, bench_out;
  int bench_repeat = 3;
  bench->add_option("--model", bench_model)->required();
  bench->add_option("--stream", bench_stream)->required();
  bench->add_option("--repeat", bench_repeat);
  bench->add_option("--out", bench_out, "write stats JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_preset, gen_config, gen_seed, gen_out);
    if (train->parsed())
      return cmd_train(train_data, train_config, train_seed,
                       train_seed_opt->count() > 0, train_out);
    if (detect->parsed())
      return cmd_detect(det_model, det_stream, det_out, det_method, det_traces,
                        det_sigs);
    if (eval->parsed())
      return cmd_eval(eval_model, eval_data, eval_ratios, eval_out, eval_methods,
                      eval_threads);
    if (ablate->parsed())
      return cmd_ablate(abl_data, abl_config, abl_seed, abl_seed_opt->count() > 0,
                        abl_variants, abl_ratios, abl_out, abl_threads);
    if (bench->parsed())
      return cmd_bench(bench_model, bench_stream, bench_repeat, bench_out);
  } catch (const LoadError& e) {
    std::cerr << "error: load: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
