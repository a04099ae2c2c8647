// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "onsetdet/model_io.hpp"
#include "onsetdet/run_config.hpp"
#include "onsetdet/synthgen.hpp"
#include "onsetdet/training.hpp"
#include "test_support.hpp"

using namespace onsetdet;

namespace {

ModelBundle tiny_trained_bundle() {
  const GeneratedDataset gen =
      sample_scenario(test_support::balanced_tiny_scenario(2, 2), 8);
  ModelBundle bundle;
  bundle.config.vocab = 8;
  bundle.config.svm_iterations = 50;
  bundle.config.progress_levels = {0.5, 1.0};
  bundle.config.seed = 4;
  bundle.model = train_detector_model(gen.dataset, bundle.config);
  return bundle;
}

}  // namespace

TEST_CASE("run config round-trips losslessly and rejects unknown keys") {
  RunConfig cfg;
  cfg.vocab = 24;
  cfg.cascade.window = 64;
  cfg.cascade.scales = {1, 2, 7};
  cfg.progress_levels = {0.25, 0.5, 0.75, 1.0};
  cfg.variant = SignatureVariant::kMeanMaxOnly;
  cfg.prior_weight = 0.75;
  cfg.seed = 123456789ULL;

  const RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back == cfg);

  CHECK_THROWS_AS(run_config_from_json("{\"vocob\": 3}"), std::invalid_argument);
  CHECK_THROWS_AS(run_config_from_json("not json"), std::invalid_argument);
}

TEST_CASE("saved and loaded models score streams bit-identically") {
  namespace fs = std::filesystem;
  const ModelBundle bundle = tiny_trained_bundle();

  const fs::path path = fs::temp_directory_path() / "onsetdet_model_test.json";
  save_model(bundle, path.string());
  const ModelBundle loaded = load_model(path.string());
  fs::remove(path);

  CHECK(loaded.config == bundle.config);
  CHECK(loaded.model.dataset_hash == bundle.model.dataset_hash);
  CHECK(loaded.model.classes.size() == bundle.model.classes.size());

  ScenarioConfig scfg = strong_onset_config();
  scfg.sets = 1;
  scfg.streams_per_set = 2;
  const GeneratedDataset probe = sample_scenario(scfg, 90);
  for (const auto& stream : probe.dataset.streams) {
    const auto a = detect_stream(bundle.model, stream);
    const auto b = detect_stream(loaded.model, stream);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].score == b[i].score);
      CHECK(a[i].t == b[i].t);
      CHECK(a[i].class_id == b[i].class_id);
      CHECK(a[i].interval == b[i].interval);
    }
  }
}

TEST_CASE("loading a mismatched model version fails loudly") {
  const ModelBundle bundle = tiny_trained_bundle();
  nlohmann::json j = nlohmann::json::parse(model_to_json(bundle));
  j["version"] = 999;
  CHECK_THROWS_WITH_AS(model_from_json(j.dump()),
                       doctest::Contains("version"), LoadError);

  j["format"] = "something-else";
  CHECK_THROWS_AS(model_from_json(j.dump()), LoadError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), LoadError);
}
