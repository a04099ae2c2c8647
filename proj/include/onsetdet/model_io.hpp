// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>

#include "onsetdet/detector.hpp"
#include "onsetdet/run_config.hpp"
#include "onsetdet/stream_io.hpp"

namespace onsetdet {

/// Versioned serialization of a trained model together with the config that
/// produced it. A saved-then-loaded bundle reproduces bit-identical
/// detection scores.
struct ModelBundle {
  DetectorModel model;
  RunConfig config;
};

void save_model(const ModelBundle& bundle, const std::string& path);

/// Throws LoadError on unreadable input or on a version mismatch.
ModelBundle load_model(const std::string& path);

std::string model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const std::string& text);

}  // namespace onsetdet
