// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Unreadable or malformed input; distinct from a validation failure.
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Frame records as JSON lines ({"t": ..., "x": [...]}) plus a sidecar
/// header file ({"id", "fps", "n_feat"}) next to it.
void write_stream_jsonl(const FeatureStream& stream, const std::string& path);

/// Reads a JSONL stream; the header comes from the sidecar file when
/// present, otherwise from a leading header line.
FeatureStream read_stream_jsonl(const std::string& path);

/// One row per frame, columns are feature values; id defaults to the file
/// stem and fps to the given value.
FeatureStream read_stream_csv(const std::string& path, double fps = 30.0);

/// Reads either format, keyed on the file extension.
FeatureStream read_stream_any(const std::string& path, double fps = 30.0);

/// Label array [{"stream","class","kind","t1","t2","intention"}, ...].
/// Loading registers unseen classes/intentions into the dataset tables.
void write_labels_json(const Dataset& ds, const std::string& path);
void read_labels_json(Dataset& ds, const std::string& path);

/// Full dataset directory: manifest (dataset.json), labels.json and one
/// JSONL stream per entry under streams/.
void write_dataset(const Dataset& ds, const std::string& dir,
                   std::uint64_t seed = 0, std::uint64_t config_hash = 0);
Dataset load_dataset(const std::string& manifest_path);

/// Content hash covering frames, labels and the set partition.
std::uint64_t dataset_hash(const Dataset& ds);

}  // namespace onsetdet
