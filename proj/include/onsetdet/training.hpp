// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "onsetdet/detector.hpp"
#include "onsetdet/run_config.hpp"
#include "onsetdet/timeline.hpp"

namespace onsetdet {

/// Fits the whole detector on a dataset: codebook, onset templates,
/// duration/intention priors, the (class, progress level) classifier bank
/// and the Gaussian-Bayes baseline. Deterministic for a fixed config seed.
DetectorModel train_detector_model(const Dataset& ds, const RunConfig& cfg);

}  // namespace onsetdet
