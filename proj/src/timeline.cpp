// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/timeline.hpp"

#include <algorithm>
#include <set>

namespace onsetdet {

std::vector<std::string> Dataset::set_names() const {
  std::set<std::string> names(stream_set.begin(), stream_set.end());
  return {names.begin(), names.end()};
}

Dataset Dataset::subset_by_set(const std::vector<std::string>& keep_sets) const {
  Dataset out;
  out.classes = classes;
  out.intentions = intentions;
  std::set<std::string> keep(keep_sets.begin(), keep_sets.end());
  std::set<std::string> kept_ids;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (!keep.count(stream_set[i])) continue;
    out.streams.push_back(streams[i]);
    out.stream_set.push_back(stream_set[i]);
    out.stream_intention.push_back(stream_intention[i]);
    kept_ids.insert(streams[i].id);
  }
  for (const auto& l : labels)
    if (kept_ids.count(l.stream)) out.labels.push_back(l);
  return out;
}

std::vector<Violation> validate_dataset(const Dataset& ds) {
  std::vector<Violation> out;

  if (ds.streams.size() != ds.stream_set.size() ||
      ds.streams.size() != ds.stream_intention.size()) {
    out.push_back({"", -1, "stream-tables-aligned",
                   "stream_set/stream_intention must parallel streams"});
  }

  for (const auto& s : ds.streams) {
    if (s.frames.cols() < 1)
      out.push_back({s.id, -1, "feature-dim", "stream has n_feat < 1"});
    if (s.fps <= 0.0)
      out.push_back({s.id, -1, "fps-positive", "stream fps must be positive"});
  }

  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    const auto& l = ds.labels[i];
    const int idx = static_cast<int>(i);
    const int si = ds.stream_index(l.stream);
    if (si < 0) {
      out.push_back({l.stream, idx, "dangling-stream-reference",
                     "label references unknown stream id '" + l.stream + "'"});
      continue;
    }
    if (l.interval.t1 < 0 || l.interval.t1 > l.interval.t2) {
      out.push_back({l.stream, idx, "interval-order",
                     "interval must satisfy 0 <= t1 <= t2"});
    }
    const int len = ds.streams[si].length();
    if (l.interval.t2 >= len) {
      out.push_back({l.stream, idx, "interval-out-of-range",
                     "interval end " + std::to_string(l.interval.t2) +
                         " exceeds last frame " + std::to_string(len - 1)});
    }
    if (l.class_id < 0 || l.class_id >= static_cast<int>(ds.classes.size())) {
      out.push_back({l.stream, idx, "unknown-class",
                     "label class id " + std::to_string(l.class_id) +
                         " is not registered"});
    } else if (ds.classes[l.class_id].kind != l.kind) {
      out.push_back({l.stream, idx, "class-kind-mismatch",
                     "label kind disagrees with class table entry '" +
                         ds.classes[l.class_id].name + "'"});
    }
    if (l.intention >= static_cast<int>(ds.intentions.size())) {
      out.push_back({l.stream, idx, "unknown-intention",
                     "intention id " + std::to_string(l.intention) +
                         " is not registered"});
    }
  }
  return out;
}

Interval observed_prefix(Interval iv, double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0)
    throw std::invalid_argument("observed_prefix: ratio must lie in (0, 1]");
  return {iv.t1, iv.t1 + round_half_up(ratio * iv.span())};
}

Interval observed_prefix(const ActivityInstance& inst, double ratio) {
  return observed_prefix(inst.interval, ratio);
}

double interval_overlap(Interval a, Interval b) {
  const int inter =
      std::max(0, std::min(a.t2, b.t2) - std::max(a.t1, b.t1) + 1);
  const int uni = a.length() + b.length() - inter;
  return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

}  // namespace onsetdet
