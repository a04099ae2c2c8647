// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace onsetdet {

// Rounding convention used throughout: round-half-up.
inline int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

/// A continuous multivariate feature stream. Row t of `frames` is the
/// feature vector observed at frame t; fps is metadata only.
struct FeatureStream {
  std::string id;
  Eigen::MatrixXd frames;  // frames x n_feat
  double fps = 30.0;

  int length() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

/// Inclusive frame interval [t1, t2]; duration in frames is t2 - t1 + 1.
struct Interval {
  int t1 = 0;
  int t2 = 0;

  int length() const { return t2 - t1 + 1; }
  int span() const { return t2 - t1; }
  bool contains(int t) const { return t1 <= t && t <= t2; }
  bool operator==(const Interval& o) const { return t1 == o.t1 && t2 == o.t2; }
};

enum class ActivityKind { kOnset, kMain };

struct ActivityClassInfo {
  std::string name;
  ActivityKind kind = ActivityKind::kMain;
};

/// A labeled occurrence of an activity in a stream. `intention` is an index
/// into Dataset::intentions, -1 when unlabeled.
struct ActivityInstance {
  std::string stream;
  int class_id = -1;
  Interval interval;
  int intention = -1;
  ActivityKind kind = ActivityKind::kMain;
};

/// Streams plus labels plus the named-set partition used for
/// leave-one-set-out cross validation. Immutable after load; shared
/// read-only across workers.
struct Dataset {
  std::vector<ActivityClassInfo> classes;
  std::vector<std::string> intentions;
  std::vector<FeatureStream> streams;
  std::vector<ActivityInstance> labels;
  std::vector<std::string> stream_set;     // per stream, cross-validation set name
  std::vector<int> stream_intention;       // per stream, -1 when unlabeled

  int stream_index(const std::string& id) const {
    for (std::size_t i = 0; i < streams.size(); ++i)
      if (streams[i].id == id) return static_cast<int>(i);
    return -1;
  }

  int class_id(const std::string& name) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].name == name) return static_cast<int>(i);
    return -1;
  }

  int register_class(const std::string& name, ActivityKind kind) {
    const int existing = class_id(name);
    if (existing >= 0) return existing;
    classes.push_back({name, kind});
    return static_cast<int>(classes.size()) - 1;
  }

  int intention_id(const std::string& name) const {
    for (std::size_t i = 0; i < intentions.size(); ++i)
      if (intentions[i] == name) return static_cast<int>(i);
    return -1;
  }

  std::vector<int> class_ids(ActivityKind kind) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].kind == kind) out.push_back(static_cast<int>(i));
    return out;
  }

  std::vector<int> onset_class_ids() const { return class_ids(ActivityKind::kOnset); }
  std::vector<int> main_class_ids() const { return class_ids(ActivityKind::kMain); }

  std::vector<const ActivityInstance*> labels_for_stream(const std::string& id) const {
    std::vector<const ActivityInstance*> out;
    for (const auto& l : labels)
      if (l.stream == id) out.push_back(&l);
    return out;
  }

  std::vector<std::string> set_names() const;

  /// Streams whose set name satisfies `keep`, with the shared class and
  /// intention tables preserved (class ids stay stable across subsets).
  Dataset subset_by_set(const std::vector<std::string>& keep_sets) const;
};

/// One broken invariant; stream/label_index identify where, rule names what.
struct Violation {
  std::string stream;
  int label_index = -1;  // -1 for stream-level violations
  std::string rule;
  std::string message;
};

/// Checks every Dataset invariant; empty result means the dataset is valid.
std::vector<Violation> validate_dataset(const Dataset& ds);

/// Prefix of an instance observed at the given ratio:
/// [t1, t1 + round(ratio * (t2 - t1))]. Ratio must lie in (0, 1].
Interval observed_prefix(const ActivityInstance& inst, double ratio);
Interval observed_prefix(Interval iv, double ratio);

/// Intersection-over-union on inclusive frame counts, in [0, 1].
double interval_overlap(Interval a, Interval b);

}  // namespace onsetdet
