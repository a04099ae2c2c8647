// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/onset_matcher.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace onsetdet {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
  const int lo = static_cast<int>(std::floor(h));
  const int hi = std::min(lo + 1, static_cast<int>(values.size()) - 1);
  const double frac = h - lo;
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

std::vector<int> duration_grid(const std::vector<double>& durations, int n) {
  const double lo = percentile(durations, 10.0);
  const double hi = percentile(durations, 90.0);
  std::vector<int> out;
  if (n <= 1) {
    out.push_back(std::max(1, round_half_up(0.5 * (lo + hi))));
  } else {
    for (int i = 0; i < n; ++i) {
      const double v = lo + (hi - lo) * i / (n - 1);
      out.push_back(std::max(1, round_half_up(v)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<OnsetTemplate> fit_onset_templates(const Dataset& ds, const Codebook& cb,
                                               int n_durations) {
  const std::vector<int> onset_ids = ds.onset_class_ids();

  // One integral histogram per stream that actually carries onset labels.
  std::map<std::string, IntegralHistogram> hists;
  for (const auto& l : ds.labels) {
    if (l.kind != ActivityKind::kOnset) continue;
    if (hists.count(l.stream)) continue;
    const int si = ds.stream_index(l.stream);
    if (si < 0) throw std::invalid_argument("fit_onset_templates: label references unknown stream");
    hists.emplace(l.stream,
                  IntegralHistogram::build(quantize(ds.streams[si], cb), cb.size()));
  }

  std::vector<OnsetTemplate> out;
  std::vector<std::string> missing;
  for (int cid : onset_ids) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(cb.size());
    std::vector<double> durations;
    int count = 0;
    for (const auto& l : ds.labels) {
      if (l.class_id != cid || l.kind != ActivityKind::kOnset) continue;
      mean += interval_histogram(hists.at(l.stream), l.interval, true);
      durations.push_back(static_cast<double>(l.interval.length()));
      ++count;
    }
    if (count == 0) {
      missing.push_back(ds.classes[cid].name);
      continue;
    }
    mean /= static_cast<double>(count);
    out.push_back({cid, mean, duration_grid(durations, n_durations)});
  }

  if (!missing.empty()) {
    std::string msg = "fit_onset_templates: no training instances for onset classes:";
    for (const auto& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }
  return out;
}

double template_distance(const Eigen::VectorXd& hist, const OnsetTemplate& tmpl) {
  if (hist.size() != tmpl.mean.size())
    throw std::invalid_argument("template_distance: dimension mismatch");
  return (tmpl.mean - hist).squaredNorm();
}

double signature_value(const IntegralHistogram& ih, const OnsetTemplate& tmpl, int t) {
  const int min_r = *std::min_element(tmpl.durations.begin(), tmpl.durations.end());
  if (t < min_r - 1) return 0.0;
  double best = 0.0;
  for (int r : tmpl.durations) {
    const Interval window{std::max(0, t - r + 1), t};
    const double score =
        1.0 - template_distance(interval_histogram(ih, window, true), tmpl);
    if (score > best) best = score;
  }
  return std::min(best, 1.0);  // lower clamp handled by best's 0 init
}

OnsetSignatureSet compute_signatures(const IntegralHistogram& ih,
                                     const std::vector<OnsetTemplate>& templates) {
  OnsetSignatureSet out;
  out.series.resize(ih.frames(), static_cast<int>(templates.size()));
  for (std::size_t k = 0; k < templates.size(); ++k) {
    out.class_ids.push_back(templates[k].class_id);
    for (int t = 0; t < ih.frames(); ++t)
      out.series(t, static_cast<int>(k)) = signature_value(ih, templates[k], t);
  }
  return out;
}

OnsetSignatureSet compute_signatures(const FeatureStream& stream, const Codebook& cb,
                                     const std::vector<OnsetTemplate>& templates) {
  const IntegralHistogram ih = IntegralHistogram::build(quantize(stream, cb), cb.size());
  return compute_signatures(ih, templates);
}

}  // namespace onsetdet
