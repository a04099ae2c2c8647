// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/evaluation.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "onsetdet/rng.hpp"

namespace onsetdet {

namespace {

// Static index partition over worker threads; every index writes its own
// slot, so results do not depend on scheduling. The first worker exception
// is rethrown on the calling thread.
template <typename Fn>
void parallel_indexed(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < n; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool sorted_by_score_desc(const std::vector<Detection>& dets) {
  for (std::size_t i = 1; i < dets.size(); ++i)
    if (dets[i].score > dets[i - 1].score) return false;
  return true;
}

}  // namespace

std::vector<char> match_detections(const std::vector<Detection>& dets,
                                   const std::vector<ActivityInstance>& ground_truth,
                                   double ratio) {
  if (!sorted_by_score_desc(dets))
    throw std::invalid_argument("match_detections: detections must be score-sorted");

  // Among eligible instances a detection prefers the one it fired earliest
  // in, relative to duration. That preference does not depend on the ratio,
  // so a detection's match is stable as the ratio sweep widens eligibility.
  auto eligibility = [](const Detection& d, const ActivityInstance& g) {
    return static_cast<double>(d.t - g.interval.t1) / std::max(1, g.interval.span());
  };

  std::vector<char> matched_gt(ground_truth.size(), 0);
  std::vector<char> labels(dets.size(), 0);
  for (std::size_t di = 0; di < dets.size(); ++di) {
    const Detection& d = dets[di];
    int best = -1;
    for (std::size_t gi = 0; gi < ground_truth.size(); ++gi) {
      const ActivityInstance& g = ground_truth[gi];
      if (matched_gt[gi] || g.class_id != d.class_id || g.stream != d.stream) continue;
      const Interval prefix = observed_prefix(g, ratio);
      if (d.t < g.interval.t1 || d.t > prefix.t2) continue;
      if (best < 0 ||
          eligibility(d, g) < eligibility(d, ground_truth[best]) ||
          (eligibility(d, g) == eligibility(d, ground_truth[best]) &&
           g.interval.t1 < ground_truth[best].interval.t1))
        best = static_cast<int>(gi);
    }
    if (best >= 0) {
      matched_gt[best] = 1;
      labels[di] = 1;
    }
  }
  return labels;
}

PRCurve pr_curve(const std::vector<std::pair<double, bool>>& labeled, int n_gt) {
  if (n_gt < 1) throw std::invalid_argument("pr_curve: need at least one ground truth");
  std::vector<std::pair<double, bool>> sorted = labeled;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  PRCurve curve;
  int tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double threshold = sorted[i].first;
    while (i < sorted.size() && sorted[i].first == threshold) {
      (sorted[i].second ? tp : fp) += 1;
      ++i;
    }
    PRPoint p;
    p.threshold = threshold;
    p.precision = static_cast<double>(tp) / (tp + fp);
    p.recall = static_cast<double>(tp) / n_gt;
    curve.points.push_back(p);
  }
  return curve;
}

double average_precision(const PRCurve& curve) {
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : curve.points) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

double ap_for_class(const std::vector<Detection>& dets, const Dataset& gt,
                    int class_id, double ratio) {
  std::vector<Detection> class_dets;
  for (const auto& d : dets)
    if (d.class_id == class_id) class_dets.push_back(d);
  std::stable_sort(class_dets.begin(), class_dets.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });

  std::vector<ActivityInstance> class_gt;
  for (const auto& l : gt.labels)
    if (l.class_id == class_id) class_gt.push_back(l);
  if (class_gt.empty())
    throw std::invalid_argument("ap_for_class: class has no ground truth");

  const std::vector<char> labels = match_detections(class_dets, class_gt, ratio);
  std::vector<std::pair<double, bool>> scored(class_dets.size());
  for (std::size_t i = 0; i < class_dets.size(); ++i)
    scored[i] = {class_dets[i].score, labels[i] != 0};
  return average_precision(pr_curve(scored, static_cast<int>(class_gt.size())));
}

double mean_ap(const std::vector<Detection>& dets, const Dataset& gt, double ratio) {
  double sum = 0.0;
  int n = 0;
  for (int cid : gt.main_class_ids()) {
    bool has_gt = false;
    for (const auto& l : gt.labels)
      if (l.class_id == cid) {
        has_gt = true;
        break;
      }
    if (!has_gt) continue;
    sum += ap_for_class(dets, gt, cid, ratio);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("mean_ap: no class has ground truth");
  return sum / n;
}

std::vector<Detection> detect_dataset(const DetectorModel& model, const Dataset& ds,
                                      DetectMethod method, int threads) {
  std::vector<std::vector<Detection>> per_stream(ds.streams.size());
  parallel_indexed(static_cast<int>(ds.streams.size()), threads, [&](int i) {
    per_stream[i] = detect_stream(model, ds.streams[i], method);
  });
  std::vector<Detection> out;
  for (auto& v : per_stream)
    out.insert(out.end(), v.begin(), v.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

std::vector<double> mean_ap_vs_ratio(const std::vector<Detection>& dets,
                                     const Dataset& gt,
                                     const std::vector<double>& ratios) {
  std::vector<double> out;
  out.reserve(ratios.size());
  for (double r : ratios) out.push_back(mean_ap(dets, gt, r));
  return out;
}

std::vector<double> mean_ap_vs_ratio(const DetectorModel& model, const Dataset& test,
                                     const EvalConfig& cfg, DetectMethod method) {
  const std::vector<Detection> dets = detect_dataset(model, test, method, cfg.threads);
  return mean_ap_vs_ratio(dets, test, cfg.ratios);
}

std::vector<Detection> cross_validated_detections(const Dataset& ds,
                                                  const RunConfig& cfg,
                                                  DetectMethod method, int threads) {
  const std::vector<std::string> sets = ds.set_names();
  if (sets.size() < 2)
    throw std::invalid_argument("cross_validated_detections: need at least two sets");

  std::vector<std::vector<Detection>> per_fold(sets.size());
  parallel_indexed(static_cast<int>(sets.size()), threads, [&](int fi) {
    std::vector<std::string> train_sets;
    for (const auto& s : sets)
      if (s != sets[fi]) train_sets.push_back(s);
    const Dataset train = ds.subset_by_set(train_sets);
    const Dataset test = ds.subset_by_set({sets[fi]});
    RunConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, 0xF01D + static_cast<std::uint64_t>(fi));
    const DetectorModel model = train_detector_model(train, fold_cfg);
    per_fold[fi] = detect_dataset(model, test, method, 1);
  });

  std::vector<Detection> out;  // merged in fold order, then score-sorted
  for (auto& v : per_fold)
    out.insert(out.end(), v.begin(), v.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

AblationTable run_ablation(const Dataset& ds, const std::vector<SignatureVariant>& variants,
                           const RunConfig& cfg, const EvalConfig& eval) {
  AblationTable table;
  table.ratios = eval.ratios;
  for (SignatureVariant v : variants) {
    RunConfig vc = cfg;
    vc.variant = v;
    const std::vector<Detection> dets =
        cross_validated_detections(ds, vc, DetectMethod::kEarly, eval.threads);
    table.rows.emplace_back(to_string(v), mean_ap_vs_ratio(dets, ds, eval.ratios));
  }
  return table;
}

double onset_peak_mean_ap(const Dataset& train, const Dataset& test,
                          const RunConfig& cfg) {
  const Eigen::MatrixXd frames = [&] {
    long total = 0;
    for (const auto& s : train.streams) total += s.length();
    Eigen::MatrixXd all(total, train.streams.front().dim());
    long row = 0;
    for (const auto& s : train.streams) {
      all.middleRows(row, s.length()) = s.frames;
      row += s.length();
    }
    return all;
  }();
  const Codebook cb =
      fit_codebook(frames, cfg.vocab, derive_seed(cfg.seed, 0xC0DE));
  const std::vector<OnsetTemplate> templates =
      fit_onset_templates(train, cb, cfg.template_durations);

  // Mean onset span for the suppression window.
  double span_sum = 0.0;
  int span_n = 0;
  for (const auto& l : train.labels)
    if (l.kind == ActivityKind::kOnset) {
      span_sum += l.interval.span();
      ++span_n;
    }
  const int win = std::max(1, round_half_up(cfg.nms_factor * span_sum / std::max(1, span_n)));

  std::vector<Detection> dets;
  for (const auto& stream : test.streams) {
    const OnsetSignatureSet sigs = compute_signatures(stream, cb, templates);
    for (int k = 0; k < sigs.onset_count(); ++k) {
      std::vector<double> series(sigs.frames());
      for (int t = 0; t < sigs.frames(); ++t) series[t] = sigs.series(t, k);
      for (int t : suppress_peaks(series, win)) {
        Detection d;
        d.stream = stream.id;
        d.class_id = sigs.class_ids[k];
        d.t = t;
        d.interval = {t, t};
        d.score = series[t];
        dets.push_back(d);
      }
    }
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });

  double sum = 0.0;
  int n = 0;
  for (int cid : test.onset_class_ids()) {
    bool has_gt = false;
    for (const auto& l : test.labels)
      if (l.class_id == cid) {
        has_gt = true;
        break;
      }
    if (!has_gt) continue;
    sum += ap_for_class(dets, test, cid, 1.0);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("onset_peak_mean_ap: no onset ground truth");
  return sum / n;
}

}  // namespace onsetdet
