// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "onsetdet/rng.hpp"

namespace onsetdet {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Canonical sample order: label first, then lexicographic features. Makes
// training independent of the order samples were assembled in.
std::vector<int> canonical_order(const TrainingSet& s) {
  std::vector<int> idx(s.labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (s.labels[a] != s.labels[b]) return s.labels[a] < s.labels[b];
    for (int j = 0; j < s.features.cols(); ++j) {
      if (s.features(a, j) != s.features(b, j))
        return s.features(a, j) < s.features(b, j);
    }
    return false;
  });
  return idx;
}

// Platt sigmoid fit, Newton iterations on the calibration slice. Targets
// are the usual smoothed frequencies. Returns (a, b) for
// p = sigmoid(a * score + b), with a kept nonnegative so probability stays
// monotone in the raw score.
std::pair<double, double> fit_platt(const Eigen::VectorXd& scores,
                                    const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  int n_pos = 0;
  for (int y : labels)
    if (y > 0) ++n_pos;
  const int n_neg = n - n_pos;
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);

  double a = 0.0;
  double b = std::log((n_pos + 1.0) / (n_neg + 1.0));
  for (int iter = 0; iter < 100; ++iter) {
    double g_a = 0.0, g_b = 0.0, h_aa = 1e-12, h_ab = 0.0, h_bb = 1e-12;
    for (int i = 0; i < n; ++i) {
      const double target = labels[i] > 0 ? t_pos : t_neg;
      const double p = sigmoid(a * scores[i] + b);
      const double d1 = p - target;
      const double d2 = p * (1.0 - p);
      g_a += d1 * scores[i];
      g_b += d1;
      h_aa += d2 * scores[i] * scores[i];
      h_ab += d2 * scores[i];
      h_bb += d2;
    }
    const double det = h_aa * h_bb - h_ab * h_ab;
    if (std::abs(det) < 1e-18) break;
    const double da = (h_bb * g_a - h_ab * g_b) / det;
    const double db = (h_aa * g_b - h_ab * g_a) / det;
    a -= da;
    b -= db;
    if (std::abs(da) < 1e-12 && std::abs(db) < 1e-12) break;
  }
  if (!(a >= 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    // Degenerate or anti-monotone calibration: fall back to the base rate.
    a = 0.0;
    b = std::log((n_pos + 1.0) / (n_neg + 1.0));
  }
  return {a, b};
}

}  // namespace

double prob_from_score(const LinearProbClassifier& clf, double raw_score) {
  return sigmoid(clf.platt_a * raw_score + clf.platt_b);
}

double predict_prob(const LinearProbClassifier& clf, const Eigen::VectorXd& x) {
  if (x.size() != clf.weights.size())
    throw std::invalid_argument("predict_prob: dimension mismatch");
  return prob_from_score(clf, clf.score(x));
}

LinearProbClassifier train_binary(const TrainingSet& samples, const TrainOptions& opts) {
  const int n = static_cast<int>(samples.labels.size());
  if (n < 2) throw std::invalid_argument("train_binary: need at least two samples");
  bool has_pos = false, has_neg = false;
  for (int y : samples.labels) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw std::invalid_argument("train_binary: both classes must be present");

  const int dim = static_cast<int>(samples.features.cols());
  const std::vector<int> order = canonical_order(samples);

  Eigen::MatrixXd X(n, dim);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X.row(i) = samples.features.row(order[i]);
    y[i] = samples.labels[order[i]] > 0 ? 1.0 : -1.0;
  }

  // Seeded shuffle reserves the calibration slice from the canonical order.
  // The hinge model itself sees every sample: subgradient sums keep exact
  // pairwise cancellations (mirrored data trains to an exactly zero bias),
  // which subset training would destroy.
  Rng rng(opts.seed);
  const std::vector<int> shuffled = rng.permutation(n);
  int n_holdout = static_cast<int>(std::floor(opts.holdout * n));
  n_holdout = std::min(n_holdout, n - 2);
  const std::vector<int> cal_idx(shuffled.end() - n_holdout, shuffled.end());

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  double bias = 0.0;
  Eigen::VectorXd margins(n), mask(n);
  for (int iter = 0; iter < opts.iterations; ++iter) {
    const double eta =
        opts.learning_rate / (1.0 + opts.learning_rate * opts.lambda * iter);
    margins.noalias() = X * w;
    margins.array() += bias;
    // Subgradient of mean hinge loss: violated samples contribute -y x.
    long violated_sign_sum = 0;
    for (int i = 0; i < n; ++i) {
      const bool violated = y[i] * margins[i] < 1.0;
      mask[i] = violated ? y[i] : 0.0;
      violated_sign_sum += violated ? (y[i] > 0 ? 1 : -1) : 0;
    }
    w.noalias() -= eta * (opts.lambda * w - (X.transpose() * mask) / n);
    bias += eta * static_cast<double>(violated_sign_sum) / n;
  }

  LinearProbClassifier clf;
  clf.weights = w;
  clf.bias = bias;

  // Calibration scores; fall back to all samples when the slice is unusable.
  std::vector<int> cal = cal_idx;
  bool cp = false, cn = false;
  for (int i : cal) (y[i] > 0 ? cp : cn) = true;
  if (cal.size() < 2 || !cp || !cn) {
    cal.resize(n);
    std::iota(cal.begin(), cal.end(), 0);
  }
  Eigen::VectorXd scores(cal.size());
  std::vector<int> cal_labels(cal.size());
  for (std::size_t i = 0; i < cal.size(); ++i) {
    scores[static_cast<int>(i)] = w.dot(X.row(cal[i])) + bias;
    cal_labels[i] = y[cal[i]] > 0 ? 1 : -1;
  }
  const auto [a, b] = fit_platt(scores, cal_labels);
  clf.platt_a = a;
  clf.platt_b = b;
  return clf;
}

const LinearProbClassifier& ClassifierBank::at(int class_id, int level_index) const {
  const auto it = per_class.find(class_id);
  if (it == per_class.end() || level_index < 0 ||
      level_index >= static_cast<int>(it->second.size()))
    throw std::out_of_range("ClassifierBank::at: no classifier for (class, level)");
  return it->second[level_index];
}

int ClassifierBank::input_dim() const {
  for (const auto& [cid, clfs] : per_class)
    for (const auto& c : clfs) return static_cast<int>(c.weights.size());
  return 0;
}

GaussianBayesModel GaussianBayesModel::fit(
    const std::map<int, std::vector<Eigen::VectorXd>>& by_class, double var_floor) {
  GaussianBayesModel model;
  for (const auto& [cid, vecs] : by_class) {
    if (vecs.empty()) continue;
    const int dim = static_cast<int>(vecs.front().size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& v : vecs) mean += v;
    mean /= static_cast<double>(vecs.size());
    Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
    for (const auto& v : vecs) var += (v - mean).cwiseAbs2();
    var /= static_cast<double>(vecs.size());
    var = var.cwiseMax(var_floor);
    model.stats[cid] = {mean, var};
  }
  return model;
}

double gaussian_bayes_score(const GaussianBayesModel& model,
                            const Eigen::VectorXd& bow_vector, int class_id) {
  const auto it = model.stats.find(class_id);
  if (it == model.stats.end())
    throw std::invalid_argument("gaussian_bayes_score: class not fitted");
  const auto& [mean, var] = it->second;
  if (bow_vector.size() != mean.size())
    throw std::invalid_argument("gaussian_bayes_score: dimension mismatch");
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  double ll = 0.0;
  for (int i = 0; i < mean.size(); ++i) {
    const double d = bow_vector[i] - mean[i];
    ll += -0.5 * (kLog2Pi + std::log(var[i])) - d * d / (2.0 * var[i]);
  }
  return ll;
}

std::vector<StreamFeatures> compute_stream_features(
    const Dataset& ds, const Codebook& cb, const std::vector<OnsetTemplate>& templates) {
  std::vector<StreamFeatures> out;
  out.reserve(ds.streams.size());
  for (const auto& s : ds.streams) {
    StreamFeatures f;
    f.id = s.id;
    f.hist = IntegralHistogram::build(quantize(s, cb), cb.size());
    f.sigs = compute_signatures(f.hist, templates);
    out.push_back(std::move(f));
  }
  return out;
}

TrainingSet build_training_set(const Dataset& ds,
                               const std::vector<StreamFeatures>& features,
                               int class_id, double progress,
                               const SamplerConfig& cfg) {
  if (!(progress > 0.0) || progress > 1.0)
    throw std::invalid_argument("build_training_set: progress must lie in (0, 1]");

  const int vocab = features.empty() ? 0 : features.front().hist.words();
  const int onsets = features.empty() ? 0 : features.front().sigs.onset_count();
  const int ctx_dim = context_dim(cfg.variant, onsets, cfg.cascade, vocab);

  auto feature_index = [&](const std::string& id) -> int {
    for (std::size_t i = 0; i < features.size(); ++i)
      if (features[i].id == id) return static_cast<int>(i);
    return -1;
  };

  auto make_vector = [&](const StreamFeatures& f, Interval bow_iv, int t, int t1) {
    Eigen::VectorXd x(vocab + ctx_dim);
    if (cfg.mask_bow)
      x.head(vocab).setZero();
    else
      x.head(vocab) = interval_histogram(f.hist, bow_iv, true);
    x.tail(ctx_dim) = context_features(cfg.variant, f.sigs, f.hist, t, t1, cfg.cascade);
    return x;
  };

  std::vector<Eigen::VectorXd> pos, neg;
  std::vector<const ActivityInstance*> class_instances;
  for (const auto& l : ds.labels) {
    if (l.class_id != class_id) continue;
    class_instances.push_back(&l);
    const int fi = feature_index(l.stream);
    if (fi < 0) throw std::invalid_argument("build_training_set: missing stream features");
    const int t = l.interval.t1 + round_half_up(progress * l.interval.span());
    pos.push_back(make_vector(features[fi], {l.interval.t1, t}, t, l.interval.t1));
  }
  if (pos.empty())
    throw std::runtime_error("build_training_set: class '" +
                             ds.classes[class_id].name + "' has no instances");

  // Span range for hypothesized negatives, taken from the observed instances.
  int span_lo = class_instances.front()->interval.span();
  int span_hi = span_lo;
  for (const auto* l : class_instances) {
    span_lo = std::min(span_lo, l->interval.span());
    span_hi = std::max(span_hi, l->interval.span());
  }
  span_lo = std::max(span_lo, 1);
  span_hi = std::max(span_hi, span_lo);

  const int want = static_cast<int>(std::llround(cfg.neg_ratio * pos.size()));
  Rng rng(cfg.seed);
  long attempts = 0;
  const long max_attempts = 1000L * std::max(want, 1);
  while (static_cast<int>(neg.size()) < want) {
    if (++attempts > max_attempts)
      throw std::runtime_error("build_training_set: could not place enough negatives");
    const int si = rng.uniform_int(0, static_cast<int>(ds.streams.size()) - 1);
    const FeatureStream& s = ds.streams[si];
    if (s.length() < 2) continue;
    const int t = rng.uniform_int(0, s.length() - 1);
    const int span = rng.uniform_int(span_lo, span_hi);
    const int t1 = t - round_half_up(progress * span);
    const int t2 = t1 + span;
    if (t1 < 0 || t2 >= s.length()) continue;
    const Interval hyp{t1, t2};
    bool clash = false;
    for (const auto* l : class_instances)
      if (l->stream == s.id && interval_overlap(hyp, l->interval) > cfg.neg_iou_max) {
        clash = true;
        break;
      }
    if (clash) continue;
    const int fi = feature_index(s.id);
    if (fi < 0) continue;
    neg.push_back(make_vector(features[fi], {t1, t}, t, t1));
  }

  TrainingSet out;
  out.features.resize(pos.size() + neg.size(), vocab + ctx_dim);
  out.labels.resize(pos.size() + neg.size());
  int row = 0;
  for (const auto& v : pos) {
    out.features.row(row) = v.transpose();
    out.labels[row++] = +1;
  }
  for (const auto& v : neg) {
    out.features.row(row) = v.transpose();
    out.labels[row++] = -1;
  }
  return out;
}

}  // namespace onsetdet
