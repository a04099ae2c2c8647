// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "onsetdet/rng.hpp"
#include "onsetdet/stream_io.hpp"

namespace onsetdet {

namespace {

constexpr double kMinSigmaSpan = 2.0;
constexpr int kMinSpanHypothesis = 2;

Eigen::MatrixXd gather_frames(const Dataset& ds, int cap, std::uint64_t seed) {
  long total = 0;
  for (const auto& s : ds.streams) total += s.length();
  if (total == 0) throw std::invalid_argument("train: dataset has no frames");
  const int dim = ds.streams.front().dim();

  Eigen::MatrixXd all(total, dim);
  long row = 0;
  for (const auto& s : ds.streams) {
    all.middleRows(row, s.length()) = s.frames;
    row += s.length();
  }
  if (cap <= 0 || total <= cap) return all;

  // Seeded subsample without replacement (partial Fisher-Yates).
  Rng rng(derive_seed(seed, 0x5AF1));
  std::vector<long> idx(total);
  for (long i = 0; i < total; ++i) idx[i] = i;
  Eigen::MatrixXd out(cap, dim);
  for (int i = 0; i < cap; ++i) {
    const long j = i + static_cast<long>(rng.uniform01() * (total - i));
    std::swap(idx[i], idx[std::min(j, total - 1)]);
    out.row(i) = all.row(idx[i]);
  }
  return out;
}

std::vector<int> span_hypotheses(double mu, double sigma, int count) {
  std::vector<int> out;
  if (count <= 1) {
    out.push_back(std::max(kMinSpanHypothesis, round_half_up(mu)));
  } else {
    for (int i = 0; i < count; ++i) {
      const double v = mu - sigma + 2.0 * sigma * i / (count - 1);
      out.push_back(std::max(kMinSpanHypothesis, round_half_up(v)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

DetectorModel train_detector_model(const Dataset& ds, const RunConfig& cfg) {
  cfg.cascade.check();
  if (ds.streams.empty()) throw std::invalid_argument("train: dataset has no streams");

  DetectorModel model;
  model.classes = ds.classes;
  model.intentions = ds.intentions;
  model.cascade = cfg.cascade;
  model.variant = cfg.variant;
  model.mask_bow = cfg.mask_bow;
  model.nms_factor = cfg.nms_factor;
  model.seed = cfg.seed;
  model.dataset_hash = dataset_hash(ds);

  model.codebook = fit_codebook(
      gather_frames(ds, cfg.kmeans_sample_cap, cfg.seed), cfg.vocab,
      derive_seed(cfg.seed, 0xC0DE));
  model.templates = fit_onset_templates(ds, model.codebook, cfg.template_durations);

  const std::vector<int> mains = ds.main_class_ids();
  if (mains.empty()) throw std::invalid_argument("train: no main activity classes");

  // Duration statistics per main class, on start-to-end spans.
  DurationPrior prior;
  prior.class_ids = mains;
  prior.mean_span.resize(mains.size());
  prior.sigma_span.resize(mains.size());
  prior.weight = cfg.prior_weight;
  for (std::size_t ci = 0; ci < mains.size(); ++ci) {
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (const auto& l : ds.labels) {
      if (l.class_id != mains[ci]) continue;
      sum += l.interval.span();
      sum2 += static_cast<double>(l.interval.span()) * l.interval.span();
      ++n;
    }
    if (n == 0)
      throw std::runtime_error("train: class '" + ds.classes[mains[ci]].name +
                               "' has no instances");
    const double mu = sum / n;
    const double var = std::max(0.0, sum2 / n - mu * mu);
    prior.mean_span[ci] = mu;
    prior.sigma_span[ci] = std::max(kMinSigmaSpan, std::sqrt(var));
  }

  // Intention mixing: uniform intention prior, add-one smoothed co-occurrence.
  const int n_intent = static_cast<int>(ds.intentions.size());
  if (n_intent > 0) {
    prior.intent_prior =
        Eigen::VectorXd::Constant(n_intent, 1.0 / static_cast<double>(n_intent));
    Eigen::MatrixXd counts = Eigen::MatrixXd::Ones(n_intent, mains.size());
    for (const auto& l : ds.labels) {
      if (l.kind != ActivityKind::kMain || l.intention < 0) continue;
      const auto it = std::find(mains.begin(), mains.end(), l.class_id);
      if (it != mains.end())
        counts(l.intention, static_cast<int>(it - mains.begin())) += 1.0;
    }
    prior.class_given_intent = counts.array().colwise() / counts.rowwise().sum().array();
  }
  model.prior = prior;

  for (std::size_t ci = 0; ci < mains.size(); ++ci)
    model.duration_spans[mains[ci]] = span_hypotheses(
        prior.mean_span[ci], prior.sigma_span[ci], cfg.duration_hypotheses);

  // Classifier bank, one binary model per (class, progress level).
  const std::vector<StreamFeatures> features =
      compute_stream_features(ds, model.codebook, model.templates);
  model.bank.progress_levels = cfg.progress_levels;
  for (int cid : mains) {
    std::vector<LinearProbClassifier> per_level;
    for (std::size_t li = 0; li < cfg.progress_levels.size(); ++li) {
      SamplerConfig sampler;
      sampler.cascade = cfg.cascade;
      sampler.variant = cfg.variant;
      sampler.mask_bow = cfg.mask_bow;
      sampler.neg_ratio = cfg.neg_ratio;
      sampler.neg_iou_max = cfg.neg_iou_max;
      sampler.seed = derive_seed(cfg.seed, 0x10000 + cid * 64 + li);
      const TrainingSet samples =
          build_training_set(ds, features, cid, cfg.progress_levels[li], sampler);
      TrainOptions opts;
      opts.lambda = cfg.svm_lambda;
      opts.iterations = cfg.svm_iterations;
      opts.learning_rate = cfg.svm_learning_rate;
      opts.holdout = cfg.platt_holdout;
      opts.seed = derive_seed(cfg.seed, 0x20000 + cid * 64 + li);
      per_level.push_back(train_binary(samples, opts));
    }
    model.bank.per_class[cid] = std::move(per_level);
  }

  // Gaussian-Bayes baseline over full-interval bag-of-words vectors.
  std::map<int, std::vector<Eigen::VectorXd>> by_class;
  for (const auto& l : ds.labels) {
    if (l.kind != ActivityKind::kMain) continue;
    for (const auto& f : features)
      if (f.id == l.stream) {
        by_class[l.class_id].push_back(interval_histogram(f.hist, l.interval, true));
        break;
      }
  }
  model.bayes = GaussianBayesModel::fit(by_class);

  model.finalize();
  return model;
}

}  // namespace onsetdet
