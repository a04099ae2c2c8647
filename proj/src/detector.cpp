// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace onsetdet {

int DurationPrior::index_of(int class_id) const {
  for (std::size_t i = 0; i < class_ids.size(); ++i)
    if (class_ids[i] == class_id) return static_cast<int>(i);
  throw std::invalid_argument("DurationPrior: class not covered");
}

std::vector<int> DetectorModel::main_ids() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i].kind == ActivityKind::kMain) out.push_back(static_cast<int>(i));
  return out;
}

double duration_prior_factor(const DurationPrior& prior, int class_id, int span) {
  const int ci = prior.index_of(class_id);
  const double mu = prior.mean_span[ci];
  const double sig = prior.sigma_span[ci];
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const double d = span - mu;
  const double log_n = -0.5 * (kLog2Pi + 2.0 * std::log(sig)) - d * d / (2.0 * sig * sig);
  if (prior.intent_prior.size() == 0) return std::exp(prior.weight * log_n);
  double sum = 0.0;
  for (int i = 0; i < prior.intent_prior.size(); ++i)
    sum += std::exp(prior.weight * (log_n + std::log(prior.class_given_intent(i, ci)))) *
           prior.intent_prior[i];
  return sum;
}

void DetectorModel::finalize() {
  hypothesis_prior_.clear();
  for (const auto& [cid, spans] : duration_spans) {
    std::vector<double> factors;
    factors.reserve(spans.size());
    for (int span : spans) factors.push_back(duration_prior_factor(prior, cid, span));
    hypothesis_prior_[cid] = std::move(factors);
  }
}

const std::vector<double>& DetectorModel::hypothesis_priors(int class_id) const {
  const auto it = hypothesis_prior_.find(class_id);
  if (it == hypothesis_prior_.end())
    throw std::logic_error("DetectorModel: finalize() not called");
  return it->second;
}

// ---------------------------------------------------------------------------
// StreamContext

StreamContext::StreamContext(const DetectorModel& model) : model_(&model) {
  hist_ = IntegralHistogram(model.codebook.size());
  const int K = model.onset_count();
  series_.resize(16, K);
  rising_prefix_.assign(K, {});
  for (int k = 0; k < K; ++k) {
    rising_prefix_[k].assign(model.cascade.scales.size(), std::vector<int>{0});
  }
  bow_scratch_.resize(model.codebook.size());
  context_scratch_.resize(model.context_length());
}

StreamContext StreamContext::build(const DetectorModel& model,
                                   const FeatureStream& stream) {
  StreamContext ctx(model);
  for (int t = 0; t < stream.length(); ++t) ctx.push_frame(stream.frames.row(t));
  return ctx;
}

void StreamContext::push_frame(const Eigen::Ref<const Eigen::RowVectorXd>& frame) {
  const int word = quantize_frame(frame, model_->codebook);
  hist_.append(word);
  const int t = hist_.frames() - 1;
  const int K = model_->onset_count();

  if (t >= series_.rows()) {
    Eigen::MatrixXd grown(series_.rows() * 2, K);
    grown.topRows(series_.rows()) = series_;
    series_.swap(grown);
  }
  for (int k = 0; k < K; ++k)
    series_(t, k) = signature_value(hist_, model_->templates[k], t);

  for (int k = 0; k < K; ++k) {
    for (std::size_t si = 0; si < model_->cascade.scales.size(); ++si) {
      const int s = model_->cascade.scales[si];
      const double prev = (t - s >= 0) ? series_(t - s, k) : 0.0;
      const bool rising = series_(t, k) - prev > 0.0;
      auto& pre = rising_prefix_[k][si];
      pre.push_back(pre.back() + (rising ? 1 : 0));
    }
  }
  context_cache_t_ = -1;
}

OnsetSignatureSet StreamContext::signatures() const {
  OnsetSignatureSet out;
  for (const auto& tmpl : model_->templates) out.class_ids.push_back(tmpl.class_id);
  out.series = series_.topRows(hist_.frames());
  return out;
}

const Eigen::VectorXd& StreamContext::bow(Interval iv) {
  const Eigen::VectorXi c = hist_.counts(iv);
  bow_scratch_ = c.cast<double>() / static_cast<double>(c.sum());
  return bow_scratch_;
}

namespace {

// Emission-ordered node walk shared with signature_vector: children first
// (floor midpoint split), then the node itself.
template <typename Fn>
void walk_nodes(int t1, int t2, int level, Fn&& fn) {
  if (level > 1) {
    const int sum = t1 + t2;
    const int mid = sum >= 0 ? sum / 2 : -((-sum + 1) / 2);
    walk_nodes(t1, mid, level - 1, fn);
    walk_nodes(mid + 1, t2, level - 1, fn);
  }
  fn(t1, t2);
}

}  // namespace

void StreamContext::fast_context(int t, Eigen::VectorXd& out) const {
  const CascadeConfig& cfg = model_->cascade;
  const int K = model_->onset_count();
  const SignatureVariant v = model_->variant;

  const bool want_hist = v == SignatureVariant::kHistogramPlusMeanMax ||
                         v == SignatureVariant::kHistogramOnly;
  const bool want_meanmax = v == SignatureVariant::kHistogramPlusMeanMax ||
                            v == SignatureVariant::kMeanMaxOnly;
  int pos = 0;
  if (want_hist) {
    for (int k = 0; k < K; ++k) {
      for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        const auto& pre = rising_prefix_[k][si];
        walk_nodes(t - cfg.window + 1, t, cfg.depth, [&](int a, int b) {
          const int len = b - a + 1;
          int rising = 0;
          if (b >= 0) rising = pre[b + 1] - pre[std::max(0, a)];
          out[pos++] = static_cast<double>(rising) / len;
          out[pos++] = static_cast<double>(len - rising) / len;
        });
      }
    }
  }
  if (want_meanmax) {
    for (int k = 0; k < K; ++k) {
      double sum = 0.0;
      for (int tt = std::max(0, t - cfg.window + 1); tt <= t; ++tt)
        sum += series_(tt, k);
      out[pos++] = sum / cfg.window;
    }
    for (int k = 0; k < K; ++k) {
      double mx = 0.0;
      for (int tt = std::max(0, t - cfg.window + 1); tt <= t; ++tt)
        mx = std::max(mx, series_(tt, k));
      out[pos++] = mx;
    }
  }
}

const Eigen::VectorXd& StreamContext::context(int t, int t1) {
  const SignatureVariant v = model_->variant;
  if (v == SignatureVariant::kNoOnset) {
    context_scratch_.setZero();
    return context_scratch_;
  }
  if (v == SignatureVariant::kRawPriorFrames) {
    context_scratch_.setZero();
    const int end = t1 - 1;
    if (end >= 0) {
      const Eigen::VectorXi c = hist_.counts({std::max(0, t1 - kRawPriorSpan), end});
      context_scratch_ = c.cast<double>() / static_cast<double>(c.sum());
    }
    return context_scratch_;
  }
  if (context_cache_t_ != t) {
    fast_context(t, context_scratch_);
    context_cache_t_ = t;
  }
  return context_scratch_;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

FrameScore score_frame_impl(const DetectorModel& model, StreamContext& ctx, int t,
                            int class_id, bool force_mask_bow) {
  const auto& levels = model.bank.progress_levels;
  const auto& spans = model.duration_spans.at(class_id);
  const auto& priors = model.hypothesis_priors(class_id);
  const int vocab = model.codebook.size();
  const int ctx_len = model.context_length();
  const bool mask_bow = model.mask_bow || force_mask_bow;
  const bool interval_context = model.variant == SignatureVariant::kRawPriorFrames;

  FrameScore best;
  const Eigen::VectorXd* shared_ctx =
      interval_context ? nullptr : &ctx.context(t, t);

  for (std::size_t li = 0; li < levels.size(); ++li) {
    const double d = levels[li];
    const LinearProbClassifier& clf = model.bank.at(class_id, static_cast<int>(li));
    double ctx_part = 0.0;
    if (!interval_context) ctx_part = clf.weights.tail(ctx_len).dot(*shared_ctx);
    for (std::size_t si = 0; si < spans.size(); ++si) {
      const int span = spans[si];
      const int t1 = t - round_half_up(d * span);
      if (t1 < 0) continue;
      double raw = clf.bias;
      raw += interval_context ? clf.weights.tail(ctx_len).dot(ctx.context(t, t1))
                              : ctx_part;
      if (!mask_bow) raw += clf.weights.head(vocab).dot(ctx.bow({t1, t}));
      const double s = prob_from_score(clf, raw) * priors[si];
      if (s > best.score) {
        best.score = s;
        best.progress = d;
        best.interval = {t1, t1 + span};
      }
    }
  }
  return best;
}

int level_index_for(const std::vector<double>& levels, double target) {
  int best = 0;
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (std::abs(levels[i] - target) < std::abs(levels[best] - target))
      best = static_cast<int>(i);
  return best;
}

}  // namespace

FrameScore score_frame(const DetectorModel& model, StreamContext& ctx, int t,
                       int class_id) {
  return score_frame_impl(model, ctx, t, class_id, false);
}

FrameScore context_only_score(const DetectorModel& model, StreamContext& ctx, int t,
                              int class_id) {
  return score_frame_impl(model, ctx, t, class_id, true);
}

FrameScore after_the_fact_score(const DetectorModel& model, StreamContext& ctx,
                                Interval iv, int class_id) {
  if (iv.t1 < 0 || iv.t2 >= ctx.frames() || iv.t1 > iv.t2)
    throw std::out_of_range("after_the_fact_score: interval out of range");
  const int li = level_index_for(model.bank.progress_levels, 1.0);
  const LinearProbClassifier& clf = model.bank.at(class_id, li);
  const double raw = clf.bias + clf.weights.head(model.codebook.size()).dot(ctx.bow(iv));
  const double p = prob_from_score(clf, raw);
  FrameScore out;
  out.score = p * duration_prior_factor(model.prior, class_id, iv.span());
  out.progress = 1.0;
  out.interval = iv;
  return out;
}

const char* to_string(DetectMethod m) {
  switch (m) {
    case DetectMethod::kEarly: return "early";
    case DetectMethod::kAfterFact: return "after_fact";
    case DetectMethod::kContextOnly: return "context_only";
    case DetectMethod::kBayes: return "bayes";
  }
  return "?";
}

DetectMethod method_from_string(const std::string& s) {
  for (DetectMethod m : {DetectMethod::kEarly, DetectMethod::kAfterFact,
                         DetectMethod::kContextOnly, DetectMethod::kBayes})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("unknown detect method: " + s);
}

namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

FrameScore method_score(const DetectorModel& model, StreamContext& ctx, int t,
                        int class_id, DetectMethod method) {
  switch (method) {
    case DetectMethod::kEarly:
      return score_frame(model, ctx, t, class_id);
    case DetectMethod::kContextOnly:
      return context_only_score(model, ctx, t, class_id);
    case DetectMethod::kAfterFact: {
      FrameScore best;
      for (int span : model.duration_spans.at(class_id)) {
        if (t - span < 0) continue;
        const FrameScore s = after_the_fact_score(model, ctx, {t - span, t}, class_id);
        if (s.score > best.score) best = s;
      }
      return best;
    }
    case DetectMethod::kBayes: {
      FrameScore best;
      for (int span : model.duration_spans.at(class_id)) {
        if (t - span < 0) continue;
        const double ll =
            gaussian_bayes_score(model.bayes, ctx.bow({t - span, t}), class_id);
        const double s = logistic(ll / model.codebook.size());
        if (s > best.score) {
          best.score = s;
          best.progress = 1.0;
          best.interval = {t - span, t};
        }
      }
      return best;
    }
  }
  return {};
}

}  // namespace

std::vector<int> suppress_peaks(const std::vector<double>& series, int window) {
  const int T = static_cast<int>(series.size());
  std::vector<int> peaks;
  for (int t = 0; t < T; ++t) {
    if (!(series[t] > 0.0)) continue;
    if (t > 0 && !(series[t] > series[t - 1])) continue;
    if (t + 1 < T && !(series[t] >= series[t + 1])) continue;
    peaks.push_back(t);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int a, int b) {
    if (series[a] != series[b]) return series[a] > series[b];
    return a < b;
  });
  std::vector<int> kept;
  for (int t : peaks) {
    bool suppressed = false;
    for (int u : kept)
      if (std::abs(t - u) <= window) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(t);
  }
  return kept;
}

std::vector<Detection> detect_stream(const DetectorModel& model,
                                     const FeatureStream& stream,
                                     DetectMethod method) {
  StreamContext ctx = StreamContext::build(model, stream);
  const std::vector<int> mains = model.main_ids();
  const int T = stream.length();

  std::vector<std::vector<FrameScore>> scores(mains.size());
  for (auto& v : scores) v.resize(T);
  for (int t = 0; t < T; ++t)
    for (std::size_t ci = 0; ci < mains.size(); ++ci)
      scores[ci][t] = method_score(model, ctx, t, mains[ci], method);

  std::vector<Detection> out;
  for (std::size_t ci = 0; ci < mains.size(); ++ci) {
    const int cid = mains[ci];
    const auto& s = scores[ci];
    const int win = round_half_up(model.nms_factor *
                                  model.prior.mean_span[model.prior.index_of(cid)]);
    std::vector<double> series(T);
    for (int t = 0; t < T; ++t) series[t] = s[t].score;
    for (int t : suppress_peaks(series, win)) {
      Detection det;
      det.stream = stream.id;
      det.class_id = cid;
      det.t = t;
      det.interval = s[t].interval;
      det.progress = s[t].progress;
      det.score = s[t].score;
      out.push_back(det);
    }
  }
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.class_id != b.class_id) return a.class_id < b.class_id;
    return a.t < b.t;
  });
  return out;
}

Eigen::MatrixXd score_traces(const DetectorModel& model, const FeatureStream& stream,
                             DetectMethod method) {
  StreamContext ctx = StreamContext::build(model, stream);
  const std::vector<int> mains = model.main_ids();
  Eigen::MatrixXd traces(stream.length(), mains.size());
  for (int t = 0; t < stream.length(); ++t)
    for (std::size_t ci = 0; ci < mains.size(); ++ci)
      traces(t, static_cast<int>(ci)) = method_score(model, ctx, t, mains[ci], method).score;
  return traces;
}

LatencyStats benchmark_detection(const DetectorModel& model,
                                 const FeatureStream& stream, int repeats) {
  StreamContext ctx = StreamContext::build(model, stream);
  const std::vector<int> mains = model.main_ids();
  const int T = stream.length();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(T) * std::max(1, repeats));

  volatile double sink = 0.0;  // keep the scoring loop observable
  for (int rep = 0; rep < std::max(1, repeats); ++rep) {
    for (int t = 0; t < T; ++t) {
      const auto t0 = std::chrono::steady_clock::now();
      double acc = 0.0;
      for (int cid : mains) acc += score_frame(model, ctx, t, cid).score;
      const auto t1 = std::chrono::steady_clock::now();
      sink = sink + acc;
      samples.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
  }
  std::sort(samples.begin(), samples.end());
  LatencyStats stats;
  stats.frames = static_cast<int>(samples.size());
  if (samples.empty()) return stats;
  auto at = [&](double q) {
    return samples[std::min(samples.size() - 1,
                            static_cast<std::size_t>(q * samples.size()))];
  };
  stats.median_us = at(0.5);
  stats.p90_us = at(0.9);
  stats.p99_us = at(0.99);
  double sum = 0.0;
  for (double v : samples) sum += v;
  stats.mean_us = sum / samples.size();
  return stats;
}

}  // namespace onsetdet
