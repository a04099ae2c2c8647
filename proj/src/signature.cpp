// Copyright (C) 2026 the onsetdet authors
// SPDX-License-Identifier: Apache-2.0
//
#include "onsetdet/signature.hpp"

#include <stdexcept>

namespace onsetdet {

void CascadeConfig::check() const {
  if (depth < 1) throw std::invalid_argument("cascade: depth must be >= 1");
  if (window < (1 << (depth - 1)))
    throw std::invalid_argument("cascade: window must be >= 2^(depth-1)");
  if (scales.empty()) throw std::invalid_argument("cascade: scales must be nonempty");
  for (int s : scales)
    if (s < 1) throw std::invalid_argument("cascade: every scale must be >= 1");
}

namespace {

inline double value_at(const Eigen::VectorXd& series, int t) {
  return t >= 0 ? series[t] : 0.0;
}

// Counting over possibly-negative start indices; the public entry point
// validates ranges before delegating here.
std::pair<int, int> count_gradients(const Eigen::VectorXd& series, int t1, int t2,
                                    int step) {
  int rising = 0;
  for (int t = t1; t <= t2; ++t)
    if (value_at(series, t) - value_at(series, t - step) > 0.0) ++rising;
  return {rising, (t2 - t1 + 1) - rising};
}

void emit_node(const Eigen::VectorXd& series, int t1, int t2, int level, int step,
               Eigen::VectorXi& out, int& pos) {
  if (level > 1) {
    const int mid = (t1 + t2) >= 0 ? (t1 + t2) / 2
                                   : -((-(t1 + t2) + 1) / 2);  // floor for negatives
    emit_node(series, t1, mid, level - 1, step, out, pos);
    emit_node(series, mid + 1, t2, level - 1, step, out, pos);
  }
  const auto [rising, non_rising] = count_gradients(series, t1, t2, step);
  out[pos++] = rising;
  out[pos++] = non_rising;
}

// Node interval lengths in emission order; used for bin normalization.
void emit_lengths(int t1, int t2, int level, std::vector<int>& out) {
  if (level > 1) {
    const int mid = (t1 + t2) >= 0 ? (t1 + t2) / 2 : -((-(t1 + t2) + 1) / 2);
    emit_lengths(t1, mid, level - 1, out);
    emit_lengths(mid + 1, t2, level - 1, out);
  }
  out.push_back(t2 - t1 + 1);
}

}  // namespace

std::pair<int, int> gradient_counts(const Eigen::VectorXd& series, Interval iv,
                                    int step) {
  if (step < 1) throw std::invalid_argument("gradient_counts: step must be >= 1");
  if (iv.t1 < 0 || iv.t1 > iv.t2 || iv.t2 >= series.size())
    throw std::out_of_range("gradient_counts: interval out of range");
  return count_gradients(series, iv.t1, iv.t2, step);
}

Eigen::VectorXi cascade_histogram(const Eigen::VectorXd& series, int t,
                                  const CascadeConfig& cfg) {
  cfg.check();
  if (t < 0) throw std::out_of_range("cascade_histogram: t must be >= 0");
  Eigen::VectorXi out(cfg.bins_per_onset());
  int pos = 0;
  for (int s : cfg.scales)
    emit_node(series, t - cfg.window + 1, t, cfg.depth, s, out, pos);
  return out;
}

Eigen::VectorXd signature_vector(const OnsetSignatureSet& sigs, int t,
                                 const CascadeConfig& cfg) {
  cfg.check();
  const int K = sigs.onset_count();
  Eigen::VectorXd x(signature_length(K, cfg));

  std::vector<int> lengths;
  emit_lengths(t - cfg.window + 1, t, cfg.depth, lengths);

  int pos = 0;
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd series = sigs.series.col(k);
    const Eigen::VectorXi bins = cascade_histogram(series, t, cfg);
    for (int s = 0; s < static_cast<int>(cfg.scales.size()); ++s)
      for (std::size_t node = 0; node < lengths.size(); ++node) {
        const int base = s * cfg.nodes() * 2 + static_cast<int>(node) * 2;
        x[pos++] = static_cast<double>(bins[base]) / lengths[node];
        x[pos++] = static_cast<double>(bins[base + 1]) / lengths[node];
      }
  }
  for (int k = 0; k < K; ++k) {
    double sum = 0.0;
    for (int tt = std::max(0, t - cfg.window + 1); tt <= t; ++tt)
      sum += sigs.series(tt, k);
    x[pos++] = sum / cfg.window;
  }
  for (int k = 0; k < K; ++k) {
    double mx = 0.0;  // zero extension below frame 0
    for (int tt = std::max(0, t - cfg.window + 1); tt <= t; ++tt)
      mx = std::max(mx, sigs.series(tt, k));
    x[pos++] = mx;
  }
  return x;
}

const char* to_string(SignatureVariant v) {
  switch (v) {
    case SignatureVariant::kHistogramPlusMeanMax: return "histogram_plus_mean_max";
    case SignatureVariant::kHistogramOnly: return "histogram_only";
    case SignatureVariant::kMeanMaxOnly: return "mean_max_only";
    case SignatureVariant::kRawPriorFrames: return "raw_prior_frames";
    case SignatureVariant::kNoOnset: return "no_onset";
  }
  return "?";
}

SignatureVariant variant_from_string(const std::string& s) {
  for (SignatureVariant v :
       {SignatureVariant::kHistogramPlusMeanMax, SignatureVariant::kHistogramOnly,
        SignatureVariant::kMeanMaxOnly, SignatureVariant::kRawPriorFrames,
        SignatureVariant::kNoOnset})
    if (s == to_string(v)) return v;
  throw std::invalid_argument("unknown signature variant: " + s);
}

int context_dim(SignatureVariant v, int onsets, const CascadeConfig& cfg, int vocab) {
  switch (v) {
    case SignatureVariant::kHistogramPlusMeanMax:
    case SignatureVariant::kNoOnset:
      return signature_length(onsets, cfg);
    case SignatureVariant::kHistogramOnly:
      return onsets * cfg.bins_per_onset();
    case SignatureVariant::kMeanMaxOnly:
      return 2 * onsets;
    case SignatureVariant::kRawPriorFrames:
      return vocab;
  }
  return 0;
}

Eigen::VectorXd context_features(SignatureVariant v, const OnsetSignatureSet& sigs,
                                 const IntegralHistogram& ih, int t, int t1,
                                 const CascadeConfig& cfg) {
  const int K = sigs.onset_count();
  switch (v) {
    case SignatureVariant::kHistogramPlusMeanMax:
      return signature_vector(sigs, t, cfg);
    case SignatureVariant::kNoOnset:
      return Eigen::VectorXd::Zero(signature_length(K, cfg));
    case SignatureVariant::kHistogramOnly:
      return signature_vector(sigs, t, cfg).head(K * cfg.bins_per_onset());
    case SignatureVariant::kMeanMaxOnly:
      return signature_vector(sigs, t, cfg).tail(2 * K);
    case SignatureVariant::kRawPriorFrames: {
      Eigen::VectorXd bow = Eigen::VectorXd::Zero(ih.words());
      const int end = t1 - 1;
      if (end >= 0) {
        const Interval window{std::max(0, t1 - kRawPriorSpan), end};
        bow = interval_histogram(ih, window, true);
      }
      return bow;
    }
  }
  return {};
}

}  // namespace onsetdet
