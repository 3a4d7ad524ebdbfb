#pragma once

// Joint training of the decoder weights and the channel estimate by Adam
// on the closed-form loss, one random contiguous sub-sequence per update.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vaeq/adam.hpp"
#include "vaeq/complex_seq.hpp"
#include "vaeq/decoder.hpp"
#include "vaeq/gradients.hpp"
#include "vaeq/rng.hpp"
#include "vaeq/signal.hpp"

namespace vaeq {

struct TrainConfig {
  std::size_t subseq_len = 128;
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t max_updates = 100000;
  // Converged when the mean loss over the last window improves on the
  // previous window by less than rel_tol * (|prev| + |cur| + 1).
  std::size_t patience_window = 200;
  double rel_tol = 1e-4;
  std::size_t hhat_len = 5;
  Padding padding = Padding::kCentered;
  std::uint64_t init_seed = 0;
  double hhat_init_std = 0.01;
  double filter_init_std = 0.05;

  void validate() const {
    if (subseq_len < 1) throw std::invalid_argument("TrainConfig: subseq_len < 1");
    if (hhat_len < 1) throw std::invalid_argument("TrainConfig: hhat_len < 1");
    if (subseq_len < hhat_len)
      throw std::invalid_argument("TrainConfig: subseq_len < hhat_len");
    if (padding == Padding::kCentered && hhat_len % 2 == 0)
      throw std::invalid_argument("TrainConfig: centered padding needs odd hhat_len");
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: lr <= 0");
    if (max_updates < 1) throw std::invalid_argument("TrainConfig: max_updates < 1");
    if (patience_window < 1)
      throw std::invalid_argument("TrainConfig: patience_window < 1");
    if (rel_tol < 0.0) throw std::invalid_argument("TrainConfig: rel_tol < 0");
  }
};

struct TrainReport {
  std::size_t updates_used = 0;
  std::vector<double> loss_trace;
  bool converged = false;
  ComplexSeq hhat;
  double sigma2_hat = 0.0;
};

struct TrainResult {
  DecoderParams params;
  ComplexSeq hhat;
  TrainReport report;
};

namespace detail {

inline std::size_t flat_param_count(std::size_t hhat_len) {
  return 2 * (DecoderParams::kConv1Len + DecoderParams::kConv2Len) + 4 +
         2 * hhat_len;
}

inline void pack_params(const DecoderParams& p, const ComplexSeq& hhat,
                        std::vector<double>& flat) {
  flat.clear();
  flat.reserve(flat_param_count(hhat.size()));
  for (double v : p.conv1.taps.re) flat.push_back(v);
  for (double v : p.conv1.taps.im) flat.push_back(v);
  flat.push_back(p.conv1.bias.real());
  flat.push_back(p.conv1.bias.imag());
  for (double v : p.conv2.taps.re) flat.push_back(v);
  for (double v : p.conv2.taps.im) flat.push_back(v);
  flat.push_back(p.conv2.bias.real());
  flat.push_back(p.conv2.bias.imag());
  for (double v : hhat.re) flat.push_back(v);
  for (double v : hhat.im) flat.push_back(v);
}

inline void unpack_params(const std::vector<double>& flat, DecoderParams& p,
                          ComplexSeq& hhat) {
  std::size_t i = 0;
  for (double& v : p.conv1.taps.re) v = flat[i++];
  for (double& v : p.conv1.taps.im) v = flat[i++];
  p.conv1.bias = {flat[i], flat[i + 1]};
  i += 2;
  for (double& v : p.conv2.taps.re) v = flat[i++];
  for (double& v : p.conv2.taps.im) v = flat[i++];
  p.conv2.bias = {flat[i], flat[i + 1]};
  i += 2;
  for (double& v : hhat.re) v = flat[i++];
  for (double& v : hhat.im) v = flat[i++];
}

}  // namespace detail

// Near-identity start: unit impulse at the reference tap plus a small
// complex Gaussian perturbation.
inline ComplexSeq init_hhat(std::size_t hhat_len, Padding mode, Rng& rng,
                            double std_dev = 0.01) {
  ComplexSeq h(hhat_len);
  for (std::size_t i = 0; i < hhat_len; ++i) {
    auto [a, b] = rng.gaussian_pair();
    h.re[i] = std_dev * a;
    h.im[i] = std_dev * b;
  }
  const std::size_t spike = mode == Padding::kCentered ? (hhat_len - 1) / 2 : 0;
  h.re[spike] += 1.0;
  return h;
}

inline TrainResult train(const ComplexSeq& train_observed, const TrainConfig& cfg) {
  cfg.validate();
  const std::size_t total_len = train_observed.size();
  if (total_len < 1) throw std::invalid_argument("train: empty training sequence");
  const std::size_t sub_len = std::min(cfg.subseq_len, total_len);
  if (sub_len < cfg.hhat_len)
    throw std::invalid_argument("train: training sequence shorter than hhat");

  Rng init_rng(derive_seed(cfg.init_seed, stream::kDecoderInit));
  DecoderParams params = DecoderParams::random_init(init_rng, cfg.filter_init_std);
  ComplexSeq hhat = init_hhat(cfg.hhat_len, cfg.padding, init_rng, cfg.hhat_init_std);
  Rng batch_rng(derive_seed(cfg.init_seed, stream::kBatchSampler));

  std::vector<double> flat, grads;
  detail::pack_params(params, hhat, flat);
  Adam opt(flat.size());
  const AdamConfig adam_cfg{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                            cfg.adam_eps};

  TrainReport report;
  report.loss_trace.reserve(std::min<std::size_t>(cfg.max_updates, 1 << 20));
  std::vector<double> cum{0.0};  // prefix sums of the loss trace
  cum.reserve(report.loss_trace.capacity() + 1);

  std::vector<double> best_flat = flat;
  double best_smoothed = std::numeric_limits<double>::infinity();
  const std::size_t window = cfg.patience_window;

  std::size_t t = 0;
  while (t < cfg.max_updates) {
    const std::size_t start = batch_rng.index(total_len - sub_len + 1);
    const ComplexSeq y_sub = train_observed.slice(start, sub_len);

    const LossGradients lg = loss_gradients(y_sub, params, hhat, cfg.padding);
    detail::pack_params(lg.wrt_params, lg.wrt_hhat, grads);
    opt.step(flat, grads, adam_cfg);
    detail::unpack_params(flat, params, hhat);
    ++t;

    report.loss_trace.push_back(lg.value.loss);
    cum.push_back(cum.back() + lg.value.loss);

    const std::size_t w_now = std::min(window, t);
    const double smoothed = (cum[t] - cum[t - w_now]) / static_cast<double>(w_now);
    if (smoothed < best_smoothed) {
      best_smoothed = smoothed;
      best_flat = flat;
    }

    if (t >= 2 * window) {
      const double prev =
          (cum[t - window] - cum[t - 2 * window]) / static_cast<double>(window);
      const double cur = (cum[t] - cum[t - window]) / static_cast<double>(window);
      if (prev - cur < cfg.rel_tol * (std::fabs(prev) + std::fabs(cur) + 1.0)) {
        report.converged = true;
        break;
      }
    }
  }
  report.updates_used = t;

  TrainResult result;
  detail::unpack_params(best_flat, params, hhat);
  result.params = params;
  result.hhat = hhat;

  // Noise variance estimate C/N re-evaluated on the full training sequence
  // at the returned parameters.
  if (total_len >= DecoderParams::kConv1Len && total_len >= cfg.hhat_len) {
    const SymbolPosteriors q = decoder_forward(params, train_observed);
    report.sigma2_hat =
        residual_term_C(train_observed, hhat, q, cfg.padding) /
        static_cast<double>(total_len);
  } else if (!report.loss_trace.empty()) {
    report.sigma2_hat = 0.0;
  }
  report.hhat = hhat;
  result.report = std::move(report);
  return result;
}

}  // namespace vaeq
