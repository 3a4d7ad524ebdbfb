#pragma once

// Exact reverse-mode derivatives of the reduced loss with respect to the
// decoder weights and the channel estimate. The graph is fixed and small,
// so the chain is written out by hand:
//
//   y -> conv1 -> softsign -> (+y) -> conv2 -> sigmoid/clamp -> q
//   q, hhat -> A, C -> loss = N log C - A
//
// Complex gradients use the convention G = d loss/d Re + j d loss/d Im; a
// linear stage out = sum_i taps_i in_{n-i+off} then back-propagates by
// G_in[m] = sum_i conj(taps_i) G_out[m+i-off] and
// G_taps[i] = sum_n G_out[n] conj(in[n-i+off]).

#include <cmath>
#include <cstddef>

#include "vaeq/complex_seq.hpp"
#include "vaeq/decoder.hpp"
#include "vaeq/elbo.hpp"
#include "vaeq/signal.hpp"

namespace vaeq {

struct LossGradients {
  DecoderParams wrt_params;  // same layout as DecoderParams
  ComplexSeq wrt_hhat;
  LossBreakdown value;
};

namespace detail {

inline ComplexSeq conv_input_grad(const ComplexSeq& g_out, const ComplexSeq& taps,
                                  std::ptrdiff_t off) {
  const std::ptrdiff_t n_len = static_cast<std::ptrdiff_t>(g_out.size());
  const std::ptrdiff_t m_len = static_cast<std::ptrdiff_t>(taps.size());
  ComplexSeq g_in(g_out.size());
  for (std::ptrdiff_t m = 0; m < n_len; ++m) {
    double ar = 0.0, ai = 0.0;
    for (std::ptrdiff_t i = 0; i < m_len; ++i) {
      const std::ptrdiff_t n = m + i - off;
      if (n < 0 || n >= n_len) continue;
      const double tr = taps.re[i], ti = taps.im[i];
      const double gr = g_out.re[n], gi = g_out.im[n];
      // conj(taps_i) * g
      ar += tr * gr + ti * gi;
      ai += tr * gi - ti * gr;
    }
    g_in.re[m] = ar;
    g_in.im[m] = ai;
  }
  return g_in;
}

inline ComplexSeq conv_tap_grad(const ComplexSeq& g_out, const ComplexSeq& in,
                                std::size_t taps_len, std::ptrdiff_t off) {
  const std::ptrdiff_t n_len = static_cast<std::ptrdiff_t>(g_out.size());
  ComplexSeq g_taps(taps_len);
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(taps_len); ++i) {
    double ar = 0.0, ai = 0.0;
    for (std::ptrdiff_t n = 0; n < n_len; ++n) {
      const std::ptrdiff_t k = n - i + off;
      if (k < 0 || k >= n_len) continue;
      const double gr = g_out.re[n], gi = g_out.im[n];
      const double xr = in.re[k], xi = in.im[k];
      // g * conj(in)
      ar += gr * xr + gi * xi;
      ai += gi * xr - gr * xi;
    }
    g_taps.re[i] = ar;
    g_taps.im[i] = ai;
  }
  return g_taps;
}

inline cplx sum(const ComplexSeq& g) {
  double r = 0.0, i = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    r += g.re[n];
    i += g.im[n];
  }
  return {r, i};
}

inline double softsign_deriv(double x) {
  const double d = 1.0 + std::fabs(x);
  return 1.0 / (d * d);
}

}  // namespace detail

inline LossGradients loss_gradients(const ComplexSeq& y, const DecoderParams& params,
                                    const ComplexSeq& hhat, Padding mode) {
  const std::ptrdiff_t n_len = static_cast<std::ptrdiff_t>(y.size());
  const std::ptrdiff_t h_len = static_cast<std::ptrdiff_t>(hhat.size());
  const std::ptrdiff_t off = detail::padding_offset(hhat.size(), mode);

  LossGradients out;
  out.wrt_hhat = ComplexSeq(hhat.size());

  const DecoderTrace trace = decoder_forward_trace(params, y);
  const SymbolPosteriors& q = trace.q;
  const ComplexSeq m = mean_field(q);
  const ComplexSeq s = fir_convolve(m, hhat, mode);
  const ComplexSeq e = y - s;

  // Forward value plus the tap/symbol weights W_k = sum over reachable taps
  // of |h_i|^2 and U_i = sum over reachable symbols of (2 - |m_k|^2).
  std::vector<double> w_sym(y.size(), 0.0);
  std::vector<double> u_tap(hhat.size(), 0.0);
  double c_val = e.norm_sq();
  for (std::ptrdiff_t n = 0; n < n_len; ++n) {
    for (std::ptrdiff_t i = 0; i < h_len; ++i) {
      const std::ptrdiff_t k = n - i + off;
      if (k < 0 || k >= n_len) continue;
      const double g = hhat.re[i] * hhat.re[i] + hhat.im[i] * hhat.im[i];
      const double v = 2.0 - (m.re[k] * m.re[k] + m.im[k] * m.im[k]);
      c_val += g * v;
      w_sym[k] += g;
      u_tap[i] += v;
    }
  }

  out.value.A = kl_term_A(q);
  out.value.C = c_val;
  out.value.loss = static_cast<double>(n_len) *
                       std::log(std::max(c_val, kResidualFloor)) -
                   out.value.A;
  out.value.sigma2_hat = c_val / static_cast<double>(n_len);

  const double c_factor =
      c_val > kResidualFloor ? static_cast<double>(n_len) / c_val : 0.0;

  // dC/dm_k = -2 sum_i conj(h_i) e_{k+i-off} - 2 m_k W_k
  const ComplexSeq e_corr = detail::conv_input_grad(e, hhat, off);
  ComplexSeq g_q(y.size());  // d loss / d qI + j d loss / d qQ
  for (std::ptrdiff_t k = 0; k < n_len; ++k) {
    const double dc_dmr = -2.0 * e_corr.re[k] - 2.0 * m.re[k] * w_sym[k];
    const double dc_dmi = -2.0 * e_corr.im[k] - 2.0 * m.im[k] * w_sym[k];
    // m = 2q - 1 per rail; -dA/dq = logit(q)
    g_q.re[k] = c_factor * 2.0 * dc_dmr + std::log(q.qI[k] / (1.0 - q.qI[k]));
    g_q.im[k] = c_factor * 2.0 * dc_dmi + std::log(q.qQ[k] / (1.0 - q.qQ[k]));
  }

  // Through the sigmoid; clamp saturation zeroes the path.
  ComplexSeq g_z(y.size());
  for (std::ptrdiff_t k = 0; k < n_len; ++k) {
    g_z.re[k] = trace.liveI[k] ? g_q.re[k] * trace.rawI[k] * (1.0 - trace.rawI[k]) : 0.0;
    g_z.im[k] = trace.liveQ[k] ? g_q.im[k] * trace.rawQ[k] * (1.0 - trace.rawQ[k]) : 0.0;
  }

  // conv2 backward.
  const std::ptrdiff_t off2 = detail::same_pad_offset(DecoderParams::kConv2Len);
  out.wrt_params.conv2.taps =
      detail::conv_tap_grad(g_z, trace.resid, DecoderParams::kConv2Len, off2);
  out.wrt_params.conv2.bias = detail::sum(g_z);
  const ComplexSeq g_resid = detail::conv_input_grad(g_z, params.conv2.taps, off2);

  // Residual skip feeds the activation straight through; softsign is applied
  // per rail.
  ComplexSeq g_conv1(y.size());
  for (std::ptrdiff_t k = 0; k < n_len; ++k) {
    g_conv1.re[k] = g_resid.re[k] * detail::softsign_deriv(trace.conv1_out.re[k]);
    g_conv1.im[k] = g_resid.im[k] * detail::softsign_deriv(trace.conv1_out.im[k]);
  }

  const std::ptrdiff_t off1 = detail::same_pad_offset(DecoderParams::kConv1Len);
  out.wrt_params.conv1.taps =
      detail::conv_tap_grad(g_conv1, y, DecoderParams::kConv1Len, off1);
  out.wrt_params.conv1.bias = detail::sum(g_conv1);

  // dC/dh_i = -2 sum_n e_n conj(m_{n-i+off}) + 2 h_i U_i
  const ComplexSeq h_corr = detail::conv_tap_grad(e, m, hhat.size(), off);
  for (std::ptrdiff_t i = 0; i < h_len; ++i) {
    out.wrt_hhat.re[i] = c_factor * (-2.0 * h_corr.re[i] + 2.0 * hhat.re[i] * u_tap[i]);
    out.wrt_hhat.im[i] = c_factor * (-2.0 * h_corr.im[i] + 2.0 * hhat.im[i] * u_tap[i]);
  }

  return out;
}

}  // namespace vaeq
