#pragma once

// Two-layer complex fully convolutional decoder producing per-symbol
// Bernoulli parameters for each rail: conv(5 taps) -> softsign -> +input
// residual -> conv(2 taps) -> sigmoid, all length-preserving.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vaeq/complex_seq.hpp"
#include "vaeq/rng.hpp"
#include "vaeq/signal.hpp"

namespace vaeq {

// Posterior clamp applied before any logarithm.
inline constexpr double kPosteriorEps = 1e-7;

struct ComplexFilter {
  ComplexSeq taps;
  cplx bias{0.0, 0.0};
};

struct DecoderParams {
  static constexpr std::size_t kConv1Len = 5;
  static constexpr std::size_t kConv2Len = 2;

  ComplexFilter conv1;
  ComplexFilter conv2;

  DecoderParams() {
    conv1.taps = ComplexSeq(kConv1Len);
    conv2.taps = ComplexSeq(kConv2Len);
  }

  // i.i.d. Gaussian filter coefficients, zero biases.
  static DecoderParams random_init(Rng& rng, double filter_std = 0.05) {
    DecoderParams p;
    for (std::size_t i = 0; i < kConv1Len; ++i) {
      auto [a, b] = rng.gaussian_pair();
      p.conv1.taps.re[i] = filter_std * a;
      p.conv1.taps.im[i] = filter_std * b;
    }
    for (std::size_t i = 0; i < kConv2Len; ++i) {
      auto [a, b] = rng.gaussian_pair();
      p.conv2.taps.re[i] = filter_std * a;
      p.conv2.taps.im[i] = filter_std * b;
    }
    return p;
  }
};

struct SymbolPosteriors {
  std::vector<double> qI;
  std::vector<double> qQ;

  std::size_t size() const { return qI.size(); }
};

// E{x_k} under the posterior: (2 qI - 1) + j (2 qQ - 1).
inline ComplexSeq mean_field(const SymbolPosteriors& q) {
  ComplexSeq m(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    m.re[k] = 2.0 * q.qI[k] - 1.0;
    m.im[k] = 2.0 * q.qQ[k] - 1.0;
  }
  return m;
}

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softsign(double x) { return x / (std::fabs(x) + 1.0); }

// Same-padding offset: filter tap i multiplies input sample n - i + off.
inline std::ptrdiff_t same_pad_offset(std::size_t filter_len) {
  return static_cast<std::ptrdiff_t>((filter_len - 1) / 2);
}

}  // namespace detail

// Complex 1-D convolution on paired rails:
//   out_I = in_I*f_I - in_Q*f_Q + b_I,  out_Q = in_I*f_Q + in_Q*f_I + b_Q.
// same_padding keeps the output the input's length; otherwise only fully
// overlapped positions are produced (length N - F + 1).
inline ComplexSeq complex_conv1d(const ComplexSeq& in, const ComplexFilter& f,
                                 bool same_padding = true) {
  if (f.taps.empty()) throw std::invalid_argument("complex_conv1d: empty filter");
  if (f.taps.size() > in.size())
    throw std::invalid_argument("complex_conv1d: filter longer than input");
  if (same_padding) {
    ComplexSeq out =
        detail::conv_offset(in, f.taps, detail::same_pad_offset(f.taps.size()));
    for (std::size_t n = 0; n < out.size(); ++n) {
      out.re[n] += f.bias.real();
      out.im[n] += f.bias.imag();
    }
    return out;
  }
  const std::size_t flen = f.taps.size();
  ComplexSeq out(in.size() - flen + 1);
  for (std::size_t n = 0; n < out.size(); ++n) {
    cplx acc = f.bias;
    for (std::size_t i = 0; i < flen; ++i) acc += f.taps[i] * in[n + flen - 1 - i];
    out.set(n, acc);
  }
  return out;
}

// Intermediate activations kept for reverse-mode differentiation.
struct DecoderTrace {
  ComplexSeq conv1_out;   // pre-activation of layer 1
  ComplexSeq act;         // softsign(conv1_out)
  ComplexSeq resid;       // act + y
  ComplexSeq conv2_out;   // logits z
  std::vector<double> rawI, rawQ;      // sigmoid(z) before clamping
  std::vector<std::uint8_t> liveI, liveQ;  // 0 where the clamp saturates
  SymbolPosteriors q;
};

inline DecoderTrace decoder_forward_trace(const DecoderParams& params,
                                          const ComplexSeq& y) {
  DecoderTrace t;
  t.conv1_out = complex_conv1d(y, params.conv1);
  t.act = ComplexSeq(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) {
    t.act.re[n] = detail::softsign(t.conv1_out.re[n]);
    t.act.im[n] = detail::softsign(t.conv1_out.im[n]);
  }
  t.resid = t.act + y;
  t.conv2_out = complex_conv1d(t.resid, params.conv2);

  const std::size_t n_sym = y.size();
  t.rawI.resize(n_sym);
  t.rawQ.resize(n_sym);
  t.liveI.resize(n_sym);
  t.liveQ.resize(n_sym);
  t.q.qI.resize(n_sym);
  t.q.qQ.resize(n_sym);
  for (std::size_t n = 0; n < n_sym; ++n) {
    t.rawI[n] = detail::sigmoid(t.conv2_out.re[n]);
    t.rawQ[n] = detail::sigmoid(t.conv2_out.im[n]);
    t.liveI[n] = t.rawI[n] > kPosteriorEps && t.rawI[n] < 1.0 - kPosteriorEps;
    t.liveQ[n] = t.rawQ[n] > kPosteriorEps && t.rawQ[n] < 1.0 - kPosteriorEps;
    t.q.qI[n] = std::min(std::max(t.rawI[n], kPosteriorEps), 1.0 - kPosteriorEps);
    t.q.qQ[n] = std::min(std::max(t.rawQ[n], kPosteriorEps), 1.0 - kPosteriorEps);
  }
  return t;
}

inline SymbolPosteriors decoder_forward(const DecoderParams& params,
                                        const ComplexSeq& y) {
  return decoder_forward_trace(params, y).q;
}

// Hard decision on posteriors; q = 0.5 resolves to +1 on each rail.
inline ComplexSeq detect_symbols(const SymbolPosteriors& q) {
  ComplexSeq out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    out.re[k] = q.qI[k] >= 0.5 ? 1.0 : -1.0;
    out.im[k] = q.qQ[k] >= 0.5 ? 1.0 : -1.0;
  }
  return out;
}

}  // namespace vaeq
