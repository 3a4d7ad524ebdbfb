#pragma once

// Closed-form evidence lower bound for the linear-ISI generative model with
// factorized Bernoulli posteriors over QPSK rails.
//
// With q_k^I, q_k^Q the per-rail posteriors and m_k = (2q_k^I - 1) +
// j(2q_k^Q - 1) the posterior mean symbol:
//
//   A = -2N log 2 + H[q]                          (KL against the uniform prior)
//   C = sum_n |y_n - (m*h)_n|^2
//     + sum_n sum_k |h_{n-k}|^2 (2 - |m_k|^2)     (expected residual energy)
//   loss = N log C - A                            (noise variance eliminated
//                                                  at its optimum C/N)
//
// The per-symbol residual variance factor expands to
// 4q^I + 4q^Q - 4(q^I)^2 - 4(q^Q)^2, i.e. 2 - |m_k|^2.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vaeq/complex_seq.hpp"
#include "vaeq/decoder.hpp"
#include "vaeq/signal.hpp"

namespace vaeq {

// Floor inside log C; near-perfect fits drive C toward zero.
inline constexpr double kResidualFloor = 1e-12;

struct LossBreakdown {
  double A = 0.0;          // KL term, always <= 0
  double C = 0.0;          // expected residual energy, >= 0
  double loss = 0.0;       // N log max(C, floor) - A
  double sigma2_hat = 0.0; // C / N
};

namespace detail {

inline double clamp_prob(double p) {
  return std::min(std::max(p, kPosteriorEps), 1.0 - kPosteriorEps);
}

// -p log p - (1-p) log(1-p), clamped.
inline double bernoulli_entropy(double p) {
  const double q = clamp_prob(p);
  return -q * std::log(q) - (1.0 - q) * std::log(1.0 - q);
}

}  // namespace detail

// Entropy of the factorized posterior, natural log.
inline double entropy_term(const SymbolPosteriors& q) {
  double h = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j)
    h += detail::bernoulli_entropy(q.qI[j]) + detail::bernoulli_entropy(q.qQ[j]);
  return h;
}

// A = -2N log 2 + H[q]. Folded per symbol so A is exactly zero at the
// uniform posterior.
inline double kl_term_A(const SymbolPosteriors& q) {
  const double log2 = std::log(2.0);
  double a = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j)
    a += detail::bernoulli_entropy(q.qI[j]) + detail::bernoulli_entropy(q.qQ[j]) -
         2.0 * log2;
  return a;
}

// E_q || y - x * hhat ||^2, computed analytically.
inline double residual_term_C(const ComplexSeq& y, const ComplexSeq& hhat,
                              const SymbolPosteriors& q, Padding mode) {
  const std::size_t n_len = y.size();
  if (q.size() != n_len)
    throw std::invalid_argument("residual_term_C: posterior/observation length mismatch");
  if (hhat.empty()) throw std::invalid_argument("residual_term_C: empty hhat");
  if (mode == Padding::kCentered && hhat.size() % 2 == 0)
    throw std::invalid_argument("residual_term_C: centered padding needs odd hhat");

  const ComplexSeq m = mean_field(q);
  const ComplexSeq s = fir_convolve(m, hhat, mode);

  double c = 0.0;
  for (std::size_t n = 0; n < n_len; ++n) {
    const double er = y.re[n] - s.re[n];
    const double ei = y.im[n] - s.im[n];
    c += er * er + ei * ei;
  }

  // Per-symbol variance: sum_n sum_k |h_{n-k}|^2 (2 - |m_k|^2), same index
  // geometry as the convolution above.
  const std::ptrdiff_t off = detail::padding_offset(hhat.size(), mode);
  const std::ptrdiff_t nl = static_cast<std::ptrdiff_t>(n_len);
  const std::ptrdiff_t ml = static_cast<std::ptrdiff_t>(hhat.size());
  for (std::ptrdiff_t n = 0; n < nl; ++n) {
    for (std::ptrdiff_t i = 0; i < ml; ++i) {
      const std::ptrdiff_t k = n - i + off;
      if (k < 0 || k >= nl) continue;
      const double g = hhat.re[i] * hhat.re[i] + hhat.im[i] * hhat.im[i];
      const double v = 2.0 - (m.re[k] * m.re[k] + m.im[k] * m.im[k]);
      c += g * v;
    }
  }
  return c;
}

inline LossBreakdown loss(const ComplexSeq& y, const ComplexSeq& hhat,
                          const SymbolPosteriors& q, Padding mode) {
  LossBreakdown out;
  out.A = kl_term_A(q);
  out.C = residual_term_C(y, hhat, q, mode);
  const double n_len = static_cast<double>(y.size());
  out.loss = n_len * std::log(std::max(out.C, kResidualFloor)) - out.A;
  out.sigma2_hat = out.C / n_len;
  return out;
}

}  // namespace vaeq
