#pragma once

// Reference equalizers: blind adaptive CMA (Godard p = 2) and supervised
// adaptive (N)LMS MMSE, both as centered linear FIR filters, plus the QPSK
// slicer.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "vaeq/complex_seq.hpp"
#include "vaeq/signal.hpp"

namespace vaeq {

struct LinearEqualizer {
  ComplexSeq taps;  // odd length, applied as a centered FIR filter
  std::size_t center_index = 0;
};

struct AdaptConfig {
  double step_size = 1e-3;
  std::size_t passes = 50;
  std::size_t taps = 15;  // odd
  bool normalize = false; // NLMS scaling for the MMSE updates
  double cma_r2 = 2.0;    // E|x|^4 / E|x|^2 for QPSK

  void validate() const {
    if (step_size < 0.0) throw std::invalid_argument("AdaptConfig: negative step size");
    if (passes < 1) throw std::invalid_argument("AdaptConfig: passes < 1");
    if (taps < 1 || taps % 2 == 0)
      throw std::invalid_argument("AdaptConfig: taps must be odd and >= 1");
  }
};

struct DivergenceError : std::runtime_error {
  std::size_t sample_index;
  explicit DivergenceError(std::size_t idx)
      : std::runtime_error("adaptive filter diverged at sample " + std::to_string(idx)),
        sample_index(idx) {}
};

inline LinearEqualizer center_spike_equalizer(std::size_t taps) {
  LinearEqualizer eq;
  eq.taps = ComplexSeq(taps);
  eq.center_index = (taps - 1) / 2;
  eq.taps.re[eq.center_index] = 1.0;
  return eq;
}

// Centered FIR filtering, length-preserving.
inline ComplexSeq equalize_apply(const LinearEqualizer& eq, const ComplexSeq& y) {
  return fir_convolve(y, eq.taps, Padding::kCentered);
}

// Per-rail sign decision; sign(0) = +1.
inline ComplexSeq slicer_qpsk(const ComplexSeq& z) {
  ComplexSeq out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    out.re[k] = z.re[k] >= 0.0 ? 1.0 : -1.0;
    out.im[k] = z.im[k] >= 0.0 ? 1.0 : -1.0;
  }
  return out;
}

namespace detail {

// Equalizer output at position n with zero-padded edges, matching
// fir_convolve(.., kCentered): z_n = sum_i taps_i y_{n-i+c}.
inline cplx centered_output(const ComplexSeq& taps, const ComplexSeq& y,
                            std::ptrdiff_t n, std::ptrdiff_t center) {
  const std::ptrdiff_t y_len = static_cast<std::ptrdiff_t>(y.size());
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(taps.size());
  double zr = 0.0, zi = 0.0;
  for (std::ptrdiff_t i = 0; i < t_len; ++i) {
    const std::ptrdiff_t k = n - i + center;
    if (k < 0 || k >= y_len) continue;
    zr += taps.re[i] * y.re[k] - taps.im[i] * y.im[k];
    zi += taps.re[i] * y.im[k] + taps.im[i] * y.re[k];
  }
  return {zr, zi};
}

}  // namespace detail

// Godard p = 2 stochastic updates: e = (|z|^2 - R2) z,
// taps <- taps - mu * e * conj(window sample).
inline LinearEqualizer cma_train(const ComplexSeq& y, const AdaptConfig& cfg) {
  cfg.validate();
  if (y.size() < cfg.taps)
    throw std::invalid_argument("cma_train: sequence shorter than equalizer");
  LinearEqualizer eq = center_spike_equalizer(cfg.taps);
  const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(eq.center_index);
  const std::ptrdiff_t y_len = static_cast<std::ptrdiff_t>(y.size());
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(cfg.taps);

  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    for (std::ptrdiff_t n = 0; n < y_len; ++n) {
      const cplx z = detail::centered_output(eq.taps, y, n, center);
      const double mag2 = std::norm(z);
      if (!std::isfinite(mag2))
        throw DivergenceError(pass * static_cast<std::size_t>(y_len) +
                              static_cast<std::size_t>(n));
      const cplx err = (mag2 - cfg.cma_r2) * z;
      for (std::ptrdiff_t i = 0; i < t_len; ++i) {
        const std::ptrdiff_t k = n - i + center;
        if (k < 0 || k >= y_len) continue;
        const cplx w{y.re[k], y.im[k]};
        const cplx delta = cfg.step_size * err * std::conj(w);
        eq.taps.re[i] -= delta.real();
        eq.taps.im[i] -= delta.imag();
      }
    }
  }
  return eq;
}

// (N)LMS minimizing |x_n - z_n|^2 against the known transmitted sequence;
// the centered filter makes x_n the aligned target.
inline LinearEqualizer mmse_lms_train(const ComplexSeq& y, const ComplexSeq& x_true,
                                      const AdaptConfig& cfg) {
  cfg.validate();
  if (y.size() != x_true.size())
    throw std::invalid_argument("mmse_lms_train: length mismatch");
  if (y.size() < cfg.taps)
    throw std::invalid_argument("mmse_lms_train: sequence shorter than equalizer");
  LinearEqualizer eq = center_spike_equalizer(cfg.taps);
  const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(eq.center_index);
  const std::ptrdiff_t y_len = static_cast<std::ptrdiff_t>(y.size());
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(cfg.taps);

  for (std::size_t pass = 0; pass < cfg.passes; ++pass) {
    for (std::ptrdiff_t n = 0; n < y_len; ++n) {
      const cplx z = detail::centered_output(eq.taps, y, n, center);
      if (!std::isfinite(std::norm(z)))
        throw DivergenceError(pass * static_cast<std::size_t>(y_len) +
                              static_cast<std::size_t>(n));
      const cplx err = cplx{x_true.re[n], x_true.im[n]} - z;
      double mu = cfg.step_size;
      if (cfg.normalize) {
        double energy = 1e-12;
        for (std::ptrdiff_t i = 0; i < t_len; ++i) {
          const std::ptrdiff_t k = n - i + center;
          if (k < 0 || k >= y_len) continue;
          energy += y.re[k] * y.re[k] + y.im[k] * y.im[k];
        }
        mu /= energy;
      }
      for (std::ptrdiff_t i = 0; i < t_len; ++i) {
        const std::ptrdiff_t k = n - i + center;
        if (k < 0 || k >= y_len) continue;
        const cplx w{y.re[k], y.im[k]};
        const cplx delta = mu * err * std::conj(w);
        eq.taps.re[i] += delta.real();
        eq.taps.im[i] += delta.imag();
      }
    }
  }
  return eq;
}

// Mean constant-modulus cost over the sequence for the current taps.
inline double cma_cost(const LinearEqualizer& eq, const ComplexSeq& y, double r2 = 2.0) {
  const ComplexSeq z = equalize_apply(eq, y);
  double acc = 0.0;
  for (std::size_t n = 0; n < z.size(); ++n) {
    const double mag2 = z.re[n] * z.re[n] + z.im[n] * z.im[n];
    acc += (mag2 - r2) * (mag2 - r2);
  }
  return acc / static_cast<double>(z.size());
}

}  // namespace vaeq
