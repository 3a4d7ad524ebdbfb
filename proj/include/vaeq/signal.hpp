#pragma once

// QPSK source, FIR ISI channel simulation, SNR-calibrated AWGN, and seeded
// dataset generation.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vaeq/complex_seq.hpp"
#include "vaeq/rng.hpp"

namespace vaeq {

enum class Padding { kCausal, kCentered };

inline const char* padding_name(Padding p) {
  return p == Padding::kCausal ? "causal" : "centered";
}

struct ChannelSpec {
  ComplexSeq taps;
  double noise_variance = 0.0;  // total complex variance; each rail gets half
  Padding padding = Padding::kCausal;

  void validate() const {
    if (taps.empty()) throw std::invalid_argument("ChannelSpec: empty taps");
    if (noise_variance < 0.0)
      throw std::invalid_argument("ChannelSpec: negative noise variance");
    if (padding == Padding::kCentered && taps.size() % 2 == 0)
      throw std::invalid_argument("ChannelSpec: centered padding needs odd tap count");
  }
};

// Gray map per rail: bit 0 -> -1, bit 1 -> +1. Symbol k takes bits[2k]
// on the I rail and bits[2k+1] on the Q rail.
inline ComplexSeq qpsk_modulate(const std::vector<int>& bits) {
  if (bits.size() % 2 != 0)
    throw std::invalid_argument("qpsk_modulate: odd bit count");
  ComplexSeq out(bits.size() / 2);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.re[k] = 2.0 * bits[2 * k] - 1.0;
    out.im[k] = 2.0 * bits[2 * k + 1] - 1.0;
  }
  return out;
}

// Hard-slice back to bits; inverse of qpsk_modulate on exact QPSK points.
inline std::vector<int> qpsk_demodulate(const ComplexSeq& symbols) {
  std::vector<int> bits(2 * symbols.size());
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    bits[2 * k] = symbols.re[k] > 0.0 ? 1 : 0;
    bits[2 * k + 1] = symbols.im[k] > 0.0 ? 1 : 0;
  }
  return bits;
}

inline ComplexSeq random_qpsk(std::size_t n, Rng& rng) {
  ComplexSeq out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.re[k] = rng.bit() ? 1.0 : -1.0;
    out.im[k] = rng.bit() ? 1.0 : -1.0;
  }
  return out;
}

namespace detail {

// y_n = sum_i taps[i] * x[n - i + off], with x zero outside [0, N).
// Causal mode uses off = 0; centered mode off = (M-1)/2, which indexes
// taps from -(M-1)/2 to +(M-1)/2 around the current sample. Both modes
// share this kernel so their outputs agree exactly on interior samples
// after the (M-1)/2 shift.
inline ComplexSeq conv_offset(const ComplexSeq& x, const ComplexSeq& taps,
                              std::ptrdiff_t off) {
  const std::ptrdiff_t n_len = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t m_len = static_cast<std::ptrdiff_t>(taps.size());
  ComplexSeq y(x.size());
  for (std::ptrdiff_t n = 0; n < n_len; ++n) {
    double acc_re = 0.0, acc_im = 0.0;
    for (std::ptrdiff_t i = 0; i < m_len; ++i) {
      const std::ptrdiff_t k = n - i + off;
      if (k < 0 || k >= n_len) continue;
      const double hr = taps.re[i], hi = taps.im[i];
      const double xr = x.re[k], xi = x.im[k];
      acc_re += hr * xr - hi * xi;
      acc_im += hr * xi + hi * xr;
    }
    y.re[n] = acc_re;
    y.im[n] = acc_im;
  }
  return y;
}

inline std::ptrdiff_t padding_offset(std::size_t taps_len, Padding mode) {
  return mode == Padding::kCentered
             ? static_cast<std::ptrdiff_t>((taps_len - 1) / 2)
             : 0;
}

}  // namespace detail

// Length-preserving FIR convolution. Causal: taps h_0..h_{M-1} applied to
// the current and past samples (x zero-padded on the left). Centered:
// taps h_{-(M-1)/2}..h_{(M-1)/2}, x zero-padded by (M-1)/2 on both sides;
// requires odd M.
inline ComplexSeq fir_convolve(const ComplexSeq& x, const ComplexSeq& h,
                               Padding mode) {
  if (x.empty()) throw std::invalid_argument("fir_convolve: empty input");
  if (h.empty()) throw std::invalid_argument("fir_convolve: empty taps");
  if (mode == Padding::kCentered && h.size() % 2 == 0)
    throw std::invalid_argument("fir_convolve: centered padding needs odd tap count");
  return detail::conv_offset(x, h, detail::padding_offset(h.size(), mode));
}

// Adds complex white Gaussian noise with total variance `noise_variance`
// (noise_variance/2 per rail). Returns (y + noise, noise).
inline std::pair<ComplexSeq, ComplexSeq> add_awgn(const ComplexSeq& y,
                                                  double noise_variance,
                                                  std::uint64_t seed) {
  if (noise_variance < 0.0)
    throw std::invalid_argument("add_awgn: negative variance");
  Rng rng(seed);
  const double sigma = std::sqrt(noise_variance / 2.0);
  ComplexSeq noise(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    auto [a, b] = rng.gaussian_pair();
    noise.re[k] = sigma * a;
    noise.im[k] = sigma * b;
  }
  return {y + noise, noise};
}

// 20*log10(||signal|| / ||noise||).
inline double realized_snr_db(const ComplexSeq& signal, const ComplexSeq& noise) {
  return 20.0 * std::log10(signal.norm() / noise.norm());
}

// Rescales `noise` so the realized SNR equals snr_db exactly. Returns the
// scaled noise and the implied total complex variance ||w||^2 / N.
inline std::pair<ComplexSeq, double> scale_noise_to_snr(const ComplexSeq& signal,
                                                        const ComplexSeq& noise,
                                                        double snr_db) {
  const double ns = signal.norm();
  const double nw = noise.norm();
  if (ns <= 0.0) throw std::invalid_argument("scale_noise_to_snr: zero-norm signal");
  if (nw <= 0.0) throw std::invalid_argument("scale_noise_to_snr: zero-norm noise");
  const double target = ns * std::pow(10.0, -snr_db / 20.0);
  const double factor = target / nw;
  ComplexSeq scaled(noise.size());
  for (std::size_t k = 0; k < noise.size(); ++k) {
    scaled.re[k] = factor * noise.re[k];
    scaled.im[k] = factor * noise.im[k];
  }
  const double sigma2 = scaled.norm_sq() / static_cast<double>(noise.size());
  return {std::move(scaled), sigma2};
}

struct Dataset {
  ComplexSeq train_observed;
  ComplexSeq truth_train_symbols;
  ComplexSeq test_symbols;
  ComplexSeq test_observed;
  double realized_snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Independent train/test symbol streams from seed-derived substreams, each
// convolved with the channel and given per-realization SNR-scaled noise.
inline Dataset generate_dataset(const ChannelSpec& channel, std::size_t train_len,
                                double snr_db, std::uint64_t seed,
                                std::size_t test_len = 10000) {
  channel.validate();
  if (train_len < 1) throw std::invalid_argument("generate_dataset: train_len < 1");
  if (test_len < 1) throw std::invalid_argument("generate_dataset: test_len < 1");

  Dataset ds;
  ds.seed = seed;

  Rng train_sym_rng(derive_seed(seed, stream::kTrainSymbols));
  Rng test_sym_rng(derive_seed(seed, stream::kTestSymbols));
  ds.truth_train_symbols = random_qpsk(train_len, train_sym_rng);
  ds.test_symbols = random_qpsk(test_len, test_sym_rng);

  const ComplexSeq train_clean =
      fir_convolve(ds.truth_train_symbols, channel.taps, channel.padding);
  const ComplexSeq test_clean =
      fir_convolve(ds.test_symbols, channel.taps, channel.padding);

  auto [train_noisy_unit, train_unit] =
      add_awgn(train_clean, 1.0, derive_seed(seed, stream::kTrainNoise));
  auto [test_noisy_unit, test_unit] =
      add_awgn(test_clean, 1.0, derive_seed(seed, stream::kTestNoise));
  (void)train_noisy_unit;
  (void)test_noisy_unit;

  auto [train_noise, train_sigma2] = scale_noise_to_snr(train_clean, train_unit, snr_db);
  auto [test_noise, test_sigma2] = scale_noise_to_snr(test_clean, test_unit, snr_db);
  (void)train_sigma2;
  (void)test_sigma2;

  ds.train_observed = train_clean + train_noise;
  ds.test_observed = test_clean + test_noise;
  ds.realized_snr_db = realized_snr_db(train_clean, train_noise);
  return ds;
}

}  // namespace vaeq
