#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "test_util.hpp"
#include "vaeq/baselines.hpp"
#include "vaeq/channels.hpp"
#include "vaeq/eval.hpp"
#include "vaeq/signal.hpp"

using namespace vaeq;

namespace {

Dataset identity_dataset(std::size_t n, double snr_db, std::uint64_t seed) {
  ChannelSpec cs{ComplexSeq{{1.0, 0.0}}, 0.0, Padding::kCausal};
  return generate_dataset(cs, n, snr_db, seed, n);
}

// Closed-form Wiener solve on the same data (test oracle): minimizes
// sum_n |x_n - t^T w_n|^2 over the centered tap vector via the normal
// equations, solved with Gaussian elimination.
ComplexSeq wiener_taps(const ComplexSeq& y, const ComplexSeq& x, std::size_t taps) {
  using cd = std::complex<double>;
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(taps);
  const std::ptrdiff_t center = (t_len - 1) / 2;
  const std::ptrdiff_t n_len = static_cast<std::ptrdiff_t>(y.size());
  std::vector<std::vector<cd>> a(taps, std::vector<cd>(taps, cd{0.0, 0.0}));
  std::vector<cd> b(taps, cd{0.0, 0.0});
  auto sample = [&](std::ptrdiff_t k) -> cd {
    if (k < 0 || k >= n_len) return {0.0, 0.0};
    return {y.re[k], y.im[k]};
  };
  for (std::ptrdiff_t n = 0; n < n_len; ++n) {
    for (std::ptrdiff_t i = 0; i < t_len; ++i) {
      const cd wi = sample(n - i + center);
      b[i] += cd{x.re[n], x.im[n]} * std::conj(wi);
      for (std::ptrdiff_t j = 0; j < t_len; ++j)
        a[i][j] += sample(n - j + center) * std::conj(wi);
    }
  }
  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < taps; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < taps; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < taps; ++r) {
      const cd f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < taps; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<cd> t(taps);
  for (std::ptrdiff_t r = t_len - 1; r >= 0; --r) {
    cd acc = b[r];
    for (std::ptrdiff_t c = r + 1; c < t_len; ++c) acc -= a[r][c] * t[c];
    t[r] = acc / a[r][r];
  }
  ComplexSeq out(taps);
  for (std::size_t i = 0; i < taps; ++i) out.set(i, t[i]);
  return out;
}

}  // namespace

TEST(SlicerQpsk, QuadrantAndTieRules) {
  const ComplexSeq z{{0.3, -0.2}, {-1.5, 2.0}, {0.0, 0.0}, {1.0, 1.0}};
  const ComplexSeq s = slicer_qpsk(z);
  EXPECT_EQ(s[0], cplx(1.0, -1.0));
  EXPECT_EQ(s[1], cplx(-1.0, 1.0));
  EXPECT_EQ(s[2], cplx(1.0, 1.0));
  EXPECT_EQ(s[3], cplx(1.0, 1.0));
}

TEST(EqualizeApply, DeltaAndRotation) {
  Rng rng(1);
  const ComplexSeq y = testutil::random_seq(30, rng);
  LinearEqualizer eq = center_spike_equalizer(7);
  EXPECT_EQ(testutil::max_abs_diff(equalize_apply(eq, y), y), 0.0);

  eq.taps.re[eq.center_index] = 0.0;
  eq.taps.im[eq.center_index] = 1.0;  // j * delta
  const ComplexSeq out = equalize_apply(eq, y);
  for (std::size_t k = 0; k < y.size(); ++k) {
    EXPECT_DOUBLE_EQ(out.re[k], -y.im[k]);
    EXPECT_DOUBLE_EQ(out.im[k], y.re[k]);
  }
}

TEST(EqualizeApply, MatchesCenteredConvolution) {
  Rng rng(2);
  LinearEqualizer eq;
  eq.taps = testutil::random_seq(9, rng);
  eq.center_index = 4;
  const ComplexSeq y = testutil::random_seq(50, rng);
  const ComplexSeq want = fir_convolve(y, eq.taps, Padding::kCentered);
  EXPECT_LT(testutil::max_abs_diff(equalize_apply(eq, y), want), 1e-12);
}

TEST(CmaTrain, ZeroStepKeepsCenterSpike) {
  const Dataset ds = identity_dataset(500, 20.0, 3);
  AdaptConfig cfg;
  cfg.step_size = 0.0;
  cfg.passes = 2;
  const LinearEqualizer eq = cma_train(ds.train_observed, cfg);
  for (std::size_t i = 0; i < eq.taps.size(); ++i) {
    EXPECT_DOUBLE_EQ(eq.taps.re[i], i == eq.center_index ? 1.0 : 0.0);
    EXPECT_DOUBLE_EQ(eq.taps.im[i], 0.0);
  }
}

TEST(CmaTrain, IdentityChannelReachesConstantModulus) {
  const Dataset ds = identity_dataset(2000, 300.0, 4);
  AdaptConfig cfg;
  const LinearEqualizer eq = cma_train(ds.train_observed, cfg);
  EXPECT_LE(cma_cost(eq, ds.train_observed), 1e-2);
}

TEST(CmaTrain, IdentityChannelTapsStayDeltaLike) {
  const Dataset ds = identity_dataset(2000, 300.0, 5);
  AdaptConfig cfg;
  const LinearEqualizer eq = cma_train(ds.train_observed, cfg);
  double total = 0.0, off_peak = 0.0;
  for (std::size_t i = 0; i < eq.taps.size(); ++i) {
    const double mag2 = eq.taps.re[i] * eq.taps.re[i] + eq.taps.im[i] * eq.taps.im[i];
    total += mag2;
    if (i != eq.center_index) off_peak += mag2;
  }
  EXPECT_LE(off_peak, 0.05 * total);
}

TEST(CmaTrain, CostNonIncreasingAcrossPassesAtSmallStep) {
  ChannelSpec cs{channel_preset("h1"), 0.0, Padding::kCausal};
  const Dataset ds = generate_dataset(cs, 2000, 10.0, 6, 100);
  AdaptConfig cfg;
  cfg.step_size = 1e-4;
  cfg.passes = 1;
  LinearEqualizer eq = center_spike_equalizer(cfg.taps);
  double prev = cma_cost(eq, ds.train_observed);
  AdaptConfig one = cfg;
  for (int pass = 0; pass < 10; ++pass) {
    // one extra pass at a time, warm-started
    one.passes = pass + 1;
    eq = cma_train(ds.train_observed, one);
    const double cost = cma_cost(eq, ds.train_observed);
    EXPECT_LE(cost, prev * (1.0 + 1e-6) + 1e-12) << "pass " << pass;
    prev = cost;
  }
}

TEST(CmaTrain, DivergenceNamesSampleIndex) {
  ChannelSpec cs{channel_preset("h2"), 0.0, Padding::kCausal};
  const Dataset ds = generate_dataset(cs, 1000, 10.0, 7, 100);
  AdaptConfig cfg;
  cfg.step_size = 10.0;  // hopelessly large
  try {
    cma_train(ds.train_observed, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("sample"), std::string::npos);
  }
}

TEST(MmseLms, StationaryAtWienerOptimum) {
  // Identity channel, no noise: the delta equalizer is the exact optimum,
  // so LMS updates leave it unchanged.
  const Dataset ds = identity_dataset(800, 300.0, 8);
  AdaptConfig cfg;
  cfg.passes = 3;
  cfg.step_size = 0.05;
  cfg.normalize = true;
  const LinearEqualizer eq =
      mmse_lms_train(ds.train_observed, ds.truth_train_symbols, cfg);
  // Noise at 300 dB is ~1e-15 relative; taps move at most a few orders
  // above that.
  for (std::size_t i = 0; i < eq.taps.size(); ++i) {
    EXPECT_NEAR(eq.taps.re[i], i == eq.center_index ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(eq.taps.im[i], 0.0, 1e-12);
  }
}

TEST(MmseLms, NoiselessIdentityReachesTinyMse) {
  const Dataset ds = identity_dataset(2000, 300.0, 9);
  AdaptConfig cfg;
  cfg.step_size = 0.05;
  cfg.normalize = true;
  const LinearEqualizer eq =
      mmse_lms_train(ds.train_observed, ds.truth_train_symbols, cfg);
  const ComplexSeq z = equalize_apply(eq, ds.train_observed);
  const double mse = (z - ds.truth_train_symbols).norm_sq() /
                     static_cast<double>(z.size());
  EXPECT_LE(mse, 1e-4);
}

TEST(MmseLms, BeatsCmaOnIsiChannel) {
  ChannelSpec cs{channel_preset("h1"), 0.0, Padding::kCausal};
  std::vector<double> cma_sers, mmse_sers;
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const Dataset ds = generate_dataset(cs, 2000, 10.0, 100 + trial, 4000);
    AdaptConfig cma_cfg;
    AdaptConfig mmse_cfg;
    mmse_cfg.step_size = 0.05;
    mmse_cfg.normalize = true;
    const LinearEqualizer cma_eq = cma_train(ds.train_observed, cma_cfg);
    const LinearEqualizer mmse_eq =
        mmse_lms_train(ds.train_observed, ds.truth_train_symbols, mmse_cfg);
    const auto score = [&](const LinearEqualizer& eq) {
      const ComplexSeq est = slicer_qpsk(equalize_apply(eq, ds.test_observed));
      return resolve_ambiguity(est, ds.test_symbols, 15).ser;
    };
    cma_sers.push_back(score(cma_eq));
    mmse_sers.push_back(score(mmse_eq));
  }
  std::sort(cma_sers.begin(), cma_sers.end());
  std::sort(mmse_sers.begin(), mmse_sers.end());
  EXPECT_LT(mmse_sers[2], cma_sers[2]);  // medians
}

TEST(MmseLms, NearWienerAfterEnoughPasses) {
  ChannelSpec cs{channel_preset("h1"), 0.0, Padding::kCausal};
  const Dataset ds = generate_dataset(cs, 2000, 8.0, 10, 10000);
  AdaptConfig cfg;
  cfg.step_size = 0.05;
  cfg.normalize = true;
  const LinearEqualizer lms =
      mmse_lms_train(ds.train_observed, ds.truth_train_symbols, cfg);

  LinearEqualizer wiener;
  wiener.taps = wiener_taps(ds.train_observed, ds.truth_train_symbols, cfg.taps);
  wiener.center_index = (cfg.taps - 1) / 2;

  const auto score = [&](const LinearEqualizer& eq, const Dataset& d) {
    const ComplexSeq est = slicer_qpsk(equalize_apply(eq, d.test_observed));
    return resolve_ambiguity(est, d.test_symbols, 15).ser;
  };
  const double ser_lms = score(lms, ds);
  const double ser_wiener = score(wiener, ds);

  // Within one dB-equivalent: no worse than the closed-form solution
  // evaluated on data generated at 1 dB less SNR.
  const Dataset ds_worse = generate_dataset(cs, 2000, 7.0, 10, 10000);
  LinearEqualizer wiener_worse;
  wiener_worse.taps =
      wiener_taps(ds_worse.train_observed, ds_worse.truth_train_symbols, cfg.taps);
  wiener_worse.center_index = (cfg.taps - 1) / 2;
  const double ser_wiener_1db = score(wiener_worse, ds_worse);

  EXPECT_LE(ser_lms, std::max(ser_wiener_1db, ser_wiener + 2e-3));
}

TEST(AdaptConfig, Validation) {
  AdaptConfig cfg;
  cfg.taps = 14;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.taps = 15;
  cfg.passes = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
