#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "test_util.hpp"
#include "vaeq/gradients.hpp"
#include "vaeq/train.hpp"

using namespace vaeq;
using testutil::random_seq;

namespace {

struct Instance {
  ComplexSeq y;
  DecoderParams params;
  ComplexSeq hhat;
  Padding mode;
};

// Forward-only loss as a function of the flat parameter vector; this is the
// path the analytic gradients must differentiate.
double forward_loss(const std::vector<double>& flat, const Instance& inst) {
  DecoderParams p;
  ComplexSeq h(inst.hhat.size());
  detail::unpack_params(flat, p, h);
  const SymbolPosteriors q = decoder_forward(p, inst.y);
  return loss(inst.y, h, q, inst.mode).loss;
}

// Rejects bases sitting within 10*step of the softsign kink or the sigmoid
// clamp, where the subgradient convention makes the comparison ill-posed.
bool well_conditioned(const Instance& inst) {
  const DecoderTrace t = decoder_forward_trace(inst.params, inst.y);
  for (std::size_t k = 0; k < inst.y.size(); ++k) {
    if (std::fabs(t.conv1_out.re[k]) < 1e-4) return false;
    if (std::fabs(t.conv1_out.im[k]) < 1e-4) return false;
    if (std::fabs(t.conv2_out.re[k]) > 15.0) return false;
    if (std::fabs(t.conv2_out.im[k]) > 15.0) return false;
  }
  return true;
}

Instance make_instance(Rng& rng, std::size_t n, std::size_t hhat_len, Padding mode) {
  for (;;) {
    Instance inst;
    inst.mode = mode;
    inst.y = random_seq(n, rng, 1.0);
    inst.params = DecoderParams::random_init(rng, 0.4);
    auto [b1r, b1i] = rng.gaussian_pair();
    auto [b2r, b2i] = rng.gaussian_pair();
    inst.params.conv1.bias = {0.2 * b1r, 0.2 * b1i};
    inst.params.conv2.bias = {0.2 * b2r, 0.2 * b2i};
    inst.hhat = random_seq(hhat_len, rng, 0.5);
    if (well_conditioned(inst)) return inst;
  }
}

// Max guarded relative error between analytic and central-difference
// gradients over every parameter.
double max_fd_error(const Instance& inst, double step) {
  std::vector<double> flat;
  detail::pack_params(inst.params, inst.hhat, flat);

  const LossGradients lg = loss_gradients(inst.y, inst.params, inst.hhat, inst.mode);
  std::vector<double> analytic;
  detail::pack_params(lg.wrt_params, lg.wrt_hhat, analytic);

  double gmax = 0.0;
  for (double a : analytic) gmax = std::max(gmax, std::fabs(a));

  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    std::vector<double> probe = flat;
    probe[i] = flat[i] + step;
    const double fp = forward_loss(probe, inst);
    probe[i] = flat[i] - step;
    const double fm = forward_loss(probe, inst);
    const double fd = (fp - fm) / (2.0 * step);
    const double denom =
        std::max({std::fabs(analytic[i]), std::fabs(fd), 1e-3 * gmax, 1e-12});
    worst = std::max(worst, std::fabs(analytic[i] - fd) / denom);
  }
  return worst;
}

}  // namespace

TEST(LossGradients, MatchesFiniteDifferences) {
  Rng rng(1001);
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t hlen = rep % 2 == 0 ? 3 : 5;
    const Padding mode = rep % 3 == 0 ? Padding::kCausal : Padding::kCentered;
    const Instance inst = make_instance(rng, 32, hlen, mode);
    EXPECT_LT(max_fd_error(inst, 1e-5), 1e-5) << "rep " << rep;
  }
}

TEST(LossGradients, BiasGradientAtSoftsignKink) {
  // Zero conv1 weights put every first-layer pre-activation exactly at the
  // softsign kink; the f'(0) = 1 convention must agree with central
  // differences (smaller step keeps the one-sided curvature error small).
  Rng rng(1002);
  Instance inst;
  inst.mode = Padding::kCentered;
  inst.y = random_seq(32, rng, 1.0);
  inst.params = DecoderParams();  // zero conv1: pre-activations all zero
  inst.params.conv2.taps.re = {0.8, -0.3};
  inst.params.conv2.taps.im = {0.1, 0.4};
  inst.hhat = random_seq(3, rng, 0.5);

  std::vector<double> flat;
  detail::pack_params(inst.params, inst.hhat, flat);
  const LossGradients lg = loss_gradients(inst.y, inst.params, inst.hhat, inst.mode);
  std::vector<double> analytic;
  detail::pack_params(lg.wrt_params, lg.wrt_hhat, analytic);

  const double step = 1e-6;
  // conv1 bias lives at flat indices 10 (re) and 11 (im).
  for (std::size_t i : {std::size_t{10}, std::size_t{11}}) {
    std::vector<double> probe = flat;
    probe[i] = flat[i] + step;
    const double fp = forward_loss(probe, inst);
    probe[i] = flat[i] - step;
    const double fm = forward_loss(probe, inst);
    const double fd = (fp - fm) / (2.0 * step);
    EXPECT_LT(std::fabs(analytic[i] - fd) /
                  std::max({std::fabs(fd), std::fabs(analytic[i]), 1e-6}),
              1e-4)
        << "flat index " << i;
  }
}

TEST(LossGradients, ValueAgreesWithForwardLoss) {
  Rng rng(1003);
  const Instance inst = make_instance(rng, 48, 5, Padding::kCentered);
  const LossGradients lg = loss_gradients(inst.y, inst.params, inst.hhat, inst.mode);
  const SymbolPosteriors q = decoder_forward(inst.params, inst.y);
  const LossBreakdown lb = loss(inst.y, inst.hhat, q, inst.mode);
  EXPECT_NEAR(lg.value.loss, lb.loss, 1e-9 * std::max(1.0, std::fabs(lb.loss)));
  EXPECT_NEAR(lg.value.C, lb.C, 1e-9 * std::max(1.0, lb.C));
  EXPECT_NEAR(lg.value.A, lb.A, 1e-9);
}
