#include <gtest/gtest.h>

#include <cmath>

#include "vaeq/adam.hpp"

using namespace vaeq;

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  Adam opt(3);
  std::vector<double> params{1.0, -2.0, 0.5};
  const std::vector<double> before = params;
  for (int i = 0; i < 10; ++i) opt.step(params, {0.0, 0.0, 0.0}, AdamConfig{});
  EXPECT_EQ(params, before);
}

TEST(Adam, FirstStepWithUnitGradient) {
  Adam opt(1);
  std::vector<double> params{0.0};
  AdamConfig cfg;
  cfg.lr = 0.01;
  opt.step(params, {1.0}, cfg);
  // mhat = 1, vhat = 1: step = -lr / (1 + eps)
  EXPECT_NEAR(params[0], -0.01 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ConvergesOnQuadratic) {
  // f(x) = (x - 3)^2 / 2, grad = x - 3
  Adam opt(1);
  std::vector<double> x{-5.0};
  AdamConfig cfg;
  cfg.lr = 0.01;
  std::size_t steps = 0;
  for (; steps < 5000; ++steps) {
    opt.step(x, {x[0] - 3.0}, cfg);
    if (std::fabs(x[0] - 3.0) < 1e-6) break;
  }
  EXPECT_LT(std::fabs(x[0] - 3.0), 1e-6);
  EXPECT_LT(steps, 5000u);
}

TEST(Adam, SizeMismatchRejected) {
  Adam opt(2);
  std::vector<double> params{0.0, 0.0};
  EXPECT_THROW(opt.step(params, {1.0}, AdamConfig{}), std::invalid_argument);
}
