#pragma once

// Umbrella header.

#include "vaeq/adam.hpp"
#include "vaeq/baselines.hpp"
#include "vaeq/channels.hpp"
#include "vaeq/complex_seq.hpp"
#include "vaeq/decoder.hpp"
#include "vaeq/elbo.hpp"
#include "vaeq/eval.hpp"
#include "vaeq/experiment.hpp"
#include "vaeq/gradients.hpp"
#include "vaeq/io.hpp"
#include "vaeq/rng.hpp"
#include "vaeq/signal.hpp"
#include "vaeq/train.hpp"
#include "vaeq/version.hpp"
