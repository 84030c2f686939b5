#pragma once

#include "errors.hpp"
#include "numeric.hpp"
#include "game.hpp"
#include "instance_io.hpp"
#include "fraction_plan.hpp"
#include "side_payment.hpp"
#include "payoff.hpp"
#include "indifference.hpp"
#include "equilibrium.hpp"
#include "air.hpp"
#include "asp.hpp"
#include "evaluation.hpp"
#include "geo.hpp"
#include "sampling.hpp"
#include "sweep.hpp"
