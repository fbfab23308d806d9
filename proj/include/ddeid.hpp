#pragma once

#include "ddeid/analysis.hpp"
#include "ddeid/config.hpp"
#include "ddeid/dual.hpp"
#include "ddeid/equilibrium.hpp"
#include "ddeid/experiments.hpp"
#include "ddeid/expr.hpp"
#include "ddeid/injectivity.hpp"
#include "ddeid/jacobian.hpp"
#include "ddeid/linearize.hpp"
#include "ddeid/model.hpp"
#include "ddeid/parser.hpp"
#include "ddeid/rank.hpp"
#include "ddeid/report.hpp"
#include "ddeid/signal.hpp"
#include "ddeid/simulate.hpp"
#include "ddeid/version.hpp"
