#pragma once

#include "dqls/numeric.hpp"
#include "dqls/state.hpp"
#include "dqls/ledger.hpp"
#include "dqls/coordinator.hpp"
#include "dqls/qsp.hpp"
#include "dqls/synthesis.hpp"
#include "dqls/phase_estimation.hpp"
#include "dqls/inversion.hpp"
#include "dqls/vtaa.hpp"
#include "dqls/regression.hpp"
#include "dqls/generator.hpp"
#include "dqls/fit.hpp"
#include "dqls/sweep.hpp"
