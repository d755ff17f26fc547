#pragma once

// Umbrella header for the library (the CLI lives in ctmcsens/cli/).

#include "ctmcsens/estimators/estimate.hpp"
#include "ctmcsens/estimators/parallel.hpp"
#include "ctmcsens/estimators/stats.hpp"
#include "ctmcsens/model/compiled.hpp"
#include "ctmcsens/model/expr.hpp"
#include "ctmcsens/model/network.hpp"
#include "ctmcsens/model/parser.hpp"
#include "ctmcsens/model/state.hpp"
#include "ctmcsens/oracle/moments.hpp"
#include "ctmcsens/oracle/uniformization.hpp"
#include "ctmcsens/presets.hpp"
#include "ctmcsens/sim/coupled.hpp"
#include "ctmcsens/sim/next_reaction.hpp"
#include "ctmcsens/sim/path.hpp"
#include "ctmcsens/sim/toy.hpp"
#include "ctmcsens/streams/clock.hpp"
#include "ctmcsens/streams/rng.hpp"
#include "ctmcsens/streams/seed_plan.hpp"
