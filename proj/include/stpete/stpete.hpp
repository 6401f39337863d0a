#pragma once

// Library umbrella. The command-line layer (stpete/cli.hpp) additionally
// needs the vendored CLI11 and nlohmann/json headers.

#include "stpete/errors.hpp"
#include "stpete/rng.hpp"
#include "stpete/parallel.hpp"
#include "stpete/game.hpp"
#include "stpete/dyadic.hpp"
#include "stpete/exact.hpp"
#include "stpete/asymptotics.hpp"
#include "stpete/cf_inversion.hpp"
#include "stpete/limitlaw.hpp"
#include "stpete/montecarlo.hpp"
#include "stpete/fixtures.hpp"
#include "stpete/acceptance.hpp"
