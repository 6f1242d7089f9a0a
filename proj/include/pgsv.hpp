#pragma once

#include "pgsv/rng.hpp"
#include "pgsv/model.hpp"
#include "pgsv/simulate.hpp"
#include "pgsv/particle.hpp"
#include "pgsv/conditionals.hpp"
#include "pgsv/diagnostics.hpp"
#include "pgsv/engine.hpp"
#include "pgsv/io.hpp"
