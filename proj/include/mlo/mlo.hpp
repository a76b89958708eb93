#pragma once

#include "mlo/agents.hpp"
#include "mlo/engine.hpp"
#include "mlo/errors.hpp"
#include "mlo/harness.hpp"
#include "mlo/propagation.hpp"
#include "mlo/radio.hpp"
#include "mlo/random.hpp"
#include "mlo/scenario.hpp"
