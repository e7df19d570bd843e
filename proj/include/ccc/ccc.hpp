#pragma once

#include "check/all.hpp"
#include "fuzz.hpp"
#include "node.hpp"
#include "params.hpp"
#include "scenario.hpp"
#include "simulator.hpp"
#include "trace.hpp"
