#pragma once

#include "dicirc/composition.hpp"
#include "dicirc/di_rules.hpp"
#include "dicirc/error.hpp"
#include "dicirc/network.hpp"
#include "dicirc/primitives.hpp"
#include "dicirc/simulator.hpp"
#include "dicirc/spacetime_graph.hpp"
#include "dicirc/spec_language.hpp"
#include "dicirc/switch_networks.hpp"
#include "dicirc/trace.hpp"
