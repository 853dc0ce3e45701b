#pragma once

#include "qtime/core/circuit.hpp"
#include "qtime/core/linalg.hpp"
#include "qtime/core/pauli.hpp"
#include "qtime/core/random.hpp"
#include "qtime/core/types.hpp"
#include "qtime/depth.hpp"
#include "qtime/freefermion.hpp"
#include "qtime/hamiltonians.hpp"
#include "qtime/histstate.hpp"
#include "qtime/protocols.hpp"
#include "qtime/random_instances.hpp"
#include "qtime/vhd.hpp"
