#pragma once

#include "tracelab/fem/assembly.hpp"
#include "tracelab/fem/discretization.hpp"
#include "tracelab/fem/harmonic.hpp"
#include "tracelab/fem/mesh.hpp"
#include "tracelab/fem/poisson.hpp"
