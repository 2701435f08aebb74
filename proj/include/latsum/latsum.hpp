#pragma once

// Umbrella header: rank-structured lattice summation of Newton-kernel
// potentials on uniform 3D grids.

#include "latsum/bench.hpp"
#include "latsum/bundle.hpp"
#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"
#include "latsum/grid.hpp"
#include "latsum/lattice.hpp"
#include "latsum/newton.hpp"
#include "latsum/parallel.hpp"
#include "latsum/project.hpp"
#include "latsum/qtt.hpp"
#include "latsum/quadrature.hpp"
#include "latsum/repro.hpp"
