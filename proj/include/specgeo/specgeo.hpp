#pragma once

#include "specgeo/error.hpp"
#include "specgeo/numerics/eigen.hpp"
#include "specgeo/numerics/quadrature.hpp"
#include "specgeo/numerics/rng.hpp"
#include "specgeo/numerics/stats.hpp"
#include "specgeo/kernel.hpp"
#include "specgeo/mixture.hpp"
#include "specgeo/density.hpp"
#include "specgeo/params.hpp"
#include "specgeo/popoperator.hpp"
#include "specgeo/embedding.hpp"
#include "specgeo/cluster.hpp"
