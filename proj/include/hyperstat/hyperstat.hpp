#pragma once

#include "hyperstat/errors.hpp"
#include "hyperstat/geometry.hpp"
#include "hyperstat/hyperboloid.hpp"
#include "hyperstat/mixtures.hpp"
#include "hyperstat/montecarlo.hpp"
#include "hyperstat/numerics.hpp"
#include "hyperstat/poincare.hpp"
#include "hyperstat/rng.hpp"
#include "hyperstat/sampling.hpp"
#include "hyperstat/specfun.hpp"
