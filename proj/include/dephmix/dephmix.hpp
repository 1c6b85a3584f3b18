#pragma once

// Umbrella header for the dephasing-mixture dynamics library.

#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/divisibility.hpp"
#include "dephmix/embedding.hpp"
#include "dephmix/integrate.hpp"
#include "dephmix/io.hpp"
#include "dephmix/quadrature.hpp"
#include "dephmix/random.hpp"
#include "dephmix/stochastic.hpp"
#include "dephmix/triangle.hpp"
