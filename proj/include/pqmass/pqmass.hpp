// Umbrella header for the pqmass library.

#ifndef PQMASS_PQMASS_HPP_
#define PQMASS_PQMASS_HPP_

#include "pqmass/baselines.hpp"
#include "pqmass/core.hpp"
#include "pqmass/inference.hpp"
#include "pqmass/io.hpp"
#include "pqmass/ks.hpp"
#include "pqmass/metrics.hpp"
#include "pqmass/parallel.hpp"
#include "pqmass/report.hpp"
#include "pqmass/runner.hpp"
#include "pqmass/synth.hpp"
#include "pqmass/tessellation.hpp"

#endif  // PQMASS_PQMASS_HPP_
