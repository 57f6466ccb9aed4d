#pragma once

#include "dppphd/exact_oracle.hpp"
#include "dppphd/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dppphd {

struct CheckResult {
    std::string name;
    bool passed = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
};

/// Random prior on a grid of `grid_size` points holding at most `max_points` points.
[[nodiscard]] FiniteProcess random_finite_process(Philox& rng, int grid_size, int max_points);

/// Random observation model with `meas_points` measurement locations.
[[nodiscard]] ObservationModel random_observation(Philox& rng, int grid_size, int meas_points);

/// Poisson prior on 3 points: correctors are 1 and moments match the Poisson closed forms.
[[nodiscard]] CheckResult poisson_reduction_check(double tol = 1e-10);

/// Formula path against the enumeration oracle on randomized priors.
[[nodiscard]] CheckResult oracle_equivalence_check(std::uint64_t seed = 7, int cases = 20, double tol = 1e-9);

} // namespace dppphd
