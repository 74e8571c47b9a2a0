#pragma once

#include <functional>
#include <span>
#include <vector>

namespace morawetz {

/// Sorted, de-duplicated sample points: `points` uniform nodes on [lo, hi]
/// plus, around every focus inside the interval, the focus itself and
/// geometrically clustered neighbours focus +- spacing * 2^-k.
std::vector<double> build_grid(double lo, double hi, int points, std::span<const double> foci = {},
                               int focus_levels = 30);

struct Extremum {
    double value = 0.0;
    double location = 0.0;
};

/// Minimum of fn over the grid, then golden-section refinement inside the
/// brackets of the best few discrete local minima. Evaluation over the grid
/// runs through parallel_for; fn must be safe to call concurrently.
Extremum minimize_on_grid(const std::function<double(double)>& fn, std::span<const double> grid,
                          int candidates = 6);

Extremum maximize_on_grid(const std::function<double(double)>& fn, std::span<const double> grid,
                          int candidates = 6);

/// Golden-section search for a minimum of fn on [lo, hi].
Extremum golden_section_minimum(const std::function<double(double)>& fn, double lo, double hi);

}  // namespace morawetz
