#include "morawetz/scan.hpp"

#include "morawetz/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace morawetz {

namespace {

unsigned g_threads = 0;

}  // namespace

void set_thread_count(unsigned n) noexcept { g_threads = n; }

unsigned thread_count() noexcept {
    if (g_threads > 0) return g_threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::vector<double> build_grid(double lo, double hi, int points, std::span<const double> foci,
                               int focus_levels) {
    if (!(hi > lo) || points < 2) throw std::invalid_argument("build_grid: empty interval");
    std::vector<double> grid;
    grid.reserve(points + foci.size() * (2 * focus_levels + 1));
    const double spacing = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) grid.push_back(lo + spacing * i);
    grid.back() = hi;
    for (const double c : foci) {
        if (c < lo || c > hi) continue;
        grid.push_back(c);
        double offset = spacing;
        for (int k = 0; k < focus_levels; ++k) {
            if (c - offset > lo) grid.push_back(c - offset);
            if (c + offset < hi) grid.push_back(c + offset);
            offset *= 0.5;
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

Extremum golden_section_minimum(const std::function<double(double)>& fn, double lo, double hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = fn(c);
    double fd = fn(d);
    const double flo = fn(lo);
    const double fhi = fn(hi);
    Extremum best = flo <= fhi ? Extremum{flo, lo} : Extremum{fhi, hi};
    const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
    for (int it = 0; it < 200 && (b - a) > 1e-15 * scale; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = fn(d);
        }
    }
    if (fc < best.value) best = {fc, c};
    if (fd < best.value) best = {fd, d};
    return best;
}

Extremum minimize_on_grid(const std::function<double(double)>& fn, std::span<const double> grid,
                          int candidates) {
    const std::size_t n = grid.size();
    if (n == 0) throw std::invalid_argument("minimize_on_grid: empty grid");
    std::vector<double> values(n);
    parallel_for(n, [&](std::size_t i) { values[i] = fn(grid[i]); });

    std::vector<std::size_t> minima;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || values[i] <= values[i - 1];
        const bool right_ok = i + 1 == n || values[i] <= values[i + 1];
        if (left_ok && right_ok) minima.push_back(i);
    }
    std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    if (minima.size() > static_cast<std::size_t>(candidates)) minima.resize(candidates);

    Extremum best{values[minima.front()], grid[minima.front()]};
    for (const std::size_t i : minima) {
        const std::size_t l = i == 0 ? 0 : i - 1;
        const std::size_t r = i + 1 == n ? n - 1 : i + 1;
        if (l == r) continue;
        const Extremum e = golden_section_minimum(fn, grid[l], grid[r]);
        if (e.value < best.value) best = e;
    }
    return best;
}

Extremum maximize_on_grid(const std::function<double(double)>& fn, std::span<const double> grid,
                          int candidates) {
    const Extremum e = minimize_on_grid([&](double x) { return -fn(x); }, grid, candidates);
    return {-e.value, e.location};
}

}  // namespace morawetz
