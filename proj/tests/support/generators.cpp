#include "generators.hpp"

#include <cmath>

namespace mddthz::testing {

double Gen::log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

CMat Gen::cmatrix(int rows, int cols) {
    CMat m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = cnormal();
    return m;
}

Vec Gen::positive(int n, double lo, double hi) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
}

ScenarioConfig Gen::small_scenario() {
    ScenarioConfig c;
    c.n_aps = integer(4, 10);
    c.n_devices = integer(2, 5);
    c.u_max = integer(1, 3);
    c.c_max = integer(2, 4);
    c.band.n_fronthaul_subcarriers = 8 * integer(1, 2);
    c.band.fronthaul_bandwidth_hz = c.band.n_fronthaul_subcarriers * log_uniform(10e6, 100e6);
    c.area_x = uniform(60.0, 140.0);
    c.area_y = uniform(60.0, 140.0);
    return c;
}

std::uint64_t case_seed(std::uint64_t suite, int i) { return hash_combine(suite, static_cast<std::uint64_t>(i)); }

}  // namespace mddthz::testing
