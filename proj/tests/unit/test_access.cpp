#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "generators.hpp"
#include "mddthz/access.hpp"
#include "mddthz/scheduler.hpp"

using namespace mddthz;
using namespace mddthz::testing;

TEST_CASE("max coherent sum matches exhaustive search over box corners") {
    Gen g(11);
    for (int i = 0; i < 100; ++i) {
        const int n = g.integer(1, 6);
        std::vector<cplx> c(n);
        std::vector<double> b(n);
        for (int k = 0; k < n; ++k) {
            c[k] = g.cnormal();
            b[k] = g.uniform(0.0, 2.0);
        }
        // the maximum of a convex function over a box sits at a vertex
        double best = 0.0;
        for (int mask = 0; mask < (1 << n); ++mask) {
            cplx s = 0.0;
            for (int k = 0; k < n; ++k)
                if (mask >> k & 1) s += c[k] * b[k];
            best = std::max(best, std::abs(s));
        }
        double angle = 0.0;
        CHECK(max_coherent_sum(c, b, &angle) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("access max-min meets its bounds and the link-rate model") {
    ScenarioConfig cfg;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto s = generate_scenario(cfg, seed);
        const auto ch = build_trial_channels(s, ClusteringMethod::dc);
        auto a = cluster_dc(s.ap_positions, los_gains_from(ch), 4);
        a = select_devices(a, cluster_device_gains(a, ch), s.u_max, s.c_max);
        const double noise = s.power.access_noise(s.band);
        const auto v = build_access_precoders(ch, a, noise, s.power.p_ap, 0.0);
        const auto sol = solve_access(ch, a, v, noise, s.power.p_ap);
        CHECK(sol.chi_lower <= sol.chi_upper * (1.0 + 1e-9));
        CHECK(sol.solver_min_sinr >= sol.chi_lower * (1.0 - 1e-6));
        // the problem rows and the link-rate model agree on the SINR
        CHECK(sol.min_sinr == doctest::Approx(sol.solver_min_sinr).epsilon(1e-6));
        PowerAllocation alloc;
        alloc.ad_power = sol.ad_power;
        CHECK(check_allocation(alloc, a, &v, s.power.p_cpu, s.power.p_ap, 1e-6).empty());
    }
}
