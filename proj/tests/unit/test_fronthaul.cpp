#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "generators.hpp"
#include "mddthz/fronthaul.hpp"
#include "oracles.hpp"

using namespace mddthz;
using namespace mddthz::testing;

namespace {

// Row rates recomputed from scratch: SINR of every active stream, summed per row.
std::map<std::pair<int, int>, double> reference_rates(const FronthaulProblem& p, const StreamPower& power) {
    std::map<std::pair<int, int>, double> out;
    for (int t = 0; t < p.n_targets(); ++t)
        for (int u : p.target_devices[t]) out[{t, u}] = 0.0;
    for (const auto& [k, v] : power) {
        const auto [t, u, j] = k;
        if (v <= 0.0) continue;
        double interf = p.floor[t];
        for (const auto& [k2, v2] : power)
            if (std::get<2>(k2) == j && std::get<0>(k2) != t && v2 > 0.0) interf += p.gains[j](t, std::get<0>(k2)) * v2;
        out[{t, u}] += p.subcarrier_bw * std::log2(1.0 + p.gains[j](t, t) * v / interf);
    }
    return out;
}

}  // namespace

TEST_CASE("fronthaul solver output is consistent, feasible and exclusive") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const FronthaulProblem p = small_cc_instance(seed);
        const FronthaulSolution s = solve_fronthaul_maxmin(p);
        REQUIRE_FALSE(s.unbounded);
        const auto ref = reference_rates(p, s.power);
        double ref_min = std::numeric_limits<double>::infinity();
        for (const auto& [k, r] : ref) ref_min = std::min(ref_min, r);
        CHECK(std::abs(s.min_rate - ref_min) <= 0.01 * ref_min);

        std::vector<double> used(p.budgets.size(), 0.0);
        std::map<std::pair<int, int>, int> active;
        for (const auto& [k, v] : s.power) {
            CHECK(v >= 0.0);
            used[p.group[std::get<0>(k)]] += v;
            if (v > 0.0) ++active[{std::get<0>(k), std::get<2>(k)}];
            CHECK((s.gamma.at(k) == 1) == (v > 0.0));
        }
        for (std::size_t g = 0; g < used.size(); ++g) CHECK(used[g] <= p.budgets[g] * (1.0 + 1e-6));
        for (const auto& [slot, n] : active) CHECK(n == 1);

        CHECK(s.min_rate <= fronthaul_upper_bound(p) * (1.0 + 1e-9));
        CHECK(s.min_rate >= 0.95 * grid_optimum(p));
    }
}

TEST_CASE("fronthaul lower level never decreases along the trace") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = solve_fronthaul_maxmin(small_cc_instance(seed));
        REQUIRE_FALSE(s.trace.empty());
        for (std::size_t i = 1; i < s.trace.size(); ++i) CHECK(s.trace[i].chi_lower >= s.trace[i - 1].chi_lower);
    }
}

TEST_CASE("single target with one device reduces to water-filling") {
    FronthaulProblem p;
    p.target_ids = {0};
    p.target_cluster = {0};
    p.target_devices = {{0}};
    p.group = {0};
    p.budgets = {1.0};
    p.subcarriers = {0, 1};
    p.gains = {Mat::Constant(1, 1, 4.0), Mat::Constant(1, 1, 1.0)};
    p.floor = Vec::Constant(1, 1.0);
    p.subcarrier_bw = 1.0;
    // levels: 1/4 + p0 = 1 + p1, p0 + p1 = 1 -> p0 = 7/8, p1 = 1/8
    const double wf = std::log2(4.0 * 9.0 / 8.0) + std::log2(9.0 / 8.0);
    CHECK(fronthaul_upper_bound(p) == doctest::Approx(wf).epsilon(1e-9));
    const auto s = solve_fronthaul_maxmin(p);
    CHECK(s.min_rate <= wf * (1.0 + 1e-9));
    CHECK(s.min_rate >= 0.97 * wf);
}

TEST_CASE("problem with no rows is unbounded") {
    FronthaulProblem p;
    p.budgets = {1.0};
    const auto s = solve_fronthaul_maxmin(p);
    CHECK(s.unbounded);
}
