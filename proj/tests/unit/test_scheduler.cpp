#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "generators.hpp"
#include "mddthz/scheduler.hpp"
#include "oracles.hpp"

using namespace mddthz;
using namespace mddthz::testing;

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();

bool frame_ok(const TddSchedule& t) {
    const double e = 1e-12;
    return t.tau_cc >= -e && t.tau_ca >= -e && t.tau_ad >= -e &&
           t.tau_cc + t.tau_ca + t.tau_ad + t.tau_gp <= 1.0 + e &&
           t.tau_ad <= t.tau_cc + t.tau_ca + 2.0 * t.tau_gp + e;
}
}  // namespace

TEST_CASE("equal link rates without guard give half the rate") {
    for (double c : {1.0, 3.5e8, 2e9}) {
        const auto t = solve_tdd_fractions(c, c, c, 0.0);
        CHECK(std::abs(t.objective - c / 2.0) <= 1e-6 * c);
        CHECK(frame_ok(t));
    }
}

TEST_CASE("TDD optimum is never beaten by a fine grid") {
    Gen g(21);
    for (int i = 0; i < 40; ++i) {
        const double cc = g.log_uniform(1e8, 1e10), ca = g.log_uniform(1e8, 1e10), ad = g.log_uniform(1e8, 1e10);
        const double gp = g.coin() ? 0.05 : g.uniform(0.0, 0.2);
        const auto t = solve_tdd_fractions(cc, ca, ad, gp);
        CHECK(frame_ok(t));
        CHECK(t.objective == doctest::Approx(tdd_value(t.tau_cc, t.tau_ca, t.tau_ad, gp, cc, ca, ad)));
        CHECK(tdd_grid_best(cc, ca, ad, gp, 60) <= t.objective * 1.001);
    }
}

TEST_CASE("TDD special cases") {
    // wired CPU-to-CAP leg: all fronthaul time to the CAP-to-AP hop
    auto t = solve_tdd_fractions(inf, 1e9, 1e9, 0.05);
    CHECK(t.tau_cc == 0.0);
    CHECK(frame_ok(t));
    CHECK(tdd_grid_best(inf, 1e9, 1e9, 0.05, 80) <= t.objective * 1.001);
    // both fronthaul legs absent: access-limited
    t = solve_tdd_fractions(inf, inf, 1e9, 0.05);
    CHECK(frame_ok(t));
    CHECK(tdd_grid_best(inf, inf, 1e9, 0.05, 80) <= t.objective * 1.001);
    // a dead leg gives zero
    CHECK(solve_tdd_fractions(0.0, 1e9, 1e9, 0.05).objective == 0.0);
    CHECK_THROWS(solve_tdd_fractions(-1.0, 1.0, 1.0, 0.05));
    CHECK_THROWS(solve_tdd_fractions(1.0, 1.0, 1.0, 1.0));
}

TEST_CASE("MDD subframe scaling") {
    MddSchedule s;
    CHECK(s.scale() == 1.0);
    s.n_subframes = 4;
    CHECK(s.scale() == doctest::Approx(4.0 / (4.0 + 2.0 / 3.0)));
}

TEST_CASE("balancing on linear tiers converges near the crossing") {
    Gen g(8);
    for (int i = 0; i < 50; ++i) {
        const int n = 8 * g.integer(1, 16);
        const double a = g.log_uniform(0.1, 10.0), b = g.log_uniform(0.1, 10.0);
        LoopConfig cfg;
        const auto out = balance_sizes(n, cfg, [&](int m) { return std::pair{a * (n - m), b * m}; });
        REQUIRE_FALSE(out.steps.empty());
        const bool ok = out.final_gap <= out.kappa_prime || out.final_raw_step < 1.0;
        CHECK(ok);
        CHECK(out.stop != BalanceStop::single_tier);
        double best = -inf;
        for (const auto& s : out.steps) {
            CHECK(s.m_ca_size >= 0);
            CHECK(s.m_ca_size <= n);
            best = std::max(best, std::min(s.c_cc, s.c_ca));
        }
        CHECK(out.best_value == best);
        // the crossing sits at m = a n / (a + b); the best visited size is close to it
        const double cross = a * n / (a + b);
        CHECK(std::abs(out.best_m_ca - cross) <= std::max(2.0, 0.25 * n));
    }
}

TEST_CASE("balancing clamps at the band edge and stops on an absent tier") {
    LoopConfig cfg;
    cfg.m_step = 8;  // first move lands past the edge
    const auto up = balance_sizes(16, cfg, [](int) { return std::pair{2.0, 1.0}; });
    for (const auto& s : up.steps) CHECK(s.m_ca_size <= 16);
    CHECK(up.steps.back().m_ca_size == 16);
    CHECK(up.stop != BalanceStop::balanced);
    cfg.m_step = 0;
    const auto down = balance_sizes(16, cfg, [](int) { return std::pair{1.0, 2.0}; });
    for (const auto& s : down.steps) CHECK(s.m_ca_size >= 0);
    CHECK(down.steps.back().m_ca_size < 8);

    const auto one = balance_sizes(16, cfg, [](int m) { return std::pair{inf, 1.0 * m}; });
    CHECK(one.stop == BalanceStop::single_tier);
    CHECK(one.steps.size() == 1);
    CHECK_THROWS(balance_sizes(0, cfg, [](int) { return std::pair{1.0, 1.0}; }));
}

TEST_CASE("cluster sweep visits feasible counts") {
    LoopConfig cfg;
    const auto k = sweep_cluster_counts(ClusteringMethod::dc, 4, 2, 16, cfg);
    REQUIRE_FALSE(k.empty());
    CHECK(k.front() == 2);
    for (int x : k) {
        CHECK(x >= 2);
        CHECK(x <= 16);
    }
    CHECK(std::is_sorted(k.begin(), k.end()));
}

TEST_CASE("single-tier wireless scheme equals MDD forced to one AP per cluster") {
    ScenarioConfig sc;
    const auto s = generate_scenario(sc, 4);
    const auto ch = build_trial_channels(s, ClusteringMethod::dc);
    SchedulerConfig cfg;
    TrialEvaluator ev(s, ch, cfg);
    const auto stwl = ev.run(Scheme::stwl);
    const auto forced = ev.run_mdd_at(s.n_aps());
    CHECK(stwl.report.objective == doctest::Approx(forced.report.objective).epsilon(1e-9));
    CHECK(stwl.report.n_clusters == s.n_aps());
}

TEST_CASE("scheme outcomes are feasible and consistent with the link-rate model") {
    ScenarioConfig sc;
    const auto s = generate_scenario(sc, 2);
    const auto ch = build_trial_channels(s, ClusteringMethod::dc);
    TrialEvaluator ev(s, ch, SchedulerConfig{});
    for (Scheme k : {Scheme::mdd_ttwl, Scheme::tdd_ttwl, Scheme::cc_hy, Scheme::ttw}) {
        const auto o = ev.run(k);
        INFO(to_string(k));
        CHECK(o.violations.empty());
        CHECK_FALSE(o.report.flagged);
        CHECK(o.report.objective > 0.0);
        double cc = inf;
        for (const auto& r : o.report.c_cc)
            if (!r.unbounded()) cc = std::min(cc, r.value());
        if (std::isfinite(o.solver_cc)) CHECK(std::abs(cc - o.solver_cc) <= 0.01 * o.solver_cc);
    }
}
