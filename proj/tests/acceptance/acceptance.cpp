// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
// Runs (all paired on the same trial seeds):
//   A  1 GHz, SI offset -10 dB, every scheme, solver traces on
//   B  1 GHz, SI offset +30 dB, MDD-TTWL and TDD-TTWL
//   C  250 MHz, MDD-TTWL and TTW
//   D  4 GHz, MDD-TTWL and TTW

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "generators.hpp"
#include "mddthz/channel.hpp"
#include "mddthz/harness.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace mddthz;
using namespace mddthz::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int g_failed = 0;

void verdict(int n, bool pass, const std::string& detail) {
    std::printf("CRITERION %d: %s  %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failed;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

int env_int(const char* name, int fallback) {
    const char* v = std::getenv(name);
    return v ? std::atoi(v) : fallback;
}

ExperimentResult run(const char* label, ExperimentConfig cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.out_dir = std::string("acceptance_runs/") + label;
    auto r = run_experiment(cfg);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "run %s: %d trials in %.0f s\n", label, cfg.trials, s);
    return r;
}

double pooled_median(const ExperimentResult& r, Scheme s) { return emit_cdf(r, s).likely50; }

double wireless_min(const std::vector<LinkRate>& v) {
    double m = kInf;
    for (const auto& x : v)
        if (!x.unbounded()) m = std::min(m, x.value());
    return m;
}

// Solver-reported and re-evaluated minimum of one leg agree within 1% (or both unbounded).
bool leg_matches(double solver, double reeval) {
    if (!std::isfinite(solver) || !std::isfinite(reeval)) return std::isfinite(solver) == std::isfinite(reeval);
    return std::abs(solver - reeval) <= 0.01 * std::max(solver, reeval);
}

}  // namespace

int main() {
    const int trials = env_int("MDDTHZ_ACCEPTANCE_TRIALS", 50);
    const std::uint64_t seed = 20240601;

    // ---------------------------------------------------------------- 1
    {
        const double db = linear_to_db(path_gain_los(200e9, 10.0, 0.0033));
        const double ref = static_cast<double>(path_gain_db_reference(200e9L, 10.0L, 0.0033L));
        Gen g(1);
        double worst = 0.0;
        ThzRayParams params;
        for (int i = 0; i < 50; ++i) {
            const Vec3 tx{g.uniform(0, 100), g.uniform(0, 100), 10.0};
            const Vec3 rx{g.uniform(0, 100), g.uniform(0, 100), g.uniform(4, 6)};
            const auto taps = thz_tap_channel({4, 4, 0.5}, tx, rx, params, 200e9, g.next_seed());
            double freq = 0.0, time = 0.0;
            for (int m = 0; m < 16; ++m) freq += thz_subcarrier_channel(taps, m, 16).squaredNorm();
            for (const auto& t : taps.taps) time += t.squaredNorm();
            worst = std::max(worst, std::abs(freq - 16.0 * time) / (16.0 * time));
        }
        const bool pass = std::abs(db - (-98.60)) <= 0.05 && std::abs(db - ref) <= 1e-9 && worst <= 1e-9;
        verdict(1, pass, fmt("path gain %.4f dB (reference %.4f dB); worst Parseval error %.2e", db, ref, worst));
    }

    // ---------------------------------------------------------------- 3
    {
        double worst = kInf;
        bool shape = true;
        for (std::uint64_t s = 1; s <= 20; ++s) {
            const auto p = small_cc_instance(s);
            int rows = 0;
            for (const auto& d : p.target_devices) rows += static_cast<int>(d.size());
            shape &= p.n_targets() == 2 && p.subcarriers.size() == 2 && rows >= 2;
            const double grid = grid_optimum(p, 5);
            const double sol = solve_fronthaul_maxmin(p).min_rate;
            worst = std::min(worst, grid > 0.0 ? sol / grid : 1.0);
        }
        verdict(3, shape && worst >= 0.95, fmt("worst solver / grid ratio over 20 draws %.4f (need >= 0.95)", worst));
    }

    // ---------------------------------------------------------------- 9
    {
        const auto reports = run_all_properties(200);
        bool pass = true;
        std::string detail;
        for (const auto& r : reports) {
            pass &= r.cases >= 200 && r.failures == 0;
            detail += r.name + " " + std::to_string(r.failures) + "/" + std::to_string(r.cases);
            if (r.failures) detail += " [" + r.first_failure + "]";
            detail += "; ";
        }
        verdict(9, pass, detail);
    }

    // ---------------------------------------------------------------- runs
    ExperimentConfig base;
    base.trials = trials;
    base.seed = seed;

    ExperimentConfig ca = base;
    ca.schemes = all_schemes();
    ca.trace_solver = true;
    const auto A = run("A_1GHz_si-10", ca);

    ExperimentConfig cb = base;
    cb.scenario.si_offset_db = 30.0;
    cb.schemes = {Scheme::mdd_ttwl, Scheme::tdd_ttwl};
    const auto B = run("B_1GHz_si+30", cb);

    ExperimentConfig cc = base;
    cc.scenario.band.fronthaul_bandwidth_hz = 250e6;
    cc.schemes = {Scheme::mdd_ttwl, Scheme::ttw};
    const auto C = run("C_250MHz", cc);

    ExperimentConfig cd = base;
    cd.scenario.band.fronthaul_bandwidth_hz = 4e9;
    cd.schemes = {Scheme::mdd_ttwl, Scheme::ttw};
    const auto D = run("D_4GHz", cd);

    // ---------------------------------------------------------------- 2
    {
        int checked = 0, bad_rate = 0, bad_alloc = 0;
        std::string first;
        for (const ExperimentResult* r : {&A, &B, &C, &D})
            for (const auto& t : r->trials)
                for (const auto& o : t.outcomes) {
                    ++checked;
                    const auto& rep = o.report;
                    const bool ok_rate = leg_matches(o.solver_cc, wireless_min(rep.c_cc)) &&
                                         leg_matches(o.solver_ca, wireless_min(rep.c_ca)) &&
                                         leg_matches(o.solver_ad, wireless_min(rep.c_ad));
                    if (!ok_rate) {
                        ++bad_rate;
                        if (first.empty()) first = rep.scheme + " trial " + std::to_string(t.trial) + " rate mismatch";
                    }
                    if (!o.violations.empty()) {
                        ++bad_alloc;
                        if (first.empty()) first = rep.scheme + " trial " + std::to_string(t.trial) + ": " + o.violations[0];
                    }
                }
        verdict(2, bad_rate == 0 && bad_alloc == 0,
                std::to_string(checked) + " scheme outcomes; rate mismatches " + std::to_string(bad_rate) +
                    ", budget/exclusivity violations " + std::to_string(bad_alloc) + (first.empty() ? "" : "; first: " + first));
    }

    // ---------------------------------------------------------------- 4
    {
        double worst_half = 0.0;
        for (double c : {1.0, 1e8, 7.3e8, 2e9}) {
            const auto t = solve_tdd_fractions(c, c, c, 0.0);
            worst_half = std::max(worst_half, std::abs(t.objective - c / 2.0) / c);
        }
        // grid check on the TDD link rates of run A plus random rate triples
        std::vector<std::array<double, 3>> triples;
        for (const auto& t : A.trials) {
            const auto& rep = t.outcome(Scheme::tdd_ttwl, A.config.schemes).report;
            triples.push_back({wireless_min(rep.c_cc), wireless_min(rep.c_ca), wireless_min(rep.c_ad)});
        }
        Gen g(44);
        for (int i = 0; i < 30; ++i)
            triples.push_back({g.log_uniform(1e8, 1e10), g.log_uniform(1e8, 1e10), g.log_uniform(1e8, 1e10)});
        double worst_excess = 0.0;
        for (const auto& [x, y, z] : triples) {
            const auto t = solve_tdd_fractions(x, y, z, 0.05);
            if (t.objective <= 0.0) continue;
            const double grid = tdd_grid_best(x, y, z, 0.05, 100);
            worst_excess = std::max(worst_excess, grid / t.objective - 1.0);
        }
        verdict(4, worst_half <= 1e-6 && worst_excess <= 1e-3,
                fmt("equal-rate relative error %.2e; worst grid excess %.4f%% over %.0f rate triples", worst_half,
                    100.0 * worst_excess, static_cast<double>(triples.size())));
    }

    // ---------------------------------------------------------------- 5
    {
        const auto mdd_a = A.trial_medians(Scheme::mdd_ttwl), tdd_a = A.trial_medians(Scheme::tdd_ttwl);
        int wins = 0;
        for (std::size_t i = 0; i < mdd_a.size(); ++i) wins += mdd_a[i] >= tdd_a[i] * (1.0 - 1e-9) ? 1 : 0;
        const double frac = static_cast<double>(wins) / mdd_a.size();
        const auto mdd_b = B.trial_medians(Scheme::mdd_ttwl), tdd_b = B.trial_medians(Scheme::tdd_ttwl);
        std::vector<double> gap;
        for (std::size_t i = 0; i < mdd_b.size(); ++i) gap.push_back((mdd_b[i] - tdd_b[i]) / tdd_b[i]);
        std::sort(gap.begin(), gap.end());
        const double med_gap = quantile_sorted(gap, 0.5);
        verdict(5, frac >= 0.8 && std::abs(med_gap) <= 0.10,
                fmt("-10 dB: MDD >= TDD in %.1f%% of trials (need >= 80%%); +30 dB: median relative gap %+.2f%% "
                    "(need within +-10%%)",
                    100.0 * frac, 100.0 * med_gap));
    }

    // ---------------------------------------------------------------- 6
    {
        const double m250 = pooled_median(C, Scheme::mdd_ttwl), m1g = pooled_median(A, Scheme::mdd_ttwl),
                     m4g = pooled_median(D, Scheme::mdd_ttwl);
        const double ttw4 = pooled_median(D, Scheme::ttw);
        const double gap = (ttw4 - m4g) / ttw4;
        verdict(6, m250 < m1g && m1g < m4g && gap <= 0.10,
                fmt("MDD median 250 MHz %.4g, 1 GHz %.4g, 4 GHz %.4g bit/s; gap to TTW at 4 GHz %.2f%%", m250, m1g, m4g,
                    100.0 * gap));
    }

    // ---------------------------------------------------------------- 7
    {
        const auto ttw = A.objectives(Scheme::ttw), cchy = A.objectives(Scheme::cc_hy),
                   cahy = A.objectives(Scheme::ca_hy), mdd = A.objectives(Scheme::mdd_ttwl);
        int ok = 0;
        const double e = 1e-9;
        for (std::size_t i = 0; i < ttw.size(); ++i) {
            const bool chain = ttw[i] >= cchy[i] * (1.0 - e) && cchy[i] >= mdd[i] * (1.0 - 0.02);
            const bool side = ttw[i] >= cahy[i] * (1.0 - e);
            ok += chain && side ? 1 : 0;
        }
        const double frac = static_cast<double>(ok) / ttw.size();
        verdict(7, frac >= 0.95, fmt("ordering holds in %.1f%% of trials (need >= 95%%)", 100.0 * frac));
    }

    // ---------------------------------------------------------------- 8
    {
        int mdd_trials = 0, bad_stop = 0, bad_trace = 0, traces = 0;
        for (const ExperimentResult* r : {&A, &B, &C, &D})
            for (const auto& t : r->trials) {
                const auto& o = t.outcome(Scheme::mdd_ttwl, r->config.schemes);
                ++mdd_trials;
                if (!o.balance) {
                    ++bad_stop;
                    continue;
                }
                const auto& b = *o.balance;
                const bool ok = b.stop == BalanceStop::single_tier || b.final_gap <= b.kappa_prime ||
                                b.final_raw_step < 1.0;
                bad_stop += ok ? 0 : 1;
            }
        for (const auto& t : A.trials)
            for (const auto& s : t.solver) {
                if (s.scheme != "MDD-TTWL") continue;
                ++traces;
                for (std::size_t i = 1; i < s.rows.size(); ++i)
                    if (s.rows[i].chi_lower < s.rows[i - 1].chi_lower) {
                        ++bad_trace;
                        break;
                    }
            }
        verdict(8, bad_stop == 0 && bad_trace == 0 && traces > 0,
                fmt("%.0f MDD trials, %.0f off-balance stops; %.0f lower-level traces, %.0f decreasing", mdd_trials,
                    bad_stop, traces, bad_trace));
    }

    std::printf("%s: %d of 9 criteria failed\n", g_failed ? "ACCEPTANCE FAILED" : "ACCEPTANCE PASSED", g_failed);
    return g_failed ? 1 : 0;
}
