#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "generators.hpp"
#include "mddthz/access.hpp"
#include "mddthz/association.hpp"
#include "mddthz/channel.hpp"
#include "mddthz/fronthaul.hpp"
#include "mddthz/precoding.hpp"
#include "mddthz/scheduler.hpp"

namespace mddthz::testing {

namespace {

std::string tag(int i, const std::string& msg) { return "case " + std::to_string(i) + ": " + msg; }

bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

// Deployment plus a device selection; retries draws that cannot cover every device.
struct Draw {
    NetworkScenario s;
    ChannelSet ch;
    ClusterAssignment a;
    int n_clusters = 0;
};

Draw draw_assignment(Gen& g) {
    for (;;) {
        Draw d;
        const ScenarioConfig cfg = g.small_scenario();
        d.s = generate_scenario(cfg, g.next_seed());
        d.ch = build_trial_channels(d.s, ClusteringMethod::dc);
        const int l_min = (d.s.n_devices() + d.s.u_max - 1) / d.s.u_max;
        if (l_min > d.s.n_aps()) continue;
        d.n_clusters = g.integer(l_min, d.s.n_aps());
        try {
            d.a = cluster_dc(d.s.ap_positions, los_gains_from(d.ch), d.n_clusters);
            d.a = select_devices(d.a, cluster_device_gains(d.a, d.ch), d.s.u_max, d.s.c_max);
        } catch (const DeviceSelectionError&) {
            continue;
        }
        return d;
    }
}

}  // namespace

PropertyReport prop_association(int cases) {
    PropertyReport r{"association partition/capacity/orthogonality"};
    for (int i = 0; i < cases; ++i, ++r.cases) {
        Gen g(case_seed(0xa550c, i));
        const Draw d = draw_assignment(g);
        const auto& a = d.a;
        const int q_n = d.s.n_aps(), u_n = d.s.n_devices();

        // every AP in exactly one cluster
        std::vector<int> count(q_n, 0);
        for (const auto& c : a.clusters)
            for (int q : c) ++count[q];
        if (std::any_of(count.begin(), count.end(), [](int c) { return c != 1; })) {
            r.fail(tag(i, "clusters do not partition the APs"));
            continue;
        }
        if (a.n_clusters() != d.n_clusters) r.fail(tag(i, "cluster count differs from the request"));
        for (int l = 0; l < a.n_clusters(); ++l) {
            if (std::find(a.clusters[l].begin(), a.clusters[l].end(), a.cap_node[l]) == a.clusters[l].end())
                r.fail(tag(i, "CAP outside its cluster"));
            if (static_cast<int>(a.served_devices[l].size()) > d.s.u_max) r.fail(tag(i, "U_max exceeded"));
        }
        for (int u = 0; u < u_n; ++u) {
            const auto& gu = a.serving_map[u];
            if (gu.empty() || static_cast<int>(gu.size()) > d.s.c_max) r.fail(tag(i, "C_max or coverage broken"));
            for (int l : gu) {
                const auto& su = a.served_devices[l];
                if (std::count(su.begin(), su.end(), u) != 1) r.fail(tag(i, "serving relation not symmetric"));
            }
        }
        int links = 0;
        for (const auto& su : a.served_devices) links += static_cast<int>(su.size());
        int links2 = 0;
        for (const auto& gu : a.serving_map) links2 += static_cast<int>(gu.size());
        if (links != links2) r.fail(tag(i, "link count mismatch"));
        if (!check_assignment(a, q_n, u_n, d.s.u_max, d.s.c_max).empty())
            r.fail(tag(i, "check_assignment reports a violation"));

        // subcarrier sets: disjoint, complete, CA size as requested
        const int n_sc = d.ch.n_subcarriers;
        const int size = g.integer(0, n_sc);
        const auto part = assign_subcarriers(ca_subcarrier_gains(a, d.ch), n_sc, size);
        std::set<int> all(part.m_cc.begin(), part.m_cc.end());
        const std::set<int> ca(part.m_ca.begin(), part.m_ca.end());
        bool overlap = false;
        for (int m : ca) overlap |= !all.insert(m).second;
        if (overlap) r.fail(tag(i, "M_CC and M_CA overlap"));
        if (static_cast<int>(all.size()) != n_sc || *all.begin() != 0 || *all.rbegin() != n_sc - 1)
            r.fail(tag(i, "M_CC and M_CA do not cover the band"));
        if (static_cast<int>(ca.size()) != size) r.fail(tag(i, "M_CA size differs from the request"));

        // exclusive activation: one stream per (target, subcarrier) after recovery
        StreamPower power;
        for (int t = 0; t < 3; ++t)
            for (int u = 0; u < 3; ++u)
                for (int j = 0; j < 2; ++j)
                    if (g.coin(0.6)) power[{t, u, j}] = g.uniform(0.0, 1.0);
        const auto gamma = recover_gamma(power);
        std::map<std::pair<int, int>, int> on;
        std::map<std::pair<int, int>, double> top;
        for (const auto& [k, v] : power) {
            const std::pair<int, int> slot{std::get<0>(k), std::get<2>(k)};
            on[slot] += gamma.at(k);
            top[slot] = std::max(top[slot], v);
            if (gamma.at(k) && v != top[slot] && v < top[slot]) r.fail(tag(i, "gamma picked a weaker stream"));
        }
        for (const auto& [slot, n] : on)
            if (n != (top[slot] > 0.0 ? 1 : 0)) r.fail(tag(i, "slot not exclusively activated"));
    }
    return r;
}

PropertyReport prop_quadratic_transform(int cases) {
    PropertyReport r{"quadratic transform identity"};
    for (int i = 0; i < cases; ++i, ++r.cases) {
        Gen g(case_seed(0x9f7, i));
        FronthaulProblem p;
        const int nt = g.integer(1, 5), nj = g.integer(1, 4);
        for (int t = 0; t < nt; ++t) {
            p.target_ids.push_back(t);
            p.target_cluster.push_back(t);
            p.target_devices.push_back({0, 1});
            p.group.push_back(0);
        }
        p.budgets = {1.0};
        for (int j = 0; j < nj; ++j) {
            p.subcarriers.push_back(j);
            Mat gm(nt, nt);
            for (int a = 0; a < nt; ++a)
                for (int b = 0; b < nt; ++b) gm(a, b) = g.log_uniform(1e-12, 1e-6) * (a == b ? 100.0 : 1.0);
            p.gains.push_back(gm);
        }
        p.floor = g.positive(nt, 1e-13, 1e-11);
        StreamPower power;
        for (int t = 0; t < nt; ++t)
            for (int j = 0; j < nj; ++j)
                if (g.coin(0.7)) power[{t, g.integer(0, 1), j}] = g.log_uniform(1e-4, 1.0);
        const auto z = qt_update(p, power);
        if (z.size() != power.size()) {
            r.fail(tag(i, "z missing for some stream"));
            continue;
        }
        for (const auto& [k, v] : power) {
            const auto [t, u, j] = k;
            // A and B recomputed by hand from the gain matrices
            const double a = p.gains[j](t, t) * v;
            double b = p.floor[t];
            for (const auto& [k2, v2] : power)
                if (std::get<2>(k2) == j && std::get<0>(k2) != t) b += p.gains[j](t, std::get<0>(k2)) * v2;
            const double zs = z.at(k);
            if (!rel_close(zs, std::sqrt(a) / b, 1e-12)) r.fail(tag(i, "z differs from sqrt(A)/B"));
            auto f = [&](double zz) { return 2.0 * zz * std::sqrt(a) - zz * zz * b; };
            const double sinr = a / b;
            if (!rel_close(f(zs), sinr, 1e-9)) r.fail(tag(i, "QT value at z* differs from the SINR"));
            for (int trial = 0; trial < 5; ++trial) {
                const double zz = zs * g.uniform(0.0, 3.0);
                if (f(zz) > sinr * (1.0 + 1e-12)) r.fail(tag(i, "QT value exceeds the SINR away from z*"));
            }
        }
    }
    return r;
}

PropertyReport prop_surrogate(int cases) {
    PropertyReport r{"L0 surrogate tangency and majorization"};
    for (int i = 0; i < cases; ++i, ++r.cases) {
        Gen g(case_seed(0x50e, i));
        const int n = g.integer(1, 8);
        const double budget = g.log_uniform(1e-2, 10.0);
        const double psi = g.log_uniform(1.0, 1000.0) / budget;
        std::vector<double> anchor(n), p(n);
        for (int k = 0; k < n; ++k) {
            anchor[k] = g.coin(0.2) ? 0.0 : g.uniform(0.0, budget);
            p[k] = g.coin(0.2) ? 0.0 : g.uniform(0.0, budget);
        }
        const double at_anchor = surrogate(anchor, anchor, psi);
        if (!rel_close(at_anchor, l0_surrogate(anchor, psi), 1e-12, 1e-14)) r.fail(tag(i, "no tangency at the anchor"));
        if (surrogate(p, anchor, psi) < l0_surrogate(p, psi) - 1e-12 * n) r.fail(tag(i, "linearization below"));
        // the exp surrogate itself never exceeds the count of active entries
        const int active = static_cast<int>(std::count_if(p.begin(), p.end(), [](double v) { return v > 0.0; }));
        if (l0_surrogate(p, psi) > active + 1e-12) r.fail(tag(i, "surrogate exceeds the L0 count"));
        for (int k = 0; k < n; ++k) {
            const double h = 1e-6 * std::max(anchor[k], budget * 1e-3);
            auto plus = anchor, minus = anchor;
            plus[k] += h;
            minus[k] = std::max(0.0, minus[k] - h);
            const double fd = (l0_surrogate(plus, psi) - l0_surrogate(minus, psi)) / (plus[k] - minus[k]);
            const double lin = (surrogate(plus, anchor, psi) - at_anchor) / h;
            if (!rel_close(fd, lin, 1e-4, 1e-9 * psi)) {
                std::ostringstream os;
                os << "gradient " << lin << " vs finite difference " << fd;
                r.fail(tag(i, os.str()));
            }
        }
    }
    return r;
}

PropertyReport prop_rzf_limit(int cases) {
    PropertyReport r{"RZF zero-forcing limit"};
    for (int i = 0; i < cases; ++i, ++r.cases) {
        Gen g(case_seed(0x27f, i));
        const int k = g.integer(1, 4), n = g.integer(k + 1, k + 12);
        const CMat h = g.cmatrix(n, k) * g.log_uniform(1e-6, 1.0);
        const double eps = 1e-13 * h.squaredNorm() / k;
        const CMat w = rzf(h, eps);
        if (w.rows() != n || w.cols() != k) {
            r.fail(tag(i, "precoder shape"));
            continue;
        }
        const CMat x = h.adjoint() * w;
        for (int c = 0; c < k; ++c) {
            if (std::abs(w.col(c).norm() - 1.0) > 1e-9) r.fail(tag(i, "column not unit norm"));
            const double own = std::norm(x(c, c));
            for (int o = 0; o < k; ++o)
                if (o != c && std::norm(x(o, c)) > 1e-6 * own) r.fail(tag(i, "residual cross gain above 1e-6"));
        }
        // large eps tends to matched filtering, still unit norm
        const CMat w_mf = rzf(h, 1e9 * h.squaredNorm());
        for (int c = 0; c < k; ++c) {
            const double cosang = std::abs(h.col(c).dot(w_mf.col(c))) / h.col(c).norm();
            if (std::abs(w_mf.col(c).norm() - 1.0) > 1e-9 || cosang < 1.0 - 1e-6)
                r.fail(tag(i, "large-eps limit is not matched filtering"));
        }
    }
    return r;
}

PropertyReport prop_bisection_monotone(int cases) {
    PropertyReport r{"access bisection monotone feasibility"};
    for (int i = 0; i < cases; ++i, ++r.cases) {
        Gen g(case_seed(0xb15, i));
        const Draw d = draw_assignment(g);
        const double noise = d.s.power.access_noise(d.s.band);
        const AccessPrecoders v = build_access_precoders(d.ch, d.a, noise, d.s.power.p_ap, 0.0);
        AccessFeasibilityProblem prob = build_access_problem(d.ch, d.a, v, noise, d.s.power.p_ap);
        const double ub = chi_upper(prob);
        if (!(ub > 0.0) || !std::isfinite(ub)) {
            r.fail(tag(i, "chi upper bound not positive and finite"));
            continue;
        }
        if (i % 2 == 0) {
            // soc_feasible over ascending levels: once infeasible, stays infeasible
            std::vector<double> levels{g.uniform(0.01, 0.2), g.uniform(0.2, 0.6), g.uniform(0.6, 0.98), 1.02};
            bool seen_infeasible = false;
            for (double f : levels) {
                const auto res = soc_feasible(prob, f * ub);
                if (res.solver_failure) continue;
                if (res.feasible && seen_infeasible) r.fail(tag(i, "feasible above an infeasible level"));
                if (res.feasible) {
                    const auto sinr = problem_sinr(prob, res.x);
                    const double m = *std::min_element(sinr.begin(), sinr.end());
                    if (m < f * ub * (1.0 - 1e-6)) r.fail(tag(i, "feasible point misses the SINR target"));
                }
                if (f > 1.0 && res.feasible) r.fail(tag(i, "feasible above the interference-free bound"));
                seen_infeasible |= !res.feasible;
            }
        } else {
            BisectionConfig cfg;
            cfg.tolerance = 0.05 * ub;
            const AccessSolution sol = solve_access_maxmin(prob, cfg);
            double max_ok = 0.0, min_bad = std::numeric_limits<double>::infinity();
            for (const auto& [chi, ok] : sol.trace) {
                if (ok)
                    max_ok = std::max(max_ok, chi);
                else
                    min_bad = std::min(min_bad, chi);
            }
            if (!(max_ok < min_bad)) r.fail(tag(i, "trace interleaves feasible and infeasible levels"));
            if (sol.chi_lower > sol.chi_upper * (1.0 + 1e-9)) r.fail(tag(i, "lower level above upper level"));
            if (sol.solver_min_sinr < sol.chi_lower * (1.0 - 1e-6)) r.fail(tag(i, "returned powers miss chi_lower"));
        }
    }
    return r;
}

std::vector<PropertyReport> run_all_properties(int cases) {
    return {prop_association(cases), prop_quadratic_transform(cases), prop_surrogate(cases), prop_rzf_limit(cases),
            prop_bisection_monotone(cases)};
}

}  // namespace mddthz::testing
