#include "mddthz/access.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mddthz {

AccessFeasibilityProblem build_access_problem(const ChannelSet& ch, const ClusterAssignment& a,
                                              const AccessPrecoders& v, double noise, double p_ap) {
    AccessFeasibilityProblem pr;
    pr.p_ap = p_ap;
    std::map<Key3, int> index;  // (l, k, u)
    for (int l = 0; l < a.n_clusters(); ++l) {
        if (a.served_devices[l].empty()) continue;
        const auto& nodes = v.nodes[l];
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            std::vector<int> group;
            for (int u : a.served_devices[l]) {
                const int i = static_cast<int>(pr.vars.size());
                index[{l, static_cast<int>(k), u}] = i;
                pr.vars.push_back({l, nodes[k], u, v.block(l, u, static_cast<int>(k)).squaredNorm()});
                group.push_back(i);
            }
            pr.budget_groups.push_back(group);
        }
    }
    const double scale = std::sqrt(p_ap / noise);
    const int n_u = static_cast<int>(a.serving_map.size());
    for (int u = 0; u < n_u; ++u) {
        AccessDeviceRow row;
        row.device = u;
        const auto& g = a.serving_map[u];
        auto gain = [&](int l, int k, int u2) {
            return scale * ch.ad(v.nodes[l][k], u).dot(v.block(l, u2, k));
        };
        for (int l : g) {
            const int nk = static_cast<int>(v.nodes[l].size());
            for (int k = 0; k < nk; ++k) row.desired.push_back({index.at({l, k, u}), gain(l, k, u)});
            for (int u2 : a.served_devices[l]) {
                if (u2 == u) continue;
                std::vector<std::pair<int, cplx>> term;
                for (int k = 0; k < nk; ++k) term.push_back({index.at({l, k, u2}), gain(l, k, u2)});
                row.intra.push_back(std::move(term));
            }
        }
        for (int l = 0; l < a.n_clusters(); ++l) {
            if (std::find(g.begin(), g.end(), l) != g.end()) continue;
            const int nk = static_cast<int>(v.nodes[l].size());
            for (int k = 0; k < nk; ++k)
                for (int u2 : a.served_devices[l]) row.inter.push_back({index.at({l, k, u2}), std::abs(gain(l, k, u2))});
        }
        pr.rows.push_back(std::move(row));
    }
    chi_upper(pr);  // fixes the desired-term phases
    return pr;
}

double max_coherent_sum(const std::vector<cplx>& g, const std::vector<double>& bound, double* angle) {
    const std::size_t n = g.size();
    std::vector<double> cand;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(g[i]) == 0.0 || bound[i] <= 0.0) continue;
        const double a = std::arg(g[i]);
        cand.push_back(std::remainder(a + kPi / 2, 2 * kPi));
        cand.push_back(std::remainder(a - kPi / 2, 2 * kPi));
    }
    if (angle) *angle = 0.0;
    if (cand.empty()) return 0.0;
    std::sort(cand.begin(), cand.end());
    double best = 0.0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
        const double lo = cand[j];
        const double hi = (j + 1 < cand.size()) ? cand[j + 1] : cand[0] + 2 * kPi;
        const double mid = 0.5 * (lo + hi);
        const cplx dir = std::polar(1.0, -mid);
        cplx s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if ((g[i] * dir).real() > 0.0) s += bound[i] * g[i];
        if (std::abs(s) > best) {
            best = std::abs(s);
            if (angle) *angle = std::arg(s);
        }
    }
    return best;
}

namespace {

std::vector<double> amplitude_bounds(const AccessFeasibilityProblem& pr) {
    std::vector<double> b(pr.vars.size(), 0.0);
    for (std::size_t i = 0; i < pr.vars.size(); ++i)
        b[i] = pr.vars[i].v_norm2 > 0.0 ? 1.0 / std::sqrt(pr.vars[i].v_norm2) : 0.0;
    return b;
}

double row_upper(const AccessDeviceRow& row, const std::vector<double>& bounds, double* angle) {
    std::vector<cplx> g;
    std::vector<double> b;
    for (const auto& [i, c] : row.desired) {
        g.push_back(c);
        b.push_back(bounds[i]);
    }
    const double m = max_coherent_sum(g, b, angle);
    return m * m;
}

}  // namespace

double chi_upper(AccessFeasibilityProblem& problem) {
    const auto bounds = amplitude_bounds(problem);
    double best = std::numeric_limits<double>::infinity();
    for (auto& row : problem.rows) best = std::min(best, row_upper(row, bounds, &row.phase));
    return problem.rows.empty() ? 0.0 : best;
}

double chi_upper(const AccessFeasibilityProblem& problem) {
    const auto bounds = amplitude_bounds(problem);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : problem.rows) best = std::min(best, row_upper(row, bounds, nullptr));
    return problem.rows.empty() ? 0.0 : best;
}

namespace {

void add_hard_rows(const AccessFeasibilityProblem& pr, convex::Problem& cp) {
    const int n = static_cast<int>(pr.vars.size());
    for (int i = 0; i < n; ++i) cp.linear.push_back({{{i, -1.0}}, 0.0});
    for (const auto& grp : pr.budget_groups) {
        convex::SocRow s;
        s.vars = grp;
        const int k = static_cast<int>(grp.size());
        s.A = Mat::Zero(k, k);
        for (int j = 0; j < k; ++j) s.A(j, j) = std::sqrt(pr.vars[grp[j]].v_norm2);
        s.c = Vec::Zero(k);
        s.d = Vec::Zero(k);
        s.e = 1.0;
        cp.socs.push_back(std::move(s));
    }
}

convex::SocRow sinr_row(const AccessFeasibilityProblem& pr, const AccessDeviceRow& row, double chi, bool soft) {
    const int n = static_cast<int>(pr.vars.size());
    const int m = 2 * static_cast<int>(row.intra.size()) + static_cast<int>(row.inter.size()) + 1;
    convex::SocRow s;
    s.vars.resize(n);
    for (int i = 0; i < n; ++i) s.vars[i] = i;
    s.A = Mat::Zero(m, n);
    s.c = Vec::Zero(m);
    int r = 0;
    for (const auto& term : row.intra) {
        for (const auto& [i, c] : term) {
            s.A(r, i) += c.real();
            s.A(r + 1, i) += c.imag();
        }
        r += 2;
    }
    for (const auto& [i, c] : row.inter) s.A(r++, i) += c;
    s.c[r] = 1.0;
    s.d = Vec::Zero(n);
    const cplx rot = std::polar(1.0, -row.phase);
    const double inv = 1.0 / std::sqrt(chi);
    for (const auto& [i, c] : row.desired) s.d[i] += (c * rot).real() * inv;
    s.e = 0.0;
    s.soft = soft;
    return s;
}

Vec default_start(const AccessFeasibilityProblem& pr) {
    Vec x = Vec::Zero(pr.vars.size());
    for (const auto& grp : pr.budget_groups)
        for (int i : grp) {
            const double n2 = std::max(pr.vars[i].v_norm2, 1e-300);
            x[i] = 0.5 / std::sqrt(n2 * static_cast<double>(grp.size()));
        }
    return x;
}

}  // namespace

AccessFeasibility soc_feasible(const AccessFeasibilityProblem& problem, double chi, const Vec* x0) {
    AccessFeasibility out;
    const int n = static_cast<int>(problem.vars.size());
    if (chi <= 0.0) {
        out.feasible = true;
        out.x = Vec::Zero(n);
        return out;
    }
    convex::Problem cp;
    cp.n = n;
    cp.cost = Vec::Zero(n);
    add_hard_rows(problem, cp);
    for (const auto& row : problem.rows) cp.socs.push_back(sinr_row(problem, row, chi, true));
    Vec start = x0 ? *x0 : default_start(problem);
    convex::Options opt;
    opt.gap_tol = 1e-9;
    auto r = convex::phase_one(cp, start, convex::PhaseOneMode::feasible_stop, opt);
    if (r.status == convex::Status::failed && x0) r = convex::phase_one(cp, default_start(problem), convex::PhaseOneMode::feasible_stop, opt);
    out.feasible = r.status == convex::Status::feasible;
    out.solver_failure = r.status == convex::Status::failed;
    out.x = r.x;
    return out;
}

Vec min_norm_solution(const AccessFeasibilityProblem& problem, double chi, const Vec& x_start) {
    const int n = static_cast<int>(problem.vars.size());
    if (chi <= 0.0) return x_start;
    std::map<std::pair<int, int>, std::vector<int>> pairs;  // (l, u) -> vars
    for (int i = 0; i < n; ++i) pairs[{problem.vars[i].cluster, problem.vars[i].device}].push_back(i);
    const int np = static_cast<int>(pairs.size());
    convex::Problem cp;
    cp.n = n + np;
    cp.cost = Vec::Zero(cp.n);
    cp.cost.tail(np).setOnes();
    add_hard_rows(problem, cp);
    for (const auto& row : problem.rows) cp.socs.push_back(sinr_row(problem, row, chi, false));
    Vec y(cp.n);
    y.head(n) = x_start;
    int j = n;
    for (const auto& [key, idx] : pairs) {
        convex::SocRow s;
        s.vars = idx;
        s.vars.push_back(j);
        const int k = static_cast<int>(idx.size());
        s.A = Mat::Zero(k, k + 1);
        s.A.leftCols(k).setIdentity();
        s.c = Vec::Zero(k);
        s.d = Vec::Zero(k + 1);
        s.d[k] = 1.0;
        cp.socs.push_back(std::move(s));
        double nrm = 0.0;
        for (int i : idx) nrm += x_start[i] * x_start[i];
        y[j] = 1.1 * std::sqrt(nrm) + 1e-3;
        ++j;
    }
    convex::Options opt;
    opt.gap_tol = 1e-8;
    auto r = convex::minimize(cp, y, opt);
    if (r.status != convex::Status::optimal) return x_start;
    return r.x.head(n);
}

std::vector<double> problem_sinr(const AccessFeasibilityProblem& problem, const Vec& x) {
    std::vector<double> out;
    for (const auto& row : problem.rows) {
        cplx d = 0.0;
        for (const auto& [i, g] : row.desired) d += g * x[i];
        double den = 1.0;
        for (const auto& term : row.intra) {
            cplx t = 0.0;
            for (const auto& [i, g] : term) t += g * x[i];
            den += std::norm(t);
        }
        for (const auto& [i, g] : row.inter) den += g * g * x[i] * x[i];
        out.push_back(std::norm(d) / den);
    }
    return out;
}

AccessSolution solve_access_maxmin(const AccessFeasibilityProblem& problem, const BisectionConfig& cfg) {
    AccessSolution sol;
    const int n = static_cast<int>(problem.vars.size());
    sol.chi_upper = chi_upper(problem);
    Vec best = Vec::Zero(n);
    double lo = 0.0, hi = sol.chi_upper;
    if (hi > 0.0) {
        const double eps = cfg.tolerance;
        int iters = hi > eps ? static_cast<int>(std::ceil(std::log2(hi / eps) - 1e-12)) : 0;
        if (iters > cfg.max_iters) {
            iters = cfg.max_iters;
            sol.warning = true;
        }
        bool have = false;
        for (int it = 0; it < iters; ++it) {
            const double mid = 0.5 * (lo + hi);
            auto f = soc_feasible(problem, mid, have ? &best : nullptr);
            sol.trace.push_back({mid, f.feasible});
            if (f.solver_failure) sol.warning = true;
            if (f.feasible) {
                lo = mid;
                best = f.x;
                have = true;
            } else {
                hi = mid;
            }
            ++sol.iterations;
        }
        if (have) best = min_norm_solution(problem, lo, best);
    }
    sol.chi_lower = lo;
    const auto own = problem_sinr(problem, best);
    sol.solver_min_sinr = own.empty() ? 0.0 : *std::min_element(own.begin(), own.end());
    for (int i = 0; i < n; ++i) {
        const auto& v = problem.vars[i];
        sol.ad_power[{v.cluster, v.node, v.device}] = best[i] * best[i] * problem.p_ap;
    }
    return sol;
}

AccessSolution solve_access(const ChannelSet& ch, const ClusterAssignment& a, const AccessPrecoders& v, double noise,
                            double p_ap, const BisectionConfig& cfg) {
    const auto problem = build_access_problem(ch, a, v, noise, p_ap);
    auto sol = solve_access_maxmin(problem, cfg);
    PowerAllocation alloc;
    alloc.ad_power = sol.ad_power;
    sol.sinr = sinr_ad(ch, a, v, alloc, noise);
    sol.min_sinr = sol.sinr.empty() ? 0.0 : *std::min_element(sol.sinr.begin(), sol.sinr.end());
    return sol;
}

}  // namespace mddthz
