#include "mddthz/fronthaul.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "mddthz/convex.hpp"

namespace mddthz {

int FronthaulProblem::n_rows() const {
    int n = 0;
    for (const auto& d : target_devices) n += static_cast<int>(d.size());
    return n;
}

FronthaulProblem make_cc_problem(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                                 const std::vector<int>& m_cc, const PrecoderSet& f, double noise, double si_variance,
                                 double p_cpu, double subcarrier_bw) {
    FronthaulProblem p;
    p.budgets = {p_cpu};
    p.subcarriers = m_cc;
    p.subcarrier_bw = subcarrier_bw;
    for (int l : clusters) {
        p.target_ids.push_back(l);
        p.target_cluster.push_back(l);
        p.target_devices.push_back(a.served_devices[l]);
        p.group.push_back(0);
    }
    const int n = p.n_targets();
    p.floor = Vec::Constant(n, noise);
    for (int r = 0; r < n; ++r)
        if (!fronthaul_targets(a, clusters[r]).empty()) p.floor[r] += si_variance;
    for (int m : m_cc) {
        Mat g(n, n);
        for (int r = 0; r < n; ++r) {
            const CVec& h = ch.cc(a.cap_node[clusters[r]], m);
            for (int t = 0; t < n; ++t) g(r, t) = std::norm(h.dot(f.at(clusters[t], m)));
        }
        p.gains.push_back(std::move(g));
    }
    return p;
}

FronthaulProblem make_ca_problem(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                                 const std::vector<int>& m_ca, const PrecoderSet& w, double noise, double p_ap,
                                 double subcarrier_bw) {
    FronthaulProblem p;
    p.subcarriers = m_ca;
    p.subcarrier_bw = subcarrier_bw;
    for (int l : clusters) {
        const auto targets = fronthaul_targets(a, l);
        if (targets.empty()) continue;
        const int grp = static_cast<int>(p.budgets.size());
        p.budgets.push_back(p_ap);
        for (int q : targets) {
            p.target_ids.push_back(q);
            p.target_cluster.push_back(l);
            p.target_devices.push_back(a.served_devices[l]);
            p.group.push_back(grp);
        }
    }
    const int n = p.n_targets();
    p.floor = Vec::Constant(n, noise);
    for (int m : m_ca) {
        Mat g(n, n);
        for (int r = 0; r < n; ++r)
            for (int t = 0; t < n; ++t) {
                // signal from the CAP of the transmitting target's cluster to receiver r
                const CVec& h = ch.ca(a.cap_node[p.target_cluster[t]], p.target_ids[r], m);
                g(r, t) = std::norm(h.dot(w.at(p.target_ids[t], m)));
            }
        p.gains.push_back(std::move(g));
    }
    return p;
}

double l0_surrogate(const std::vector<double>& p, double psi) {
    double s = 0.0;
    for (double v : p) s += 1.0 - std::exp(-psi * v);
    return s;
}

double surrogate(const std::vector<double>& p, const std::vector<double>& anchor, double psi) {
    double s = l0_surrogate(anchor, psi);
    for (std::size_t i = 0; i < p.size(); ++i) s += psi * std::exp(-psi * anchor[i]) * (p[i] - anchor[i]);
    return s;
}

namespace {

double stream_interference(const FronthaulProblem& p, const StreamPower& power, int r, int j) {
    double s = 0.0;
    for (const auto& [k, v] : power) {
        const auto [t, u, jj] = k;
        if (jj != j || t == r || v <= 0.0) continue;
        s += p.gains[j](r, t) * v;
    }
    return s;
}

}  // namespace

std::map<Key3, double> qt_update(const FronthaulProblem& p, const StreamPower& power) {
    std::map<Key3, double> z;
    for (const auto& [k, v] : power) {
        const auto [t, u, j] = k;
        const double a = p.gains[j](t, t) * std::max(v, 0.0);
        const double b = stream_interference(p, power, t, j) + p.floor[t];
        z[k] = std::sqrt(a) / b;
    }
    return z;
}

std::map<Key3, int> recover_gamma(const StreamPower& power) {
    // strongest positive stream of every (target, subcarrier) slot
    std::map<std::pair<int, int>, std::pair<double, Key3>> lead;
    for (const auto& [k, v] : power) {
        if (!(v > 0.0)) continue;
        const std::pair<int, int> slot{std::get<0>(k), std::get<2>(k)};
        auto it = lead.find(slot);
        if (it == lead.end() || v > it->second.first) lead[slot] = {v, k};
    }
    std::map<Key3, int> g;
    for (const auto& [k, v] : power) {
        const std::pair<int, int> slot{std::get<0>(k), std::get<2>(k)};
        const auto it = lead.find(slot);
        const bool leader = it != lead.end() && it->second.second == k;
        g[k] = leader ? 1 : 0;
    }
    return g;
}

std::map<std::pair<int, int>, double> fronthaul_row_rates(const FronthaulProblem& p, const StreamPower& power) {
    std::map<std::pair<int, int>, double> rates;
    for (int t = 0; t < p.n_targets(); ++t)
        for (int u : p.target_devices[t]) rates[{t, u}] = 0.0;
    for (const auto& [k, v] : power) {
        const auto [t, u, j] = k;
        if (v <= 0.0) continue;
        const double sinr = p.gains[j](t, t) * v / (stream_interference(p, power, t, j) + p.floor[t]);
        rates[{t, u}] += p.subcarrier_bw * std::log2(1.0 + sinr);
    }
    return rates;
}

namespace {

double water_filling(std::vector<double> snr, double budget) {
    snr.erase(std::remove_if(snr.begin(), snr.end(), [](double s) { return !(s > 0.0); }), snr.end());
    if (snr.empty()) return 0.0;
    std::sort(snr.rbegin(), snr.rend());
    double inv_sum = 0.0, level = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < snr.size(); ++i) {
        const double cand = (budget + inv_sum + 1.0 / snr[i]) / static_cast<double>(i + 1);
        if (cand <= 1.0 / snr[i]) break;
        inv_sum += 1.0 / snr[i];
        level = cand;
        k = i + 1;
    }
    double bits = 0.0;
    for (std::size_t i = 0; i < k; ++i) bits += std::log2(level * snr[i]);
    return bits;
}

}  // namespace

double fronthaul_upper_bound(const FronthaulProblem& p) {
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < p.n_targets(); ++t) {
        if (p.target_devices[t].empty()) continue;
        std::vector<double> snr;
        for (const auto& g : p.gains) snr.push_back(g(t, t) / p.floor[t]);
        best = std::min(best, p.subcarrier_bw * water_filling(snr, p.budgets[p.group[t]]));
    }
    return best;
}

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// One QT term 1 + 2 z sqrt(G x_v) - z^2 (sum G_k x_k + 1) in normalized units.
struct QtTerm {
    int var = 0;
    double g = 0.0;
    double z = 0.0;
    std::vector<std::pair<int, double>> interf;
};

// Row of log2 QT terms; concave in the normalized powers.
class QtRow : public convex::ConcaveFunction {
public:
    explicit QtRow(std::vector<QtTerm> terms) : terms_(std::move(terms)) {}

    bool value_grad(const Vec& x, double& value, Vec* grad) const override {
        value = 0.0;
        if (grad) grad->setZero(x.size());
        for (const auto& t : terms_) {
            const double xv = x[t.var];
            if (xv < 0.0) return false;
            double b = 1.0;
            for (const auto& [k, gk] : t.interf) b += gk * x[k];
            const double root = std::sqrt(t.g * xv);
            const double inner = 1.0 + 2.0 * t.z * root - t.z * t.z * b;
            if (!(inner > 0.0)) return false;
            value += std::log(inner) / kLn2;
            if (grad) {
                if (!(xv > 0.0)) return false;
                const double w = 1.0 / (inner * kLn2);
                (*grad)[t.var] += w * t.z * std::sqrt(t.g / xv);
                for (const auto& [k, gk] : t.interf) (*grad)[k] -= w * t.z * t.z * gk;
            }
        }
        return std::isfinite(value);
    }

    void add_neg_hessian(const Vec& x, double weight, Mat& h) const override {
        for (const auto& t : terms_) {
            const double xv = x[t.var];
            double b = 1.0;
            for (const auto& [k, gk] : t.interf) b += gk * x[k];
            const double inner = 1.0 + 2.0 * t.z * std::sqrt(t.g * xv) - t.z * t.z * b;
            const double w = weight / kLn2;
            // curvature of the square root
            h(t.var, t.var) += w * t.z * std::sqrt(t.g) / (2.0 * xv * std::sqrt(xv) * inner);
            // outer product of the inner gradient
            const double w2 = w / (inner * inner);
            const double dv = t.z * std::sqrt(t.g / xv);
            h(t.var, t.var) += w2 * dv * dv;
            for (const auto& [k, gk] : t.interf) {
                const double dk = -t.z * t.z * gk;
                h(t.var, k) += w2 * dv * dk;
                h(k, t.var) += w2 * dv * dk;
                for (const auto& [k2, gk2] : t.interf) h(k, k2) += w2 * dk * (-t.z * t.z * gk2);
            }
        }
    }

private:
    std::vector<QtTerm> terms_;
};

// Working state of one solve: the active streams and their normalized gains.
struct Engine {
    const FronthaulProblem& p;
    const SurrogateConfig& cfg;
    double p_ref = 1.0;
    std::vector<Key3> streams;     // (t, u, j)
    std::map<Key3, int> index;
    std::vector<Mat> gn;           // gains * p_ref / floor(receiver)

    Engine(const FronthaulProblem& prob, const SurrogateConfig& c) : p(prob), cfg(c) {
        p_ref = *std::max_element(p.budgets.begin(), p.budgets.end());
        for (const auto& g : p.gains) {
            Mat n = g * p_ref;
            for (int r = 0; r < n.rows(); ++r) n.row(r) /= p.floor[r];
            gn.push_back(std::move(n));
        }
    }

    // One device per (target, subcarrier), rotating through the target's devices.
    Vec init_round_robin() {
        std::vector<int> per_group(p.budgets.size(), 0);
        for (int t = 0; t < p.n_targets(); ++t)
            if (!p.target_devices[t].empty()) ++per_group[p.group[t]];
        const int nj = static_cast<int>(p.subcarriers.size());
        std::vector<double> x0;
        for (int t = 0; t < p.n_targets(); ++t) {
            const auto& devs = p.target_devices[t];
            if (devs.empty()) continue;
            const double share = 0.999 * p.budgets[p.group[t]] / (static_cast<double>(nj) * per_group[p.group[t]]);
            for (int j = 0; j < nj; ++j) {
                const int u = devs[j % devs.size()];
                index[{t, u, j}] = static_cast<int>(streams.size());
                streams.push_back({t, u, j});
                x0.push_back(share / p_ref);
            }
        }
        return Eigen::Map<Vec>(x0.data(), static_cast<Eigen::Index>(x0.size()));
    }

    int n() const { return static_cast<int>(streams.size()); }

    Vec qt_z(const Vec& x) const {
        Vec z(n());
        for (int i = 0; i < n(); ++i) {
            const auto [t, u, j] = streams[i];
            double b = 1.0;
            for (int k = 0; k < n(); ++k) {
                const auto [t2, u2, j2] = streams[k];
                if (j2 == j && t2 != t) b += gn[j](t, t2) * x[k];
            }
            z[i] = std::sqrt(gn[j](t, t) * std::max(x[i], 0.0)) / b;
        }
        return z;
    }

    std::vector<std::shared_ptr<QtRow>> rows(const Vec& z) const {
        std::vector<std::shared_ptr<QtRow>> out;
        for (int t = 0; t < p.n_targets(); ++t)
            for (int u : p.target_devices[t]) {
                std::vector<QtTerm> terms;
                for (int i = 0; i < n(); ++i) {
                    const auto [ti, ui, j] = streams[i];
                    if (ti != t || ui != u || z[i] <= 0.0) continue;
                    QtTerm term;
                    term.var = i;
                    term.g = gn[j](t, t);
                    term.z = z[i];
                    for (int k = 0; k < n(); ++k) {
                        const auto [t2, u2, j2] = streams[k];
                        if (j2 == j && t2 != t && gn[j](t, t2) > 0.0) term.interf.push_back({k, gn[j](t, t2)});
                    }
                    terms.push_back(std::move(term));
                }
                out.push_back(std::make_shared<QtRow>(std::move(terms)));
            }
        return out;
    }

    void hard_rows(const Vec& anchor, convex::Problem& cp) const {
        for (int i = 0; i < n(); ++i) cp.linear.push_back({{{i, -1.0}}, 0.0});
        std::vector<std::vector<std::pair<int, double>>> budget(p.budgets.size());
        for (int i = 0; i < n(); ++i) budget[p.group[std::get<0>(streams[i])]].push_back({i, 1.0});
        for (std::size_t g = 0; g < budget.size(); ++g)
            if (!budget[g].empty()) cp.linear.push_back({budget[g], p.budgets[g] / p_ref});
        // linearized L0 surrogate where a (target, subcarrier) carries several streams
        std::map<std::pair<int, int>, std::vector<int>> groups;
        for (int i = 0; i < n(); ++i) groups[{std::get<0>(streams[i]), std::get<2>(streams[i])}].push_back(i);
        for (const auto& [key, members] : groups) {
            if (members.size() < 2) continue;
            const double psi = cfg.psi_scaled * p_ref / p.budgets[p.group[key.first]];
            convex::LinearRow row;
            double rhs = 1.0;
            for (int i : members) {
                const double slope = psi * std::exp(-psi * anchor[i]);
                rhs -= 1.0 - std::exp(-psi * anchor[i]);
                rhs += slope * anchor[i];
                row.a.push_back({i, slope});
            }
            row.b = rhs;
            cp.linear.push_back(row);
        }
    }

    StreamPower to_power(const Vec& x) const {
        StreamPower out;
        for (int i = 0; i < n(); ++i) out[streams[i]] = std::max(x[i], 0.0) * p_ref;
        return out;
    }
};

}  // namespace

FronthaulSolution solve_fronthaul_maxmin(const FronthaulProblem& p, const SurrogateConfig& cfg) {
    FronthaulSolution sol;
    if (p.n_rows() == 0) {
        sol.unbounded = true;
        return sol;
    }
    Engine eng(p, cfg);
    Vec anchor = eng.init_round_robin();
    StreamPower best = eng.to_power(anchor);
    const double u0 = fronthaul_upper_bound(p);
    sol.upper_initial = u0;
    const double b = p.subcarrier_bw;

    if (eng.n() > 0 && u0 > 0.0 && std::isfinite(u0)) {
        double kappa = cfg.kappa_rel * u0;
        double chi_com = cfg.chi_com_factor * kappa;
        double scale = 0.0;  // best attainable level seen so far
        double lo = 0.0, hi = u0, comp = 0.0;
        Vec z = eng.qt_z(anchor);
        bool cached = false;
        double chi_max = 0.0;
        Vec x_mm;

        convex::Options mm_opt;
        mm_opt.gap_tol = 1e-2;
        mm_opt.max_newton = 300;

        for (int step = 0; step < cfg.max_bisection; ++step) {
            const double chi = 0.5 * (lo + hi);
            if (!cached) {
                convex::Problem cp;
                cp.n = eng.n();
                cp.cost = Vec::Zero(cp.n);
                eng.hard_rows(anchor, cp);
                for (auto& r : eng.rows(z)) cp.concave.push_back({r, 0.0, true, 1.0});
                auto mm = convex::phase_one(cp, anchor, convex::PhaseOneMode::max_margin, mm_opt);
                if (mm.status == convex::Status::optimal || mm.status == convex::Status::feasible) {
                    chi_max = -mm.slack * b;
                    x_mm = mm.x;
                    scale = std::max(scale, chi_max);
                } else {
                    chi_max = -std::numeric_limits<double>::infinity();
                    sol.warning = true;
                }
                cached = true;
            }
            ++sol.bisection_steps;
            // tolerance tracks the attainable level; u0 ignores interference
            kappa = cfg.kappa_rel * std::max({lo, scale, 1e-9 * u0});
            chi_com = cfg.chi_com_factor * kappa;
            const bool feasible = chi < chi_max - 1e-12 * u0;
            if (feasible) {
                // x_mm certifies chi_max, so accept the certified level rather than the midpoint
                lo = std::max(chi, chi_max);
                hi = std::max(hi, lo);
                // max-margin point is the next QT anchor
                const Vec x_new = x_mm;
                ++sol.accepted;
                best = eng.to_power(x_new);
                anchor = x_new;
                z = eng.qt_z(x_new);
                cached = false;
                sol.trace.push_back({step, lo, hi, true});
                if (hi - lo < kappa) {
                    if (comp + chi_com <= cfg.max_compensation * u0) {
                        hi += chi_com;
                        comp += chi_com;
                    } else {
                        break;
                    }
                }
                if (sol.accepted >= cfg.max_outer) {
                    sol.warning = true;
                    break;
                }
            } else {
                hi = chi;
                sol.trace.push_back({step, lo, hi, false});
                if (hi - lo < kappa) break;
            }
            if (step + 1 == cfg.max_bisection) sol.warning = true;
        }
        sol.chi_lower = lo;
    }

    sol.gamma = recover_gamma(best);
    for (auto& [k, v] : best)
        if (!sol.gamma[k]) v = 0.0;
    sol.power = best;
    sol.row_rates = fronthaul_row_rates(p, sol.power);
    sol.min_rate = std::numeric_limits<double>::infinity();
    for (const auto& [k, r] : sol.row_rates) sol.min_rate = std::min(sol.min_rate, r);
    return sol;
}

void store_cc(const FronthaulProblem& p, const FronthaulSolution& s, PowerAllocation& alloc) {
    for (const auto& [k, v] : s.power) {
        const auto [t, u, j] = k;
        const Key3 key{p.target_ids[t], u, p.subcarriers[j]};
        alloc.cc_power[key] = v;
        alloc.cc_gamma[key] = s.gamma.count(k) ? s.gamma.at(k) : 0;
    }
}

void store_ca(const FronthaulProblem& p, const FronthaulSolution& s, PowerAllocation& alloc) {
    for (const auto& [k, v] : s.power) {
        const auto [t, u, j] = k;
        const Key4 key{p.target_cluster[t], p.target_ids[t], u, p.subcarriers[j]};
        alloc.ca_power[key] = v;
        alloc.ca_gamma[key] = s.gamma.count(k) ? s.gamma.at(k) : 0;
    }
}

void write_trace_csv(std::ostream& os, const std::vector<FronthaulTraceRow>& trace) {
    os << "iteration,chi_lower,chi_upper,feasible\n";
    for (const auto& r : trace)
        os << r.iteration << ',' << std::setprecision(12) << r.chi_lower << ',' << r.chi_upper << ','
           << (r.feasible ? 1 : 0) << '\n';
}

}  // namespace mddthz
