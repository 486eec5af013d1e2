#include "mddthz/scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

namespace mddthz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// grids with a defined sub-area layout, in the order their CAP nodes are appended
const std::vector<int>& static_grids() {
    static const std::vector<int> g{4, 8, 12, 16, 20};
    return g;
}

int sc_first_node(int n_aps, int grid) {
    int off = n_aps;
    for (int g : static_grids()) {
        if (g == grid) return off;
        off += g;
    }
    throw std::invalid_argument("unsupported grid size " + std::to_string(grid));
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

double min_of(const std::vector<double>& v) {
    double m = kInf;
    for (double x : v) m = std::min(m, x);
    return v.empty() ? 0.0 : m;
}

}  // namespace

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::mdd_ttwl: return "MDD-TTWL";
        case Scheme::tdd_ttwl: return "TDD-TTWL";
        case Scheme::cc_hy: return "CC-HY";
        case Scheme::ca_hy: return "CA-HY";
        case Scheme::ttw: return "TTW";
        case Scheme::stwl: return "STWL";
        case Scheme::stw: return "STW";
    }
    return "?";
}

Scheme parse_scheme(const std::string& name) {
    const std::string n = upper(name);
    for (Scheme s : all_schemes())
        if (to_string(s) == n) return s;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

const std::vector<Scheme>& all_schemes() {
    static const std::vector<Scheme> s{Scheme::mdd_ttwl, Scheme::tdd_ttwl, Scheme::cc_hy, Scheme::ca_hy,
                                       Scheme::ttw,      Scheme::stwl,     Scheme::stw};
    return s;
}

std::string to_string(BalanceStop s) {
    switch (s) {
        case BalanceStop::balanced: return "balanced";
        case BalanceStop::step_decayed: return "step_decayed";
        case BalanceStop::repeated: return "repeated";
        case BalanceStop::single_tier: return "single_tier";
    }
    return "?";
}

double MddSchedule::scale() const {
    if (n_subframes <= 0) return 1.0;
    return n_subframes / (n_subframes + 2.0 / 3.0);
}

// ---------------------------------------------------------------- TDD

double tdd_value(double tau_cc, double tau_ca, double tau_ad, double tau_gp, double c_cc, double c_ca, double c_ad) {
    const double d = tau_cc + tau_ca + 2.0 * tau_gp;
    double v = kInf;
    const double taus[3] = {tau_cc, tau_ca, tau_ad};
    const double rates[3] = {c_cc, c_ca, c_ad};
    for (int i = 0; i < 3; ++i) {
        if (std::isinf(rates[i])) continue;
        v = std::min(v, d > 0.0 ? taus[i] / d * rates[i] : 0.0);
    }
    return v;
}

TddSchedule solve_tdd_fractions(double c_cc, double c_ca, double c_ad, double tau_gp) {
    if (c_cc < 0.0 || c_ca < 0.0 || c_ad < 0.0) throw std::invalid_argument("solve_tdd_fractions: negative rate");
    if (!(tau_gp >= 0.0 && tau_gp < 1.0)) throw std::invalid_argument("solve_tdd_fractions: tau_gp outside [0, 1)");
    TddSchedule t;
    t.tau_gp = tau_gp;
    const double g = tau_gp;
    const double avail = 1.0 - g;
    if (c_cc == 0.0 || c_ca == 0.0 || c_ad == 0.0) {
        t.tau_cc = t.tau_ca = t.tau_ad = avail / 3.0;
        t.objective = 0.0;
        return t;
    }
    // Balanced fronthaul shares: tau_cc C_cc = tau_ca C_ca, s = tau_cc + tau_ca.
    const double h = (std::isinf(c_cc) ? 0.0 : 1.0 / c_cc) + (std::isinf(c_ca) ? 0.0 : 1.0 / c_ca);
    // Access is no longer limited by its own share once tau_ad reaches s + 2g.
    const double s_b = std::max(0.0, (1.0 - 3.0 * g) / 2.0);
    double s = 0.0;
    if (std::isinf(c_ad)) {
        s = avail;
    } else if (h == 0.0) {
        s = s_b;
    } else {
        // fronthaul term s / (h (s + 2g)) meets the access term C_ad (1 - g - s) / (s + 2g)
        const double s_x = c_ad * h * avail / (1.0 + c_ad * h);
        s = s_x >= s_b ? s_x : s_b;
    }
    if (h == 0.0) {
        t.tau_cc = t.tau_ca = s / 2.0;
    } else {
        t.tau_cc = std::isinf(c_cc) ? 0.0 : s / (c_cc * h);
        t.tau_ca = s - t.tau_cc;
    }
    t.tau_ad = std::max(0.0, std::min(avail - s, s + 2.0 * g));
    t.objective = tdd_value(t.tau_cc, t.tau_ca, t.tau_ad, g, c_cc, c_ca, c_ad);
    return t;
}

// ---------------------------------------------------------------- balancing

BalanceOutcome balance_sizes(int n_subcarriers, const LoopConfig& cfg, const TierEvaluator& eval) {
    if (n_subcarriers < 1) throw std::invalid_argument("balance_sizes: no subcarriers");
    const int m_step = cfg.m_step > 0 ? cfg.m_step : static_cast<int>(std::ceil(n_subcarriers / 8.0));
    BalanceOutcome out;
    int size = n_subcarriers / 2;
    std::set<int> seen;
    bool have_best = false;
    for (int j = 1;; ++j) {
        seen.insert(size);
        const auto [cc, ca] = eval(size);
        const double value = std::min(cc, ca);
        if (!have_best || value > out.best_value) {
            out.best_value = value;
            out.best_m_ca = size;
            have_best = true;
        }
        const double raw = std::pow(cfg.decay, j - 1) * m_step;
        out.steps.push_back({j, size, cc, ca, raw});
        out.final_raw_step = raw;
        if (std::isinf(cc) || std::isinf(ca)) {
            out.stop = BalanceStop::single_tier;
            out.final_gap = 0.0;
            out.kappa_prime = 0.0;
            break;
        }
        out.final_gap = std::abs(cc - ca);
        out.kappa_prime = cfg.kappa_prime_rel * value;
        if (out.final_gap <= out.kappa_prime) {
            out.stop = BalanceStop::balanced;
            break;
        }
        if (raw < 0.5) {
            out.stop = BalanceStop::step_decayed;
            break;
        }
        const int step = std::max(1, static_cast<int>(std::lround(raw)));
        const int next = std::clamp(cc > ca ? size + step : size - step, 0, n_subcarriers);
        // A revisit with a step of at least 1 can still land elsewhere later; below 1 it is a cycle.
        if (raw < 1.0 && seen.count(next)) {
            out.stop = BalanceStop::repeated;
            break;
        }
        size = next;
    }
    return out;
}

std::vector<int> sweep_cluster_counts(ClusteringMethod method, int n_devices, int u_max, int n_aps,
                                      const LoopConfig& cfg) {
    if (u_max < 1 || n_aps < 1) throw std::invalid_argument("sweep_cluster_counts: bad sizes");
    const int l_init = cfg.l_init > 0 ? cfg.l_init : std::max(1, (n_devices + u_max - 1) / u_max);
    const int l_step = std::max(1, cfg.l_step);
    std::vector<int> out;
    if (method == ClusteringMethod::dc) {
        for (int l = l_init; l <= n_aps; l += l_step) out.push_back(l);
    } else {
        for (int g : static_grids())
            if (g >= l_init && g <= n_aps) out.push_back(g);
    }
    return out;
}

ChannelSet build_trial_channels(const NetworkScenario& s, ClusteringMethod method) {
    if (method != ClusteringMethod::sc) return build_channels(s);
    std::vector<Vec3> nodes;
    std::vector<std::uint64_t> keys;
    for (int g : static_grids()) {
        const auto pos = sc_cap_positions(s.area_x, s.area_y, g, s.cap_height);
        for (int k = 0; k < g; ++k) {
            nodes.push_back(pos[k]);
            keys.push_back(sc_node_key(g, k));
        }
    }
    return build_channels(s, nodes, keys);
}

double TierResult::min_rate() const {
    if (!present) return kInf;
    return solution.unbounded ? kInf : solution.min_rate;
}

// ---------------------------------------------------------------- evaluator

struct TrialEvaluator::LState {
    int key = 0;
    bool ok = false;
    std::string note;
    ClusterAssignment a;
    std::vector<int> clusters;  // clusters that serve devices
    bool ca_present = false;
    std::vector<Vec> ca_gains;
    AccessPrecoders v;
    AccessSolution access;
    std::vector<double> c_ad;
    double c_ad_min = 0.0;
    double solver_ad = 0.0;
    bool bounds = false;
    double ub_cc = kInf;
    double ub_ca = kInf;
    std::unique_ptr<TierResult> cc_full;
    std::unique_ptr<TierResult> ca_full;
    std::unique_ptr<MddAtL> mdd;
};

struct TrialEvaluator::MddAtL {
    BalanceOutcome balance;
    std::map<int, std::pair<TierResult, TierResult>> by_size;
};

TrialEvaluator::TrialEvaluator(const NetworkScenario& s, const ChannelSet& ch, SchedulerConfig cfg)
    : s_(s), ch_(ch), cfg_(std::move(cfg)) {
    n_sc_ = s.band.n_fronthaul_subcarriers;
    noise_fh_ = s.power.fronthaul_noise(s.band);
    si_ = s.power.si_variance(s.band);
    noise_ad_ = s.power.access_noise(s.band);
    b_sc_ = s.band.fronthaul_subcarrier_bw();
}

TrialEvaluator::~TrialEvaluator() = default;

TrialEvaluator::LState* TrialEvaluator::state(int key) {
    auto it = states_.find(key);
    if (it != states_.end()) return it->second.get();
    auto st = std::make_unique<LState>();
    st->key = key;
    const int q = s_.n_aps();
    try {
        const LosGains gains = los_gains_from(ch_);
        ClusterAssignment a;
        if (key == 0 || cfg_.method == ClusteringMethod::dc) {
            a = cluster_dc(s_.ap_positions, gains, key == 0 ? q : key);
        } else if (cfg_.method == ClusteringMethod::sc) {
            a = cluster_sc(s_.ap_positions, s_.area_x, s_.area_y, key, sc_first_node(q, key));
            // empty sub-areas have no APs to serve anyone
            ClusterAssignment kept;
            for (int l = 0; l < a.n_clusters(); ++l)
                if (!a.clusters[l].empty()) {
                    kept.clusters.push_back(a.clusters[l]);
                    kept.cap_node.push_back(a.cap_node[l]);
                }
            kept.served_devices.assign(kept.clusters.size(), {});
            a = kept;
        } else {
            a = cluster_idsc(s_.ap_positions, s_.area_x, s_.area_y, key, gains);
        }
        a = select_devices(a, cluster_device_gains(a, ch_), s_.u_max, s_.c_max);
        st->a = a;
        for (int l = 0; l < a.n_clusters(); ++l)
            if (!a.served_devices[l].empty()) st->clusters.push_back(l);
        st->ca_gains = ca_subcarrier_gains(a, ch_);
        for (int l : st->clusters)
            if (!fronthaul_targets(a, l).empty()) st->ca_present = true;
        st->v = build_access_precoders(ch_, a, noise_ad_, s_.power.p_ap, cfg_.eps_access);
        st->access = solve_access(ch_, a, st->v, noise_ad_, s_.power.p_ap, cfg_.access);
        PowerAllocation alloc;
        alloc.ad_power = st->access.ad_power;
        st->c_ad = rate_ad(ch_, a, st->v, alloc, noise_ad_, s_.band.access_bandwidth_hz);
        st->c_ad_min = min_of(st->c_ad);
        st->solver_ad = s_.band.access_bandwidth_hz * std::log2(1.0 + st->access.solver_min_sinr);
        st->ok = true;
    } catch (const DeviceSelectionError& e) {
        st->note = e.what();
        skipped_.push_back("L=" + std::to_string(key == 0 ? q : key) + ": " + e.what());
    }
    auto* raw = st.get();
    states_[key] = std::move(st);
    return raw;
}

void TrialEvaluator::ensure_bounds(LState& st) {
    if (st.bounds) return;
    st.bounds = true;
    std::vector<int> all(n_sc_);
    for (int m = 0; m < n_sc_; ++m) all[m] = m;
    const double eps_cc = rzf_regularization(cfg_.eps_fronthaul, noise_fh_, static_cast<int>(st.clusters.size()),
                                             s_.power.p_cpu);
    const auto f = build_cc_precoders(ch_, st.a, st.clusters, all, eps_cc);
    st.ub_cc = fronthaul_upper_bound(make_cc_problem(ch_, st.a, st.clusters, all, f, noise_fh_, 0.0, s_.power.p_cpu, b_sc_));
    if (st.ca_present) {
        int max_t = 1;
        for (int l : st.clusters) max_t = std::max(max_t, static_cast<int>(fronthaul_targets(st.a, l).size()));
        const auto w = build_ca_precoders(ch_, st.a, st.clusters, all,
                                          rzf_regularization(cfg_.eps_fronthaul, noise_fh_, max_t, s_.power.p_ap));
        st.ub_ca = fronthaul_upper_bound(make_ca_problem(ch_, st.a, st.clusters, all, w, noise_fh_, s_.power.p_ap, b_sc_));
    }
}

TierResult TrialEvaluator::solve_cc(LState& st, const std::vector<int>& subcarriers, double si,
                                    const std::string& scheme) {
    TierResult t;
    t.present = !st.clusters.empty();
    t.subcarriers = subcarriers;
    t.si = si;
    if (!t.present) return t;
    const double eps = rzf_regularization(cfg_.eps_fronthaul, noise_fh_, static_cast<int>(st.clusters.size()),
                                          s_.power.p_cpu);
    t.precoders = build_cc_precoders(ch_, st.a, st.clusters, subcarriers, eps);
    t.problem = make_cc_problem(ch_, st.a, st.clusters, subcarriers, t.precoders, noise_fh_, si, s_.power.p_cpu, b_sc_);
    t.solution = solve_fronthaul_maxmin(t.problem, cfg_.fronthaul);
    solver_trace_.push_back({scheme, "CC", st.a.n_clusters(), static_cast<int>(subcarriers.size()), t.solution.trace});
    return t;
}

TierResult TrialEvaluator::solve_ca(LState& st, const std::vector<int>& subcarriers, const std::string& scheme) {
    TierResult t;
    t.present = st.ca_present;
    t.subcarriers = subcarriers;
    if (!t.present) return t;
    int max_t = 1;
    for (int l : st.clusters) max_t = std::max(max_t, static_cast<int>(fronthaul_targets(st.a, l).size()));
    const double eps = rzf_regularization(cfg_.eps_fronthaul, noise_fh_, max_t, s_.power.p_ap);
    t.precoders = build_ca_precoders(ch_, st.a, st.clusters, subcarriers, eps);
    t.problem = make_ca_problem(ch_, st.a, st.clusters, subcarriers, t.precoders, noise_fh_, s_.power.p_ap, b_sc_);
    t.solution = solve_fronthaul_maxmin(t.problem, cfg_.fronthaul);
    solver_trace_.push_back({scheme, "CA", st.a.n_clusters(), static_cast<int>(subcarriers.size()), t.solution.trace});
    return t;
}

const TierResult& TrialEvaluator::full_cc(LState& st, const std::string& scheme) {
    if (!st.cc_full) {
        std::vector<int> all(n_sc_);
        for (int m = 0; m < n_sc_; ++m) all[m] = m;
        st.cc_full = std::make_unique<TierResult>(solve_cc(st, all, 0.0, scheme));
    }
    return *st.cc_full;
}

const TierResult& TrialEvaluator::full_ca(LState& st, const std::string& scheme) {
    if (!st.ca_full) {
        std::vector<int> all(n_sc_);
        for (int m = 0; m < n_sc_; ++m) all[m] = m;
        st.ca_full = std::make_unique<TierResult>(solve_ca(st, all, scheme));
    }
    return *st.ca_full;
}

TrialEvaluator::MddAtL& TrialEvaluator::mdd_at(LState& st) {
    if (st.mdd) return *st.mdd;
    st.mdd = std::make_unique<MddAtL>();
    MddAtL& r = *st.mdd;
    const std::string name = to_string(Scheme::mdd_ttwl);
    auto evaluate = [&](int size) -> std::pair<double, double> {
        auto it = r.by_size.find(size);
        if (it == r.by_size.end()) {
            SubcarrierPartition part;
            if (st.ca_present) {
                part = assign_subcarriers(st.ca_gains, n_sc_, size);
            } else {
                for (int m = 0; m < n_sc_; ++m) part.m_cc.push_back(m);
            }
            TierResult cc;
            if (!st.ca_present && st.cc_full) {
                // no relaying CAP means no SI, so this is the cached full-band solve
                cc = *st.cc_full;
                cc.si = si_;
            } else {
                cc = solve_cc(st, part.m_cc, si_, name);
            }
            TierResult ca = solve_ca(st, part.m_ca, name);
            it = r.by_size.emplace(size, std::make_pair(std::move(cc), std::move(ca))).first;
        }
        return {it->second.first.min_rate(), it->second.second.min_rate()};
    };
    if (!st.ca_present) {
        // no CAP relays at this L: the whole band feeds the CAPs
        const auto [cc, ca] = evaluate(0);
        r.balance.best_m_ca = 0;
        r.balance.best_value = cc;
        r.balance.steps.push_back({1, 0, cc, ca, 0.0});
        r.balance.stop = BalanceStop::single_tier;
    } else {
        r.balance = balance_sizes(n_sc_, cfg_.loop, evaluate);
    }
    for (const auto& stp : r.balance.steps)
        sweep_trace_.push_back({name, st.a.n_clusters(), stp.iteration, stp.m_ca_size, stp.c_cc, stp.c_ca,
                                st.c_ad_min, std::min({stp.c_cc, stp.c_ca, st.c_ad_min}), false});
    return r;
}

double TrialEvaluator::mdd_value(LState& st) {
    MddSchedule sch;
    sch.n_subframes = cfg_.n_subframes;
    return sch.scale() * std::min(st.c_ad_min, mdd_at(st).balance.best_value);
}

int TrialEvaluator::sweep(const std::string& scheme, const std::function<double(LState&)>& bound,
                          const std::function<double(LState&)>& value,
                          const std::function<double(LState&)>& refine) {
    const auto keys = sweep_cluster_counts(cfg_.method, s_.n_devices(), s_.u_max, s_.n_aps(), cfg_.loop);
    struct Cand {
        int key;
        double bound;
    };
    std::vector<Cand> cands;
    for (int k : keys) {
        LState* st = state(k);
        if (!st->ok) continue;
        cands.push_back({k, bound(*st)});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        return x.bound != y.bound ? x.bound > y.bound : x.key < y.key;
    });
    int best_key = -1;
    double best = -kInf;
    for (const auto& c : cands) {
        LState& st = *state(c.key);
        // ties go to the smaller key, as in an exhaustive ascending sweep
        auto beaten = [&](double b) { return best_key >= 0 && (b < best || (b == best && c.key > best_key)); };
        if (cfg_.prune && beaten(c.bound)) {
            sweep_trace_.push_back({scheme, st.a.n_clusters(), 0, 0, kInf, kInf, st.c_ad_min, c.bound, true});
            continue;
        }
        if (cfg_.prune && refine && best_key >= 0) {
            const double b = refine(st);
            if (beaten(b)) {
                sweep_trace_.push_back({scheme, st.a.n_clusters(), 0, 0, kInf, kInf, st.c_ad_min, b, true});
                continue;
            }
        }
        const double v = value(st);
        if (v > best || (v == best && c.key < best_key)) {
            best = v;
            best_key = c.key;
        }
    }
    return best_key;
}

SchemeOutcome TrialEvaluator::empty_outcome(Scheme scheme, const std::string& note) const {
    SchemeOutcome o;
    o.report.scheme = to_string(scheme);
    const int n_u = s_.n_devices();
    o.report.c_cc.assign(n_u, LinkRate::absent());
    o.report.c_ca.assign(n_u, LinkRate::absent());
    o.report.c_ad.assign(n_u, LinkRate::finite(0.0));
    end_to_end(o.report);
    o.report.flagged = true;
    o.report.note = note;
    return o;
}

SchemeOutcome TrialEvaluator::finish(Scheme scheme, LState& st, const TierResult* cc, const TierResult* ca,
                                     const FrameInfo& frame) {
    SchemeOutcome o;
    RateReport& r = o.report;
    r.scheme = to_string(scheme);
    r.n_clusters = st.a.n_clusters();
    r.frame = frame;
    const int n_u = s_.n_devices();
    PowerAllocation& alloc = o.allocation;
    alloc.ad_power = st.access.ad_power;
    if (cc && cc->present) store_cc(cc->problem, cc->solution, alloc);
    if (ca && ca->present) store_ca(ca->problem, ca->solution, alloc);

    if (!cc) {
        r.c_cc.assign(n_u, LinkRate::wired());
    } else if (!cc->present) {
        r.c_cc.assign(n_u, LinkRate::absent());
    } else {
        auto rc = rate_cc(ch_, st.a, st.clusters, cc->subcarriers, cc->precoders, alloc, noise_fh_, cc->si, b_sc_);
        r.c_cc = rc.per_device;
        r.cc_pairs = rc.per_pair;
        r.m_cc_size = static_cast<int>(cc->subcarriers.size());
    }
    if (!ca) {
        r.c_ca.assign(n_u, LinkRate::wired());
    } else if (!ca->present) {
        r.c_ca.assign(n_u, LinkRate::absent());
    } else {
        auto rc = rate_ca(ch_, st.a, st.clusters, ca->subcarriers, ca->precoders, alloc, noise_fh_, b_sc_);
        r.c_ca = rc.per_device;
        r.ca_links = rc.per_link;
        r.m_ca_size = static_cast<int>(ca->subcarriers.size());
    }
    r.c_ad.clear();
    for (double x : st.c_ad) r.c_ad.push_back(LinkRate::finite(x));
    end_to_end(r);

    o.solver_cc = cc ? cc->min_rate() : kInf;
    o.solver_ca = ca ? ca->min_rate() : kInf;
    o.solver_ad = st.solver_ad;
    o.violations = check_allocation(alloc, st.a, &st.v, s_.power.p_cpu, s_.power.p_ap, 1e-6);
    std::string note;
    if (st.access.warning) note += "access solver warning;";
    if (cc && cc->present && cc->solution.warning) note += "CC solver warning;";
    if (ca && ca->present && ca->solution.warning) note += "CA solver warning;";
    if (!o.violations.empty()) {
        r.flagged = true;
        note += "constraint violation;";
    }
    r.note = note;
    return o;
}

SchemeOutcome TrialEvaluator::run_mdd_at(int n_clusters) {
    const int key = (n_clusters == s_.n_aps() && cfg_.method != ClusteringMethod::dc) ? 0 : n_clusters;
    LState& st = *state(key);
    if (!st.ok) return empty_outcome(Scheme::mdd_ttwl, st.note);
    MddAtL& m = mdd_at(st);
    const auto& pair = m.by_size.at(m.balance.best_m_ca);
    FrameInfo frame;
    frame.kind = "mdd";
    MddSchedule sch;
    sch.n_subframes = cfg_.n_subframes;
    frame.scale_cc = frame.scale_ca = frame.scale_ad = sch.scale();
    SchemeOutcome o = finish(Scheme::mdd_ttwl, st, &pair.first, &pair.second, frame);
    sch.n_clusters = st.a.n_clusters();
    sch.partition.m_cc = pair.first.subcarriers;
    sch.partition.m_ca = pair.second.subcarriers;
    o.mdd = sch;
    o.balance = m.balance;
    return o;
}

SchemeOutcome TrialEvaluator::run(Scheme scheme) {
    const std::string name = to_string(scheme);
    FrameInfo parallel;
    parallel.kind = "parallel";

    switch (scheme) {
        case Scheme::stw:
        case Scheme::stwl: {
            const int key = cfg_.method == ClusteringMethod::dc ? s_.n_aps() : 0;
            LState& st = *state(key);
            if (!st.ok) return empty_outcome(scheme, st.note);
            if (scheme == Scheme::stw) {
                sweep_trace_.push_back({name, st.a.n_clusters(), 0, 0, kInf, kInf, st.c_ad_min, st.c_ad_min, false});
                return finish(scheme, st, nullptr, nullptr, parallel);
            }
            const TierResult& cc = full_cc(st, name);
            TierResult absent;  // every cluster is one AP: no second hop
            sweep_trace_.push_back({name, st.a.n_clusters(), 0, 0, cc.min_rate(), kInf, st.c_ad_min,
                                    std::min(cc.min_rate(), st.c_ad_min), false});
            return finish(scheme, st, &cc, &absent, parallel);
        }
        case Scheme::ttw: {
            const int k = sweep(name, [](LState& st) { return st.c_ad_min; },
                                [&](LState& st) {
                                    sweep_trace_.push_back({name, st.a.n_clusters(), 0, 0, kInf, kInf, st.c_ad_min,
                                                            st.c_ad_min, false});
                                    return st.c_ad_min;
                                });
            if (k < 0) return empty_outcome(scheme, "no feasible cluster count");
            return finish(scheme, *state(k), nullptr, nullptr, parallel);
        }
        case Scheme::cc_hy: {
            const int k = sweep(
                name,
                [&](LState& st) {
                    ensure_bounds(st);
                    return std::min(st.c_ad_min, st.ub_cc);
                },
                [&](LState& st) {
                    const double c = full_cc(st, name).min_rate();
                    const double v = std::min(st.c_ad_min, c);
                    sweep_trace_.push_back({name, st.a.n_clusters(), 0, 0, c, kInf, st.c_ad_min, v, false});
                    return v;
                });
            if (k < 0) return empty_outcome(scheme, "no feasible cluster count");
            LState& st = *state(k);
            return finish(scheme, st, &full_cc(st, name), nullptr, parallel);
        }
        case Scheme::ca_hy: {
            const int k = sweep(
                name,
                [&](LState& st) {
                    ensure_bounds(st);
                    return std::min(st.c_ad_min, st.ub_ca);
                },
                [&](LState& st) {
                    const double c = full_ca(st, name).min_rate();
                    const double v = std::min(st.c_ad_min, c);
                    sweep_trace_.push_back({name, st.a.n_clusters(), 0, n_sc_, kInf, c, st.c_ad_min, v, false});
                    return v;
                });
            if (k < 0) return empty_outcome(scheme, "no feasible cluster count");
            LState& st = *state(k);
            return finish(scheme, st, nullptr, &full_ca(st, name), parallel);
        }
        case Scheme::tdd_ttwl: {
            const double g = cfg_.tau_gp;
            const int k = sweep(
                name,
                [&](LState& st) {
                    ensure_bounds(st);
                    return solve_tdd_fractions(st.ub_cc, st.ub_ca, st.c_ad_min, g).objective;
                },
                [&](LState& st) {
                    const double c1 = full_cc(st, name).min_rate();
                    const double c2 = full_ca(st, name).min_rate();
                    const double v = solve_tdd_fractions(c1, c2, st.c_ad_min, g).objective;
                    sweep_trace_.push_back({name, st.a.n_clusters(), 0, n_sc_, c1, c2, st.c_ad_min, v, false});
                    return v;
                });
            if (k < 0) return empty_outcome(scheme, "no feasible cluster count");
            LState& st = *state(k);
            const TierResult& cc = full_cc(st, name);
            const TierResult& ca = full_ca(st, name);
            const TddSchedule t = solve_tdd_fractions(cc.min_rate(), ca.min_rate(), st.c_ad_min, g);
            FrameInfo frame;
            frame.kind = "tdd";
            frame.tau_cc = t.tau_cc;
            frame.tau_ca = t.tau_ca;
            frame.tau_ad = t.tau_ad;
            frame.tau_gp = g;
            const double d = t.tau_cc + t.tau_ca + 2.0 * g;
            frame.scale_cc = d > 0.0 ? t.tau_cc / d : 0.0;
            frame.scale_ca = d > 0.0 ? t.tau_ca / d : 0.0;
            frame.scale_ad = d > 0.0 ? t.tau_ad / d : 0.0;
            SchemeOutcome o = finish(scheme, st, &cc, &ca, frame);
            o.tdd = t;
            return o;
        }
        case Scheme::mdd_ttwl: {
            std::vector<BalanceOutcome> balances;
            const int k = sweep(
                name,
                [&](LState& st) {
                    ensure_bounds(st);
                    return std::min({st.c_ad_min, st.ub_cc, st.ub_ca});
                },
                [&](LState& st) {
                    const double v = mdd_value(st);
                    balances.push_back(st.mdd->balance);
                    return v;
                },
                [&](LState& st) {
                    // single-tier full-band solves; shared with TDD and the hybrids
                    const double cc = full_cc(st, name).min_rate();
                    const double ca = st.ca_present ? full_ca(st, name).min_rate() : kInf;
                    return std::min({st.c_ad_min, cc, ca});
                });
            if (k < 0) return empty_outcome(scheme, "no feasible cluster count");
            SchemeOutcome o = run_mdd_at(k);
            o.all_balances = balances;
            return o;
        }
    }
    throw std::logic_error("unhandled scheme");
}

// ---------------------------------------------------------------- traces

namespace {

void put_rate(std::ostream& os, double v) {
    if (!std::isinf(v)) os << std::setprecision(10) << v;  // unbounded stays empty
}

}  // namespace

void write_sweep_trace_csv(std::ostream& os, int trial, const std::vector<SweepTraceRow>& rows, bool header) {
    if (header) os << "trial,scheme,n_clusters,iteration,m_ca,c_cc,c_ca,c_ad,objective,pruned\n";
    for (const auto& r : rows) {
        os << trial << ',' << r.scheme << ',' << r.n_clusters << ',' << r.iteration << ',' << r.m_ca_size << ',';
        put_rate(os, r.c_cc);
        os << ',';
        put_rate(os, r.c_ca);
        os << ',';
        put_rate(os, r.c_ad);
        os << ',';
        put_rate(os, r.objective);
        os << ',' << (r.pruned ? 1 : 0) << '\n';
    }
}

void write_solver_trace_csv(std::ostream& os, int trial, const std::vector<SolverTrace>& traces, bool header) {
    if (header) os << "trial,scheme,tier,n_clusters,m_size,iteration,chi_lower,chi_upper,feasible\n";
    for (const auto& t : traces)
        for (const auto& r : t.rows)
            os << trial << ',' << t.scheme << ',' << t.tier << ',' << t.n_clusters << ',' << t.m_size << ','
               << r.iteration << ',' << std::setprecision(12) << r.chi_lower << ',' << r.chi_upper << ','
               << (r.feasible ? 1 : 0) << '\n';
}

}  // namespace mddthz
