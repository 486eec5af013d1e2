#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "mddthz/association.hpp"
#include "mddthz/channel.hpp"
#include "mddthz/precoding.hpp"
#include "mddthz/scenario.hpp"
#include "mddthz/scheduler.hpp"

namespace mddthz::testing {

long double path_gain_db_reference(long double f, long double d, long double k_abs) {
    const long double c = 299792458.0L;
    const long double pi = 3.141592653589793238462643383279502884L;
    const long double spread_db = 20.0L * std::log10(c / (4.0L * pi * f * d));
    const long double absorb_db = -10.0L * k_abs * d * std::log10(std::exp(1.0L));
    return spread_db + absorb_db;
}

FronthaulProblem small_cc_instance(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.n_devices = 2;
    const NetworkScenario s = generate_scenario(cfg, seed);
    const ChannelSet ch = build_trial_channels(s, ClusteringMethod::dc);
    ClusterAssignment a = cluster_dc(s.ap_positions, los_gains_from(ch), 2);
    a = select_devices(a, cluster_device_gains(a, ch), s.u_max, s.c_max);
    std::vector<int> clusters;
    for (int l = 0; l < a.n_clusters(); ++l)
        if (!a.served_devices[l].empty()) clusters.push_back(l);
    const std::vector<int> m_cc{0, ch.n_subcarriers / 2};
    const double noise = s.power.fronthaul_noise(s.band);
    const double eps = rzf_regularization(0.0, noise, static_cast<int>(clusters.size()), s.power.p_cpu);
    const PrecoderSet f = build_cc_precoders(ch, a, clusters, m_cc, eps);
    return make_cc_problem(ch, a, clusters, m_cc, f, noise, 0.0, s.power.p_cpu, s.band.fronthaul_subcarrier_bw());
}

double grid_optimum(const FronthaulProblem& p, int levels) {
    const int nj = static_cast<int>(p.subcarriers.size());
    struct Slot {
        int t, j;
        const std::vector<int>* devs;
    };
    std::vector<Slot> slots;
    for (int t = 0; t < p.n_targets(); ++t)
        if (!p.target_devices[t].empty())
            for (int j = 0; j < nj; ++j) slots.push_back({t, j, &p.target_devices[t]});
    std::vector<double> used(p.budgets.size(), 0.0);
    StreamPower power;
    double best = 0.0;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == slots.size()) {
            const auto rates = fronthaul_row_rates(p, power);
            double m = std::numeric_limits<double>::infinity();
            for (const auto& [k, r] : rates) m = std::min(m, r);
            best = std::max(best, m);
            return;
        }
        const Slot& s = slots[i];
        const int g = p.group[s.t];
        rec(i + 1);  // slot left empty
        for (int u : *s.devs)
            for (int lv = 1; lv < levels; ++lv) {
                const double pw = p.budgets[g] * lv / (levels - 1);
                if (used[g] + pw > p.budgets[g] * (1.0 + 1e-12)) break;
                used[g] += pw;
                power[{s.t, u, s.j}] = pw;
                rec(i + 1);
                power.erase({s.t, u, s.j});
                used[g] -= pw;
            }
    };
    rec(0);
    return best;
}

double tdd_grid_best(double c_cc, double c_ca, double c_ad, double tau_gp, int n) {
    const double avail = 1.0 - tau_gp;
    double best = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j)
            for (int k = 0; i + j + k <= n; ++k) {
                const double tcc = avail * i / n, tca = avail * j / n, tad = avail * k / n;
                if (tad > tcc + tca + 2.0 * tau_gp + 1e-15) continue;
                best = std::max(best, tdd_value(tcc, tca, tad, tau_gp, c_cc, c_ca, c_ad));
            }
    return best;
}

}  // namespace mddthz::testing
