#include "mddthz/linkrates.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mddthz {

double LinkRate::value() const {
    if (unbounded()) throw std::logic_error("value() on an unbounded link rate");
    return value_;
}

std::string LinkRate::kind_name() const {
    switch (kind_) {
        case Kind::wireless: return "wireless";
        case Kind::wired: return "wired";
        case Kind::absent: return "absent";
    }
    return "?";
}

LinkRate min_rate(const LinkRate& a, const LinkRate& b) {
    if (a.unbounded() && b.unbounded()) return (a.kind() == LinkRate::Kind::wired) ? a : b;
    if (a.unbounded()) return b;
    if (b.unbounded()) return a;
    return a.value() <= b.value() ? a : b;
}

namespace {

template <class Map, class Key>
double lookup(const Map& m, const Key& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
}

template <class Map, class Key>
int lookup_gamma(const Map& m, const Key& k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
}

}  // namespace

CcRates rate_cc(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                const std::vector<int>& m_cc, const PrecoderSet& f, const PowerAllocation& alloc, double noise,
                double si_variance, double subcarrier_bw) {
    CcRates r;
    const int n_u = static_cast<int>(a.serving_map.size());
    for (int l : clusters) {
        // only a CAP that also transmits CAP-to-AP fronthaul hears its own leakage
        const double si = fronthaul_targets(a, l).empty() ? 0.0 : si_variance;
        for (int u : a.served_devices[l]) {
            double total = 0.0;
            for (int m : m_cc) {
                const CVec& h = ch.cc(a.cap_node[l], m);
                const double g = lookup_gamma(alloc.cc_gamma, Key3{l, u, m});
                const double p = lookup(alloc.cc_power, Key3{l, u, m});
                const double signal = g * p * std::norm(h.dot(f.at(l, m)));
                if (signal <= 0.0) continue;
                double interf = 0.0;
                for (int l2 : clusters) {
                    if (l2 == l) continue;
                    const double cross = std::norm(h.dot(f.at(l2, m)));
                    for (int u2 : a.served_devices[l2])
                        interf += lookup_gamma(alloc.cc_gamma, Key3{l2, u2, m}) *
                                  lookup(alloc.cc_power, Key3{l2, u2, m}) * cross;
                }
                total += std::log2(1.0 + signal / (interf + si + noise));
            }
            r.per_pair[{l, u}] = subcarrier_bw * total;
        }
    }
    r.per_device.assign(n_u, LinkRate::absent());
    for (int u = 0; u < n_u; ++u)
        for (int l : a.serving_map[u]) {
            auto it = r.per_pair.find({l, u});
            if (it != r.per_pair.end()) r.per_device[u] = min_rate(r.per_device[u], LinkRate::finite(it->second));
        }
    return r;
}

CaRates rate_ca(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                const std::vector<int>& m_ca, const PrecoderSet& w, const PowerAllocation& alloc, double noise,
                double subcarrier_bw) {
    CaRates r;
    const int n_u = static_cast<int>(a.serving_map.size());
    std::vector<std::vector<int>> targets(a.n_clusters());
    for (int l : clusters) targets[l] = fronthaul_targets(a, l);

    // received power at AP q on subcarrier m from everything cluster l2 sends
    auto cluster_power_at = [&](int l2, int q, int m, int skip_target) {
        const CVec& h = ch.ca(a.cap_node[l2], q, m);
        double s = 0.0;
        for (int q2 : targets[l2]) {
            if (q2 == skip_target) continue;
            const double cross = std::norm(h.dot(w.at(q2, m)));
            for (int u2 : a.served_devices[l2])
                s += lookup_gamma(alloc.ca_gamma, Key4{l2, q2, u2, m}) * lookup(alloc.ca_power, Key4{l2, q2, u2, m}) *
                     cross;
        }
        return s;
    };

    for (int l : clusters) {
        for (int q : targets[l]) {
            for (int u : a.served_devices[l]) {
                double total = 0.0;
                for (int m : m_ca) {
                    const CVec& h = ch.ca(a.cap_node[l], q, m);
                    const double g = lookup_gamma(alloc.ca_gamma, Key4{l, q, u, m});
                    const double p = lookup(alloc.ca_power, Key4{l, q, u, m});
                    const double signal = g * p * std::norm(h.dot(w.at(q, m)));
                    if (signal <= 0.0) continue;
                    double interf = cluster_power_at(l, q, m, q);
                    for (int l2 : clusters)
                        if (l2 != l) interf += cluster_power_at(l2, q, m, -1);
                    total += std::log2(1.0 + signal / (interf + noise));
                }
                r.per_link[{l, q, u}] = subcarrier_bw * total;
            }
        }
    }
    r.per_device.assign(n_u, LinkRate::absent());
    for (int u = 0; u < n_u; ++u)
        for (int l : a.serving_map[u])
            for (int q : targets[l]) {
                auto it = r.per_link.find({l, q, u});
                if (it != r.per_link.end()) r.per_device[u] = min_rate(r.per_device[u], LinkRate::finite(it->second));
            }
    return r;
}

std::vector<double> sinr_ad(const ChannelSet& ch, const ClusterAssignment& a, const AccessPrecoders& v,
                            const PowerAllocation& alloc, double noise) {
    const int n_u = static_cast<int>(a.serving_map.size());
    std::vector<double> out(n_u, 0.0);
    // effective scalar gain from cluster l's stream for device u2 to device u
    auto stream_gain = [&](int l, int u2, int u) {
        cplx s = 0.0;
        const auto& nodes = v.nodes[l];
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double p = lookup(alloc.ad_power, Key3{l, nodes[k], u2});
            if (p <= 0.0) continue;
            s += std::sqrt(p) * ch.ad(nodes[k], u).dot(v.block(l, u2, static_cast<int>(k)));
        }
        return s;
    };
    for (int u = 0; u < n_u; ++u) {
        const auto& g = a.serving_map[u];
        cplx desired = 0.0;
        double intra = 0.0;
        for (int l : g) {
            desired += stream_gain(l, u, u);
            for (int u2 : a.served_devices[l])
                if (u2 != u) intra += std::norm(stream_gain(l, u2, u));
        }
        double inter = 0.0;
        for (int l = 0; l < a.n_clusters(); ++l) {
            if (std::find(g.begin(), g.end(), l) != g.end()) continue;
            const auto& nodes = v.nodes[l];
            for (std::size_t k = 0; k < nodes.size(); ++k)
                for (int u2 : a.served_devices[l]) {
                    const double p = lookup(alloc.ad_power, Key3{l, nodes[k], u2});
                    if (p <= 0.0) continue;
                    inter += p * std::norm(ch.ad(nodes[k], u).dot(v.block(l, u2, static_cast<int>(k))));
                }
        }
        out[u] = std::norm(desired) / (intra + inter + noise);
    }
    return out;
}

std::vector<double> rate_ad(const ChannelSet& ch, const ClusterAssignment& a, const AccessPrecoders& v,
                            const PowerAllocation& alloc, double noise, double bandwidth) {
    auto s = sinr_ad(ch, a, v, alloc, noise);
    for (auto& x : s) x = bandwidth * std::log2(1.0 + x);
    return s;
}

void end_to_end(RateReport& r) {
    const std::size_t n = r.c_ad.size();
    if (r.c_cc.size() != n || r.c_ca.size() != n) throw std::invalid_argument("end_to_end: link vectors differ in size");
    r.c_end.assign(n, 0.0);
    double obj = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < n; ++u) {
        double e = std::numeric_limits<double>::infinity();
        if (!r.c_cc[u].unbounded()) e = std::min(e, r.frame.scale_cc * r.c_cc[u].value());
        if (!r.c_ca[u].unbounded()) e = std::min(e, r.frame.scale_ca * r.c_ca[u].value());
        if (!r.c_ad[u].unbounded()) e = std::min(e, r.frame.scale_ad * r.c_ad[u].value());
        r.c_end[u] = e;
        obj = std::min(obj, e);
    }
    r.objective = n ? obj : 0.0;
}

std::vector<std::string> check_allocation(const PowerAllocation& alloc, const ClusterAssignment& a,
                                          const AccessPrecoders* v, double p_cpu, double p_ap, double tol) {
    std::vector<std::string> out;
    double cpu = 0.0;
    std::map<std::pair<int, int>, int> cc_active;  // (l, m) -> active count
    for (const auto& [k, p] : alloc.cc_power) {
        if (p < 0.0) out.push_back("negative CPU power");
        const int g = lookup_gamma(alloc.cc_gamma, k);
        cpu += g * p;
        if (g) ++cc_active[{std::get<0>(k), std::get<2>(k)}];
    }
    for (const auto& [k, g] : alloc.cc_gamma)
        if (g && !alloc.cc_power.count(k)) ++cc_active[{std::get<0>(k), std::get<2>(k)}];
    if (cpu > p_cpu * (1.0 + tol)) out.push_back("CPU budget exceeded");
    for (const auto& [k, c] : cc_active)
        if (c > 1) out.push_back("CPU-to-CAP subcarrier shared by several devices in one cluster");

    std::map<int, double> cluster_sum;
    std::map<Key3, int> ca_active;  // (l, q, m)
    for (const auto& [k, p] : alloc.ca_power) {
        if (p < 0.0) out.push_back("negative CAP power");
        const int g = lookup_gamma(alloc.ca_gamma, k);
        cluster_sum[std::get<0>(k)] += g * p;
        if (g) ++ca_active[{std::get<0>(k), std::get<1>(k), std::get<3>(k)}];
    }
    for (const auto& [l, s] : cluster_sum)
        if (s > p_ap * (1.0 + tol)) out.push_back("CAP budget exceeded in cluster " + std::to_string(l));
    for (const auto& [k, c] : ca_active)
        if (c > 1) out.push_back("CAP-to-AP subcarrier shared by several devices at one AP");

    std::map<std::pair<int, int>, double> ap_sum;  // (l, node)
    for (const auto& [k, p] : alloc.ad_power) {
        if (p < 0.0) out.push_back("negative AP power");
        const auto [l, node, u] = k;
        double norm2 = 1.0;
        if (v) {
            const auto& nodes = v->nodes[l];
            auto pos = std::find(nodes.begin(), nodes.end(), node) - nodes.begin();
            norm2 = v->block(l, u, static_cast<int>(pos)).squaredNorm();
        }
        ap_sum[{l, node}] += p * norm2;
    }
    for (const auto& [k, s] : ap_sum)
        if (s > p_ap * (1.0 + tol)) out.push_back("AP budget exceeded at node " + std::to_string(k.second));
    (void)a;
    return out;
}

void write_rate_csv_header(std::ostream& os) {
    os << "trial,scheme,device,n_clusters,m_cc,m_ca,c_cc_kind,c_cc,c_ca_kind,c_ca,c_ad,c_end,channel_hash\n";
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

void put_rate(std::ostream& os, const LinkRate& r) {
    os << r.kind_name() << ',';
    if (!r.unbounded()) os << num(r.value());
}

}  // namespace

void write_rate_csv(std::ostream& os, int trial, const RateReport& r, std::uint64_t channel_hash) {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << channel_hash;
    for (std::size_t u = 0; u < r.c_end.size(); ++u) {
        os << trial << ',' << r.scheme << ',' << u << ',' << r.n_clusters << ',' << r.m_cc_size << ',' << r.m_ca_size
           << ',';
        put_rate(os, r.c_cc[u]);
        os << ',';
        put_rate(os, r.c_ca[u]);
        os << ',';
        os << (r.c_ad[u].unbounded() ? std::string() : num(r.c_ad[u].value())) << ',';
        os << num(r.c_end[u]) << ',' << hash.str() << '\n';
    }
}

}  // namespace mddthz
