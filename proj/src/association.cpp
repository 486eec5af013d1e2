#include "mddthz/association.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace mddthz {

ClusteringMethod parse_clustering_method(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "dc") return ClusteringMethod::dc;
    if (s == "sc") return ClusteringMethod::sc;
    if (s == "idsc") return ClusteringMethod::idsc;
    throw std::invalid_argument("unknown clustering method: " + name);
}

std::string to_string(ClusteringMethod m) {
    switch (m) {
        case ClusteringMethod::dc: return "DC";
        case ClusteringMethod::sc: return "SC";
        case ClusteringMethod::idsc: return "IDSC";
    }
    return "?";
}

std::vector<int> fronthaul_targets(const ClusterAssignment& a, int l) {
    std::vector<int> out;
    for (int q : a.clusters[l])
        if (q != a.cap_node[l]) out.push_back(q);
    return out;
}

std::vector<int> access_nodes(const ClusterAssignment& a, int l) {
    std::vector<int> t = fronthaul_targets(a, l);
    if (t.empty()) t.push_back(a.cap_node[l]);
    return t;
}

LosGains los_gains_from(const ChannelSet& channels) {
    LosGains g;
    g.cpu = channels.cpu_los_amplitude.head(channels.n_aps);
    g.pair = channels.node_los_amplitude.topLeftCorner(channels.n_aps, channels.n_aps);
    return g;
}

namespace {

double dist2d(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double assign_cost(const Mat& d, const std::vector<int>& medoids, std::vector<int>* label) {
    const int n = static_cast<int>(d.rows());
    double cost = 0.0;
    if (label) label->assign(n, 0);
    for (int i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t k = 0; k < medoids.size(); ++k) {
            const double v = d(i, medoids[k]);
            if (v < best) {
                best = v;
                arg = static_cast<int>(k);
            }
        }
        cost += best;
        if (label) (*label)[i] = arg;
    }
    return cost;
}

}  // namespace

KMedoidsResult kmedoids_pam(const std::vector<std::array<double, 2>>& points, int k) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n) throw std::invalid_argument("kmedoids_pam: k must lie in [1, n]");
    Mat d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = dist2d(points[i], points[j]);

    KMedoidsResult r;
    // BUILD: greedy additions, each the largest cost reduction
    std::vector<char> is_medoid(n, 0);
    while (static_cast<int>(r.medoids.size()) < k) {
        double best = std::numeric_limits<double>::infinity();
        int arg = -1;
        for (int c = 0; c < n; ++c) {
            if (is_medoid[c]) continue;
            auto trial = r.medoids;
            trial.push_back(c);
            const double cost = assign_cost(d, trial, nullptr);
            if (cost < best - 1e-12) {
                best = cost;
                arg = c;
            }
        }
        r.medoids.push_back(arg);
        is_medoid[arg] = 1;
    }
    double cost = assign_cost(d, r.medoids, nullptr);
    r.cost_history.push_back(cost);

    // SWAP: best improving exchange until none is left
    for (int guard = 0; guard < 10000; ++guard) {
        double best = cost;
        int best_k = -1;
        int best_c = -1;
        for (int kk = 0; kk < k; ++kk) {
            for (int c = 0; c < n; ++c) {
                if (is_medoid[c]) continue;
                auto trial = r.medoids;
                trial[kk] = c;
                const double tc = assign_cost(d, trial, nullptr);
                if (tc < best - 1e-12 * std::max(1.0, cost)) {
                    best = tc;
                    best_k = kk;
                    best_c = c;
                }
            }
        }
        if (best_k < 0) break;
        is_medoid[r.medoids[best_k]] = 0;
        is_medoid[best_c] = 1;
        r.medoids[best_k] = best_c;
        cost = best;
        r.cost_history.push_back(cost);
    }

    // Canonical cluster order: by the smallest member index.
    std::vector<int> raw_label;
    assign_cost(d, r.medoids, &raw_label);
    std::vector<int> first(k, n);
    for (int i = 0; i < n; ++i) first[raw_label[i]] = std::min(first[raw_label[i]], i);
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return first[a] < first[b]; });
    std::vector<int> rank(k);
    for (int i = 0; i < k; ++i) rank[order[i]] = i;
    std::vector<int> medoids(k);
    for (int i = 0; i < k; ++i) medoids[rank[i]] = r.medoids[i];
    r.medoids = medoids;
    r.label.resize(n);
    for (int i = 0; i < n; ++i) r.label[i] = rank[raw_label[i]];
    return r;
}

int select_cap(const std::vector<int>& members, const LosGains& gains) {
    if (members.empty()) throw std::invalid_argument("select_cap: empty cluster");
    double best = -1.0;
    int arg = members.front();
    for (int q : members) {
        double psi = gains.cpu(q);
        for (int q2 : members)
            if (q2 != q) psi += gains.pair(q, q2);
        if (psi > best) {
            best = psi;
            arg = q;
        }
    }
    return arg;
}

ClusterAssignment cluster_dc(const std::vector<Vec3>& ap_positions, const LosGains& gains, int n_clusters) {
    const int q_count = static_cast<int>(ap_positions.size());
    if (n_clusters < 1 || n_clusters > q_count)
        throw std::invalid_argument("cluster_dc: cluster count must lie in [1, Q]");
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : ap_positions) pts.push_back({p.x, p.y});
    KMedoidsResult km = kmedoids_pam(pts, n_clusters);
    ClusterAssignment a;
    a.clusters.assign(n_clusters, {});
    for (int q = 0; q < q_count; ++q) a.clusters[km.label[q]].push_back(q);
    for (const auto& members : a.clusters) a.cap_node.push_back(select_cap(members, gains));
    a.served_devices.assign(n_clusters, {});
    return a;
}

GridShape sc_grid_shape(int grid_l) {
    switch (grid_l) {
        case 4: return {2, 2};
        case 8: return {4, 2};
        case 12: return {4, 3};
        case 16: return {4, 4};
        case 20: return {5, 4};
        default: throw std::invalid_argument("unsupported sub-area count " + std::to_string(grid_l));
    }
}

int sc_subarea_index(double x, double y, double area_x, double area_y, GridShape g) {
    auto cell = [](double v, double extent, int n) {
        // boundary points belong to the lower cell: use ceil(v / w) - 1
        const double w = extent / n;
        int c = static_cast<int>(std::ceil(v / w)) - 1;
        return std::clamp(c, 0, n - 1);
    };
    return cell(y, area_y, g.ny) * g.nx + cell(x, area_x, g.nx);
}

std::vector<Vec3> sc_cap_positions(double area_x, double area_y, int grid_l, double cap_height) {
    const GridShape g = sc_grid_shape(grid_l);
    std::vector<Vec3> out;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            out.push_back({(ix + 0.5) * area_x / g.nx, (iy + 0.5) * area_y / g.ny, cap_height});
    return out;
}

std::uint64_t sc_node_key(int grid_l, int k) {
    return 1'000'000ULL + static_cast<std::uint64_t>(grid_l) * 1000ULL + static_cast<std::uint64_t>(k);
}

ClusterAssignment cluster_sc(const std::vector<Vec3>& ap_positions, double area_x, double area_y, int grid_l,
                             int first_synthetic_node) {
    const GridShape g = sc_grid_shape(grid_l);
    ClusterAssignment a;
    a.clusters.assign(grid_l, {});
    for (int q = 0; q < static_cast<int>(ap_positions.size()); ++q)
        a.clusters[sc_subarea_index(ap_positions[q].x, ap_positions[q].y, area_x, area_y, g)].push_back(q);
    for (int k = 0; k < grid_l; ++k) a.cap_node.push_back(first_synthetic_node + k);
    a.served_devices.assign(grid_l, {});
    return a;
}

ClusterAssignment cluster_idsc(const std::vector<Vec3>& ap_positions, double area_x, double area_y, int grid_l,
                               const LosGains& gains, int* dropped) {
    ClusterAssignment sc = cluster_sc(ap_positions, area_x, area_y, grid_l, 0);
    ClusterAssignment a;
    int n_dropped = 0;
    for (const auto& members : sc.clusters) {
        if (members.empty()) {
            ++n_dropped;
            continue;
        }
        a.clusters.push_back(members);
        a.cap_node.push_back(select_cap(members, gains));
    }
    a.served_devices.assign(a.clusters.size(), {});
    if (dropped) *dropped = n_dropped;
    return a;
}

Mat cluster_device_gains(const ClusterAssignment& a, const ChannelSet& channels) {
    Mat v = Mat::Zero(a.n_clusters(), channels.n_devices);
    for (int l = 0; l < a.n_clusters(); ++l)
        for (int node : access_nodes(a, l))
            for (int u = 0; u < channels.n_devices; ++u) v(l, u) += channels.ad(node, u).squaredNorm();
    return v;
}

ClusterAssignment select_devices(ClusterAssignment a, const Mat& v, int u_max, int c_max) {
    const int n_l = a.n_clusters();
    const int n_u = static_cast<int>(v.cols());
    if (v.rows() != n_l) throw std::invalid_argument("select_devices: gain matrix does not match clusters");
    if (u_max < 1 || c_max < 1) throw std::invalid_argument("select_devices: U_max and C_max must be >= 1");
    a.serving_map.assign(n_u, {});
    a.served_devices.assign(n_l, {});

    auto has_room = [&](int l) { return static_cast<int>(a.served_devices[l].size()) < u_max; };
    auto serves = [&](int u, int l) {
        return std::find(a.serving_map[u].begin(), a.serving_map[u].end(), l) != a.serving_map[u].end();
    };
    auto best_cluster = [&](int u) {
        int arg = -1;
        double best = -std::numeric_limits<double>::infinity();
        for (int l = 0; l < n_l; ++l) {
            if (!has_room(l) || serves(u, l)) continue;
            if (v(l, u) > best) {
                best = v(l, u);
                arg = l;
            }
        }
        return arg;
    };
    auto attach = [&](int u, int l) {
        a.serving_map[u].push_back(l);
        a.served_devices[l].push_back(u);
    };

    std::vector<int> uncovered;
    for (int u = 0; u < n_u; ++u) {
        const int l = best_cluster(u);
        if (l < 0)
            uncovered.push_back(u);
        else
            attach(u, l);
    }
    if (!uncovered.empty()) {
        std::string msg = "device selection infeasible: L * U_max < U; uncovered devices:";
        for (int u : uncovered) msg += " " + std::to_string(u);
        throw DeviceSelectionError(msg, uncovered);
    }

    while (true) {
        int pick = -1;
        int target = -1;
        double weakest = std::numeric_limits<double>::infinity();
        for (int u = 0; u < n_u; ++u) {
            if (static_cast<int>(a.serving_map[u].size()) >= c_max) continue;
            const int l = best_cluster(u);
            if (l < 0) continue;
            double total = 0.0;
            for (int s : a.serving_map[u]) total += v(s, u);
            if (total < weakest) {
                weakest = total;
                pick = u;
                target = l;
            }
        }
        if (pick < 0) break;
        attach(pick, target);
    }

    for (auto& g : a.serving_map) std::sort(g.begin(), g.end());
    for (auto& s : a.served_devices) std::sort(s.begin(), s.end());
    return a;
}

SubcarrierPartition assign_subcarriers(const std::vector<Vec>& cluster_gain, int n_subcarriers, int target_ca_size) {
    if (target_ca_size < 0 || target_ca_size > n_subcarriers)
        throw std::invalid_argument("assign_subcarriers: target size out of range");
    std::vector<char> taken(n_subcarriers, 0);
    SubcarrierPartition p;
    std::vector<int> order;
    for (int l = 0; l < static_cast<int>(cluster_gain.size()); ++l)
        if (cluster_gain[l].size() == n_subcarriers) order.push_back(l);

    std::size_t turn = 0;
    while (static_cast<int>(p.m_ca.size()) < target_ca_size) {
        int arg = -1;
        if (order.empty()) {
            for (int m = 0; m < n_subcarriers && arg < 0; ++m)
                if (!taken[m]) arg = m;
        } else {
            const Vec& g = cluster_gain[order[turn % order.size()]];
            double best = -std::numeric_limits<double>::infinity();
            for (int m = 0; m < n_subcarriers; ++m) {
                if (taken[m]) continue;
                if (g(m) > best) {
                    best = g(m);
                    arg = m;
                }
            }
            ++turn;
        }
        taken[arg] = 1;
        p.m_ca.push_back(arg);
    }
    std::sort(p.m_ca.begin(), p.m_ca.end());
    for (int m = 0; m < n_subcarriers; ++m)
        if (!taken[m]) p.m_cc.push_back(m);
    return p;
}

std::vector<Vec> ca_subcarrier_gains(const ClusterAssignment& a, const ChannelSet& channels) {
    std::vector<Vec> out(a.n_clusters());
    for (int l = 0; l < a.n_clusters(); ++l) {
        const auto targets = fronthaul_targets(a, l);
        if (targets.empty() || a.served_devices[l].empty()) continue;
        Vec g = Vec::Zero(channels.n_subcarriers);
        for (int q : targets)
            for (int m = 0; m < channels.n_subcarriers; ++m) g(m) += channels.ca(a.cap_node[l], q, m).squaredNorm();
        out[l] = g;
    }
    return out;
}

std::vector<std::string> check_assignment(const ClusterAssignment& a, int n_aps, int n_devices, int u_max, int c_max,
                                          bool require_partition) {
    std::vector<std::string> v;
    std::vector<int> seen(n_aps, 0);
    for (int l = 0; l < a.n_clusters(); ++l)
        for (int q : a.clusters[l]) {
            if (q < 0 || q >= n_aps)
                v.push_back("cluster " + std::to_string(l) + " holds unknown AP " + std::to_string(q));
            else
                ++seen[q];
        }
    for (int q = 0; q < n_aps; ++q) {
        if (seen[q] > 1) v.push_back("AP " + std::to_string(q) + " belongs to several clusters");
        if (require_partition && seen[q] == 0) v.push_back("AP " + std::to_string(q) + " belongs to no cluster");
    }
    if (static_cast<int>(a.cap_node.size()) != a.n_clusters()) v.push_back("CAP list does not match clusters");
    for (int l = 0; l < a.n_clusters() && l < static_cast<int>(a.cap_node.size()); ++l) {
        const int cap = a.cap_node[l];
        const bool member = std::find(a.clusters[l].begin(), a.clusters[l].end(), cap) != a.clusters[l].end();
        if (cap < n_aps && !member) v.push_back("CAP of cluster " + std::to_string(l) + " is not a member");
    }
    if (static_cast<int>(a.served_devices.size()) != a.n_clusters()) v.push_back("served-device list size mismatch");
    if (static_cast<int>(a.serving_map.size()) != n_devices) v.push_back("serving map size mismatch");
    for (int l = 0; l < static_cast<int>(a.served_devices.size()); ++l) {
        if (static_cast<int>(a.served_devices[l].size()) > u_max)
            v.push_back("cluster " + std::to_string(l) + " exceeds U_max");
        for (int u : a.served_devices[l]) {
            if (u < 0 || u >= static_cast<int>(a.serving_map.size())) continue;
            const auto& g = a.serving_map[u];
            if (std::find(g.begin(), g.end(), l) == g.end())
                v.push_back("cluster " + std::to_string(l) + " lists device " + std::to_string(u) + " asymmetrically");
        }
    }
    for (int u = 0; u < static_cast<int>(a.serving_map.size()); ++u) {
        const auto& g = a.serving_map[u];
        if (static_cast<int>(g.size()) > c_max) v.push_back("device " + std::to_string(u) + " exceeds C_max");
        if (g.empty()) v.push_back("device " + std::to_string(u) + " is not served");
        std::set<int> uniq(g.begin(), g.end());
        if (uniq.size() != g.size()) v.push_back("device " + std::to_string(u) + " lists a cluster twice");
        for (int l : g) {
            if (l < 0 || l >= static_cast<int>(a.served_devices.size())) continue;
            const auto& s = a.served_devices[l];
            if (std::find(s.begin(), s.end(), u) == s.end())
                v.push_back("device " + std::to_string(u) + " lists cluster " + std::to_string(l) + " asymmetrically");
        }
    }
    return v;
}

}  // namespace mddthz
