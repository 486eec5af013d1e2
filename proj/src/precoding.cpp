#include "mddthz/precoding.hpp"

#include <stdexcept>

namespace mddthz {

CMat rzf(const CMat& h, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("rzf: epsilon must be positive");
    if (!h.allFinite()) throw std::invalid_argument("rzf: non-finite channel entries");
    const Eigen::Index k = h.cols();
    CMat gram = h.adjoint() * h;
    gram.diagonal().array() += epsilon;
    CMat v = h * gram.ldlt().solve(CMat::Identity(k, k));
    for (Eigen::Index j = 0; j < k; ++j) {
        const double n = v.col(j).norm();
        if (n > 0.0) v.col(j) /= n;
    }
    return v;
}

CVec mrt(const CVec& h) {
    const double n = h.norm();
    if (!(n > 0.0)) throw std::invalid_argument("mrt: zero channel vector");
    return h / n;
}

const CVec& PrecoderSet::at(int target, int m) const {
    auto it = columns.find({target, m});
    if (it == columns.end()) throw std::out_of_range("precoder column missing");
    return it->second;
}

const CVec& AccessPrecoders::at(int l, int u) const {
    auto it = stacked.find({l, u});
    if (it == stacked.end()) throw std::out_of_range("access precoder missing");
    return it->second;
}

double rzf_regularization(double configured, double noise, int n_targets, double power) {
    if (configured > 0.0) return configured;
    return noise * std::max(1, n_targets) / power;
}

PrecoderSet build_cc_precoders(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                               const std::vector<int>& subcarriers, double epsilon) {
    PrecoderSet p;
    if (clusters.empty()) return p;
    const int n_ant = static_cast<int>(ch.cc(a.cap_node[clusters.front()], 0).size());
    for (int m : subcarriers) {
        CMat h(n_ant, clusters.size());
        for (std::size_t k = 0; k < clusters.size(); ++k) h.col(k) = ch.cc(a.cap_node[clusters[k]], m);
        CMat v = rzf(h, epsilon);
        for (std::size_t k = 0; k < clusters.size(); ++k) p.columns[{clusters[k], m}] = v.col(k);
    }
    return p;
}

PrecoderSet build_ca_precoders(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                               const std::vector<int>& subcarriers, double epsilon) {
    PrecoderSet p;
    for (int l : clusters) {
        const auto targets = fronthaul_targets(a, l);
        if (targets.empty()) continue;
        const int cap = a.cap_node[l];
        const int n_ant = static_cast<int>(ch.ca(cap, targets.front(), 0).size());
        for (int m : subcarriers) {
            CMat h(n_ant, targets.size());
            for (std::size_t k = 0; k < targets.size(); ++k) h.col(k) = ch.ca(cap, targets[k], m);
            CMat v = rzf(h, epsilon);
            for (std::size_t k = 0; k < targets.size(); ++k) p.columns[{targets[k], m}] = v.col(k);
        }
    }
    return p;
}

AccessPrecoders build_access_precoders(const ChannelSet& ch, const ClusterAssignment& a, double noise, double power,
                                       double configured_eps) {
    AccessPrecoders p;
    p.nodes.resize(a.n_clusters());
    for (int l = 0; l < a.n_clusters(); ++l) {
        p.nodes[l] = access_nodes(a, l);
        const auto& devs = a.served_devices[l];
        if (devs.empty()) continue;
        p.n_ant = static_cast<int>(ch.ad(p.nodes[l].front(), devs.front()).size());
        const int rows = p.n_ant * static_cast<int>(p.nodes[l].size());
        CMat h(rows, devs.size());
        for (std::size_t j = 0; j < devs.size(); ++j)
            for (std::size_t k = 0; k < p.nodes[l].size(); ++k)
                h.col(j).segment(k * p.n_ant, p.n_ant) = ch.ad(p.nodes[l][k], devs[j]);
        const double eps = rzf_regularization(configured_eps, noise, static_cast<int>(devs.size()), power);
        CMat v = rzf(h, eps);
        for (std::size_t j = 0; j < devs.size(); ++j) p.stacked[{l, devs[j]}] = v.col(j);
    }
    return p;
}

}  // namespace mddthz
