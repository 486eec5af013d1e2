#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mddthz/association.hpp"
#include "mddthz/channel.hpp"
#include "mddthz/types.hpp"

namespace mddthz {

/// Regularized zero-forcing H (H^H H + eps I)^{-1} with unit-norm columns.
CMat rzf(const CMat& h, double epsilon);

/// h / ||h||.
CVec mrt(const CVec& h);

/// Unit-norm precoding columns keyed by (target id, subcarrier).
struct PrecoderSet {
    std::map<std::pair<int, int>, CVec> columns;

    const CVec& at(int target, int m) const;
    bool contains(int target, int m) const { return columns.count({target, m}) != 0; }
};

/// Regularization: positive value used as-is, otherwise noise * targets / power.
double rzf_regularization(double configured, double noise, int n_targets, double power);

/// CPU precoders. Target id = cluster index; one column per listed cluster CAP.
PrecoderSet build_cc_precoders(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                               const std::vector<int>& subcarriers, double epsilon);

/// CAP precoders. Target id = AP index; each cluster precodes over its own targets.
PrecoderSet build_ca_precoders(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                               const std::vector<int>& subcarriers, double epsilon);

/// Access precoders stacked over the access nodes of each cluster, keyed by
/// (cluster, device). Each stacked column has unit norm.
struct AccessPrecoders {
    std::map<std::pair<int, int>, CVec> stacked;
    std::vector<std::vector<int>> nodes;  // access nodes per cluster
    int n_ant = 1;

    const CVec& at(int l, int u) const;
    /// Block of the stacked column that belongs to the k-th access node.
    CVec block(int l, int u, int k) const { return at(l, u).segment(k * n_ant, n_ant); }
};

AccessPrecoders build_access_precoders(const ChannelSet& ch, const ClusterAssignment& a, double noise, double power,
                                       double configured_eps);

}  // namespace mddthz
