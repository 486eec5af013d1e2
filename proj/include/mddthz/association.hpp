#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mddthz/channel.hpp"
#include "mddthz/types.hpp"

namespace mddthz {

enum class ClusteringMethod { dc, sc, idsc };

ClusteringMethod parse_clustering_method(const std::string& name);
std::string to_string(ClusteringMethod m);

/// AP clusters with their CAP and the device/cluster serving relation.
struct ClusterAssignment {
    std::vector<std::vector<int>> clusters;        // AP indices per cluster, ascending
    std::vector<int> cap_node;                     // node index; >= Q for synthetic CAPs
    std::vector<std::vector<int>> serving_map;     // clusters serving each device
    std::vector<std::vector<int>> served_devices;  // devices served by each cluster

    int n_clusters() const { return static_cast<int>(clusters.size()); }
};

/// APs that receive CAP-to-AP fronthaul in cluster l: every member except the CAP.
std::vector<int> fronthaul_targets(const ClusterAssignment& a, int l);

/// Nodes that transmit to devices in cluster l. The CAP only relays, unless
/// it is alone in its cluster, in which case it serves devices directly.
std::vector<int> access_nodes(const ClusterAssignment& a, int l);

/// Amplitudes |alpha_LoS| used for CAP selection.
struct LosGains {
    Vec cpu;   // CPU -> AP q
    Mat pair;  // AP q -> AP q'
};

LosGains los_gains_from(const ChannelSet& channels);

/// Result of partitioning around medoids.
struct KMedoidsResult {
    std::vector<int> medoids;               // point indices
    std::vector<int> label;                 // cluster index per point
    std::vector<double> cost_history;       // cost after BUILD and after each swap
};

KMedoidsResult kmedoids_pam(const std::vector<std::array<double, 2>>& points, int k);

/// Psi_q = |a_cc(q)| + sum over other members of |a_ca(q, q')|; lowest index wins ties.
int select_cap(const std::vector<int>& members, const LosGains& gains);

ClusterAssignment cluster_dc(const std::vector<Vec3>& ap_positions, const LosGains& gains, int n_clusters);

struct GridShape {
    int nx;
    int ny;
};

/// Supported sub-area grids: 4, 8, 12, 16 and 20.
GridShape sc_grid_shape(int grid_l);

/// Sub-area index iy * nx + ix, counted from the lower-left corner. Points on
/// a boundary go to the lower-index side.
int sc_subarea_index(double x, double y, double area_x, double area_y, GridShape g);

std::vector<Vec3> sc_cap_positions(double area_x, double area_y, int grid_l, double cap_height);

/// Stable node key for the k-th synthetic CAP of a grid.
std::uint64_t sc_node_key(int grid_l, int k);

ClusterAssignment cluster_sc(const std::vector<Vec3>& ap_positions, double area_x, double area_y, int grid_l,
                             int first_synthetic_node);

/// Static sub-areas with CAPs chosen among members; empty sub-areas are dropped
/// and reported through `dropped` when given.
ClusterAssignment cluster_idsc(const std::vector<Vec3>& ap_positions, double area_x, double area_y, int grid_l,
                               const LosGains& gains, int* dropped = nullptr);

/// v(l, u) = sum of ||h||^2 over the access nodes of cluster l.
Mat cluster_device_gains(const ClusterAssignment& a, const ChannelSet& channels);

class DeviceSelectionError : public std::runtime_error {
public:
    DeviceSelectionError(const std::string& what, std::vector<int> uncovered)
        : std::runtime_error(what), uncovered_(std::move(uncovered)) {}
    const std::vector<int>& uncovered() const { return uncovered_; }

private:
    std::vector<int> uncovered_;
};

/// Greedy user-centric selection. Every device first takes its best cluster
/// with room; then the device with the least total gain keeps picking its
/// best remaining cluster until nobody can grow.
ClusterAssignment select_devices(ClusterAssignment a, const Mat& v, int u_max, int c_max);

struct SubcarrierPartition {
    std::vector<int> m_cc;
    std::vector<int> m_ca;
};

/// Greedy CAP-to-AP first assignment. `cluster_gain[l]` holds
/// sum_q ||h_{l,q}[m]||^2 per subcarrier, or is empty when cluster l takes no part.
SubcarrierPartition assign_subcarriers(const std::vector<Vec>& cluster_gain, int n_subcarriers, int target_ca_size);

/// Per-cluster subcarrier gains over the CAP-to-AP links of clusters that serve
/// devices and have at least one fronthaul target.
std::vector<Vec> ca_subcarrier_gains(const ClusterAssignment& a, const ChannelSet& channels);

/// Checks partition, capacity and symmetry invariants; returns violations.
std::vector<std::string> check_assignment(const ClusterAssignment& a, int n_aps, int n_devices, int u_max, int c_max,
                                          bool require_partition = true);

}  // namespace mddthz
