#pragma once

#include <cstdint>
#include <vector>

#include "mddthz/scenario.hpp"
#include "mddthz/types.hpp"

namespace mddthz {

/// Steering vector of a planar array, unit norm. Element (r, c) sits at
/// index r * cols + c; (0, 0) is broadside.
CVec upa_response(const UpaGeometry& geom, double azimuth, double elevation);

/// Raised-cosine pulse with roll-off 1 and unit peak.
double raised_cosine(double t, double period);

/// Free-space spreading times molecular absorption, as a linear power gain.
double path_gain_los(double f, double d, double k_abs);

/// Reflection amplitude: Fresnel coefficient times the Rayleigh roughness factor.
double reflection_coefficient(double f, const ThzRayParams& params);

double nlos_gain(double f, double d, const ThzRayParams& params);

struct TapChannel {
    std::vector<CVec> taps;
    double link_distance = 0.0;
};

TapChannel thz_tap_channel(const UpaGeometry& tx_array, const Vec3& tx_pos, const Vec3& rx_pos,
                           const ThzRayParams& params, double f_m, std::uint64_t seed);

/// h[m] = sum_t h_t exp(-j 2 pi m t / n_sc).
CVec thz_subcarrier_channel(const TapChannel& taps, int m, int n_sc);

struct SubcarrierChannel {
    std::vector<CVec> per_subcarrier;
};

/// Full per-subcarrier channel of one link; taps are re-evaluated at every
/// subcarrier frequency with ray geometry fixed per link.
SubcarrierChannel thz_link_channel(const UpaGeometry& tx_array, const Vec3& tx_pos, const Vec3& rx_pos,
                                   const ThzRayParams& params, const BandPlan& band, std::uint64_t seed);

double large_scale_fading_db(double d, double shadow_draw, double sigma_sh);

struct AccessChannel {
    CVec gain_vector;
    double large_scale = 0.0;
};

AccessChannel access_channel(double beta, int n_ap, std::uint64_t seed);

enum class LinkType : std::uint64_t {
    cpu_to_node = 1,
    node_to_node = 2,
    node_to_device = 3,
    shadowing = 4,
};

std::uint64_t link_seed(std::uint64_t base, LinkType type, std::uint64_t tx_key, std::uint64_t rx_key);

/// All channels of one deployment. Nodes are the real APs (index < n_aps)
/// followed by any synthetic CAP nodes.
struct ChannelSet {
    int n_aps = 0;
    int n_devices = 0;
    int n_subcarriers = 0;
    std::vector<Vec3> node_positions;
    std::vector<std::uint64_t> node_keys;

    std::vector<SubcarrierChannel> cpu_to_node;               // [node]
    std::vector<std::vector<SubcarrierChannel>> node_to_ap;   // [tx node][rx AP]; empty on the diagonal
    std::vector<std::vector<AccessChannel>> node_to_device;   // [node][device]

    Vec cpu_los_amplitude;   // |alpha_LoS| CPU -> node at the fronthaul carrier
    Mat node_los_amplitude;  // |alpha_LoS| node -> node

    std::uint64_t fingerprint = 0;

    int n_nodes() const { return static_cast<int>(node_positions.size()); }
    const CVec& cc(int node, int m) const { return cpu_to_node[node].per_subcarrier[m]; }
    const CVec& ca(int tx_node, int rx_ap, int m) const { return node_to_ap[tx_node][rx_ap].per_subcarrier[m]; }
    const CVec& ad(int node, int device) const { return node_to_device[node][device].gain_vector; }
};

ChannelSet build_channels(const NetworkScenario& s, const std::vector<Vec3>& extra_nodes = {},
                          const std::vector<std::uint64_t>& extra_keys = {});

}  // namespace mddthz
