#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mddthz/types.hpp"

namespace mddthz {

struct UpaGeometry {
    int rows = 1;
    int cols = 1;
    double element_spacing = 0.5;  // in wavelengths

    int size() const { return rows * cols; }
};

struct BandPlan {
    double fronthaul_center_hz = 200e9;
    double fronthaul_bandwidth_hz = 1e9;
    int n_fronthaul_subcarriers = 16;
    double access_center_hz = 5e9;
    double access_bandwidth_hz = 100e6;
    int n_access_subcarriers = 1;

    double fronthaul_subcarrier_bw() const { return fronthaul_bandwidth_hz / n_fronthaul_subcarriers; }
    /// Center frequency of fronthaul subcarrier m, symmetric around the carrier.
    double fronthaul_subcarrier_hz(int m) const {
        return fronthaul_center_hz + (m - 0.5 * (n_fronthaul_subcarriers - 1)) * fronthaul_subcarrier_bw();
    }
};

struct PowerBudget {
    double p_cpu = 0.0;          // watts
    double p_ap = 0.0;           // watts
    double noise_density = 0.0;  // watts/Hz
    double si_offset_db = -10.0;
    double shadow_sigma_db = 4.0;

    /// Per-subcarrier noise on a fronthaul receiver.
    double fronthaul_noise(const BandPlan& band) const { return noise_density * band.fronthaul_subcarrier_bw(); }
    double access_noise(const BandPlan& band) const { return noise_density * band.access_bandwidth_hz; }
    double si_variance(const BandPlan& band) const { return db_to_linear(si_offset_db) * fronthaul_noise(band); }
};

/// Multipath THz ray model constants.
struct ThzRayParams {
    int n_rays = 3;
    int n_taps = 6;
    double sample_interval = 7.8e-12;
    int cp_length = 16;
    double absorption = 0.0033;    // 1/m
    double fresnel_coeff = 0.15;
    double roughness = 0.088e-3;   // surface height deviation, m
    double tx_gain = 100.0;        // linear
    double rx_gain = 100.0;        // linear
};

struct ScenarioConfig {
    double area_x = 100.0;
    double area_y = 100.0;
    double roof_height = 10.0;
    int n_aps = 16;
    int n_devices = 4;
    double ap_height_min = 4.0;
    double ap_height_max = 6.0;
    double device_height = 1.0;
    double cap_height = 5.0;  // height of synthetic CAPs placed by static clustering
    UpaGeometry cpu_array{4, 4, 0.5};
    UpaGeometry ap_array{2, 2, 0.5};
    BandPlan band{};
    double p_cpu_dbm = 35.0;
    double p_ap_dbm = 45.0;
    double noise_density_dbm_hz = -174.0;
    double si_offset_db = -10.0;
    double shadow_sigma_db = 4.0;
    ThzRayParams thz{};
    int u_max = 2;
    int c_max = 4;

    PowerBudget power() const;
};

struct NetworkScenario {
    Vec3 cpu_position;
    std::vector<Vec3> ap_positions;
    std::vector<Vec3> device_positions;
    UpaGeometry cpu_array;
    UpaGeometry ap_array;
    BandPlan band;
    PowerBudget power;
    ThzRayParams thz;
    int u_max = 2;
    int c_max = 4;
    std::uint64_t rng_seed = 0;

    // deployment profile, kept for validation and static clustering
    double area_x = 100.0;
    double area_y = 100.0;
    double roof_height = 10.0;
    double ap_height_min = 4.0;
    double ap_height_max = 6.0;
    double device_height = 1.0;
    double cap_height = 5.0;

    int n_aps() const { return static_cast<int>(ap_positions.size()); }
    int n_devices() const { return static_cast<int>(device_positions.size()); }
};

NetworkScenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Human-readable list of broken invariants; empty when the scenario is valid.
std::vector<std::string> validate_scenario(const NetworkScenario& s);

}  // namespace mddthz
