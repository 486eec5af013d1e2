#include "mddthz/scenario.hpp"

#include <random>
#include <stdexcept>

namespace mddthz {

PowerBudget ScenarioConfig::power() const {
    PowerBudget p;
    p.p_cpu = dbm_to_watts(p_cpu_dbm);
    p.p_ap = dbm_to_watts(p_ap_dbm);
    p.noise_density = dbm_to_watts(noise_density_dbm_hz);
    p.si_offset_db = si_offset_db;
    p.shadow_sigma_db = shadow_sigma_db;
    return p;
}

NetworkScenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    if (config.n_aps < 1) throw std::invalid_argument("scenario needs at least one AP");
    if (config.n_devices < 1) throw std::invalid_argument("scenario needs at least one device");
    if (!(config.area_x > 0.0) || !(config.area_y > 0.0)) throw std::invalid_argument("area must be positive");
    if (config.ap_height_max < config.ap_height_min) throw std::invalid_argument("AP height range is empty");

    NetworkScenario s;
    s.rng_seed = seed;
    s.cpu_array = config.cpu_array;
    s.ap_array = config.ap_array;
    s.band = config.band;
    s.power = config.power();
    s.thz = config.thz;
    s.u_max = config.u_max;
    s.c_max = config.c_max;
    s.area_x = config.area_x;
    s.area_y = config.area_y;
    s.roof_height = config.roof_height;
    s.ap_height_min = config.ap_height_min;
    s.ap_height_max = config.ap_height_max;
    s.device_height = config.device_height;
    s.cap_height = config.cap_height;

    s.cpu_position = {0.5 * config.area_x, 0.5 * config.area_y, config.roof_height};

    std::mt19937_64 rng(mix64(seed));
    std::uniform_real_distribution<double> ux(0.0, config.area_x);
    std::uniform_real_distribution<double> uy(0.0, config.area_y);
    std::uniform_real_distribution<double> uh(config.ap_height_min, config.ap_height_max);

    s.ap_positions.reserve(config.n_aps);
    for (int q = 0; q < config.n_aps; ++q) {
        Vec3 p;
        p.x = ux(rng);
        p.y = uy(rng);
        p.z = uh(rng);
        s.ap_positions.push_back(p);
    }
    s.device_positions.reserve(config.n_devices);
    for (int u = 0; u < config.n_devices; ++u) {
        Vec3 p;
        p.x = ux(rng);
        p.y = uy(rng);
        p.z = config.device_height;
        s.device_positions.push_back(p);
    }
    return s;
}

namespace {

bool inside_box(const Vec3& p, double ax, double ay) {
    return p.x >= 0.0 && p.x <= ax && p.y >= 0.0 && p.y <= ay;
}

void check_array(const UpaGeometry& g, const char* name, std::vector<std::string>& out) {
    if (g.rows < 1 || g.cols < 1) out.push_back(std::string(name) + " array must have at least one element");
    if (!(g.element_spacing > 0.0)) out.push_back(std::string(name) + " element spacing must be > 0");
}

}  // namespace

std::vector<std::string> validate_scenario(const NetworkScenario& s) {
    std::vector<std::string> v;
    if (s.ap_positions.empty()) v.push_back("Q must be >= 1");
    if (s.device_positions.empty()) v.push_back("U must be >= 1");
    if (s.u_max < 1) v.push_back("U_max must be >= 1");
    if (s.c_max < 1) v.push_back("C_max must be >= 1");
    check_array(s.cpu_array, "CPU", v);
    check_array(s.ap_array, "AP", v);

    if (!(s.band.fronthaul_bandwidth_hz > 0.0) || s.band.n_fronthaul_subcarriers < 1)
        v.push_back("fronthaul subcarrier bandwidth must be > 0");
    if (!(s.band.access_bandwidth_hz > 0.0)) v.push_back("access bandwidth must be > 0");
    if (!(s.band.fronthaul_center_hz > s.band.access_center_hz))
        v.push_back("fronthaul carrier must lie above the access carrier");
    if (s.band.n_access_subcarriers < 1) v.push_back("access subcarrier count must be >= 1");

    if (!(s.power.p_cpu > 0.0)) v.push_back("CPU power budget must be > 0");
    if (!(s.power.p_ap > 0.0)) v.push_back("AP power budget must be > 0");
    if (!(s.power.noise_density > 0.0)) v.push_back("noise density must be > 0");

    if (s.thz.n_taps < 1) v.push_back("THz tap count must be >= 1");
    if (s.thz.n_rays < 0) v.push_back("THz ray count must be >= 0");
    if (!(s.thz.sample_interval > 0.0)) v.push_back("sample interval must be > 0");
    if (s.thz.absorption < 0.0) v.push_back("absorption coefficient must be >= 0");

    constexpr double eps = 1e-9;
    for (std::size_t q = 0; q < s.ap_positions.size(); ++q) {
        const Vec3& p = s.ap_positions[q];
        if (!inside_box(p, s.area_x, s.area_y)) v.push_back("AP " + std::to_string(q) + " lies outside the area");
        if (p.z < s.ap_height_min - eps || p.z > s.ap_height_max + eps)
            v.push_back("AP " + std::to_string(q) + " height " + std::to_string(p.z) + " m outside the profile range");
    }
    for (std::size_t u = 0; u < s.device_positions.size(); ++u) {
        const Vec3& p = s.device_positions[u];
        if (!inside_box(p, s.area_x, s.area_y))
            v.push_back("device " + std::to_string(u) + " lies outside the area");
        if (std::abs(p.z - s.device_height) > eps)
            v.push_back("device " + std::to_string(u) + " height differs from the profile");
    }
    if (!inside_box(s.cpu_position, s.area_x, s.area_y)) v.push_back("CPU lies outside the area");
    return v;
}

}  // namespace mddthz
