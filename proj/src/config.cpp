#include "mddthz/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mddthz {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in, const std::string& origin) {
    KeyValues kv;
    kv.origin_ = origin;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        kv.values_[key] = value;
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return parse(in, path);
}

const std::string* KeyValues::lookup(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
}

void KeyValues::get(const std::string& key, double& out) {
    if (const auto* v = lookup(key)) {
        std::size_t pos = 0;
        double d = 0.0;
        try {
            d = std::stod(*v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != v->size()) throw std::runtime_error(origin_ + ": key '" + key + "' is not a number: " + *v);
        out = d;
    }
}

void KeyValues::get(const std::string& key, int& out) {
    if (const auto* v = lookup(key)) {
        std::size_t pos = 0;
        long long d = 0;
        try {
            d = std::stoll(*v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != v->size()) throw std::runtime_error(origin_ + ": key '" + key + "' is not an integer: " + *v);
        out = static_cast<int>(d);
    }
}

void KeyValues::get(const std::string& key, std::uint64_t& out) {
    if (const auto* v = lookup(key)) {
        std::size_t pos = 0;
        unsigned long long d = 0;
        try {
            d = std::stoull(*v, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != v->size()) throw std::runtime_error(origin_ + ": key '" + key + "' is not an integer: " + *v);
        out = d;
    }
}

void KeyValues::get(const std::string& key, bool& out) {
    if (const auto* v = lookup(key)) {
        std::string s = *v;
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == "1" || s == "true" || s == "yes" || s == "on")
            out = true;
        else if (s == "0" || s == "false" || s == "no" || s == "off")
            out = false;
        else
            throw std::runtime_error(origin_ + ": key '" + key + "' is not a boolean: " + *v);
    }
}

void KeyValues::get(const std::string& key, std::string& out) {
    if (const auto* v = lookup(key)) out = *v;
}

std::vector<std::string> KeyValues::unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!used_.count(k)) out.push_back(k);
    return out;
}

void apply_scenario_keys(KeyValues& kv, ScenarioConfig& c) {
    kv.get("area_x_m", c.area_x);
    kv.get("area_y_m", c.area_y);
    kv.get("roof_height_m", c.roof_height);
    kv.get("n_aps", c.n_aps);
    kv.get("n_devices", c.n_devices);
    kv.get("ap_height_min_m", c.ap_height_min);
    kv.get("ap_height_max_m", c.ap_height_max);
    kv.get("device_height_m", c.device_height);
    kv.get("cap_height_m", c.cap_height);
    kv.get("cpu_array_rows", c.cpu_array.rows);
    kv.get("cpu_array_cols", c.cpu_array.cols);
    kv.get("cpu_element_spacing", c.cpu_array.element_spacing);
    kv.get("ap_array_rows", c.ap_array.rows);
    kv.get("ap_array_cols", c.ap_array.cols);
    kv.get("ap_element_spacing", c.ap_array.element_spacing);
    kv.get("fronthaul_center_hz", c.band.fronthaul_center_hz);
    kv.get("fronthaul_bandwidth_hz", c.band.fronthaul_bandwidth_hz);
    kv.get("fronthaul_subcarriers", c.band.n_fronthaul_subcarriers);
    kv.get("access_center_hz", c.band.access_center_hz);
    kv.get("access_bandwidth_hz", c.band.access_bandwidth_hz);
    kv.get("access_subcarriers", c.band.n_access_subcarriers);
    kv.get("p_cpu_dbm", c.p_cpu_dbm);
    kv.get("p_ap_dbm", c.p_ap_dbm);
    kv.get("noise_density_dbm_hz", c.noise_density_dbm_hz);
    kv.get("si_offset_db", c.si_offset_db);
    kv.get("shadow_sigma_db", c.shadow_sigma_db);
    kv.get("u_max", c.u_max);
    kv.get("c_max", c.c_max);

    double tx_dbi = linear_to_db(c.thz.tx_gain);
    double rx_dbi = linear_to_db(c.thz.rx_gain);
    kv.get("tx_gain_dbi", tx_dbi);
    kv.get("rx_gain_dbi", rx_dbi);
    c.thz.tx_gain = db_to_linear(tx_dbi);
    c.thz.rx_gain = db_to_linear(rx_dbi);
    kv.get("absorption_per_m", c.thz.absorption);
    kv.get("fresnel_coeff", c.thz.fresnel_coeff);
    kv.get("roughness_m", c.thz.roughness);
    kv.get("n_taps", c.thz.n_taps);
    kv.get("n_rays", c.thz.n_rays);
    kv.get("cp_length", c.thz.cp_length);
    kv.get("sample_interval_s", c.thz.sample_interval);
}

std::map<std::string, std::string> scenario_keys(const ScenarioConfig& c) {
    std::map<std::string, std::string> m;
    m["area_x_m"] = fmt(c.area_x);
    m["area_y_m"] = fmt(c.area_y);
    m["roof_height_m"] = fmt(c.roof_height);
    m["n_aps"] = std::to_string(c.n_aps);
    m["n_devices"] = std::to_string(c.n_devices);
    m["ap_height_min_m"] = fmt(c.ap_height_min);
    m["ap_height_max_m"] = fmt(c.ap_height_max);
    m["device_height_m"] = fmt(c.device_height);
    m["cap_height_m"] = fmt(c.cap_height);
    m["cpu_array_rows"] = std::to_string(c.cpu_array.rows);
    m["cpu_array_cols"] = std::to_string(c.cpu_array.cols);
    m["cpu_element_spacing"] = fmt(c.cpu_array.element_spacing);
    m["ap_array_rows"] = std::to_string(c.ap_array.rows);
    m["ap_array_cols"] = std::to_string(c.ap_array.cols);
    m["ap_element_spacing"] = fmt(c.ap_array.element_spacing);
    m["fronthaul_center_hz"] = fmt(c.band.fronthaul_center_hz);
    m["fronthaul_bandwidth_hz"] = fmt(c.band.fronthaul_bandwidth_hz);
    m["fronthaul_subcarriers"] = std::to_string(c.band.n_fronthaul_subcarriers);
    m["access_center_hz"] = fmt(c.band.access_center_hz);
    m["access_bandwidth_hz"] = fmt(c.band.access_bandwidth_hz);
    m["access_subcarriers"] = std::to_string(c.band.n_access_subcarriers);
    m["p_cpu_dbm"] = fmt(c.p_cpu_dbm);
    m["p_ap_dbm"] = fmt(c.p_ap_dbm);
    m["noise_density_dbm_hz"] = fmt(c.noise_density_dbm_hz);
    m["si_offset_db"] = fmt(c.si_offset_db);
    m["shadow_sigma_db"] = fmt(c.shadow_sigma_db);
    m["u_max"] = std::to_string(c.u_max);
    m["c_max"] = std::to_string(c.c_max);
    m["tx_gain_dbi"] = fmt(linear_to_db(c.thz.tx_gain));
    m["rx_gain_dbi"] = fmt(linear_to_db(c.thz.rx_gain));
    m["absorption_per_m"] = fmt(c.thz.absorption);
    m["fresnel_coeff"] = fmt(c.thz.fresnel_coeff);
    m["roughness_m"] = fmt(c.thz.roughness);
    m["n_taps"] = std::to_string(c.thz.n_taps);
    m["n_rays"] = std::to_string(c.thz.n_rays);
    m["cp_length"] = std::to_string(c.thz.cp_length);
    m["sample_interval_s"] = fmt(c.thz.sample_interval);
    return m;
}

}  // namespace mddthz
