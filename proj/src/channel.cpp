#include "mddthz/channel.hpp"

#include <algorithm>
#include <cstring>
#include <random>
#include <stdexcept>

namespace mddthz {

CVec upa_response(const UpaGeometry& geom, double azimuth, double elevation) {
    if (!std::isfinite(azimuth) || !std::isfinite(elevation))
        throw std::invalid_argument("upa_response: non-finite angle");
    const int n = geom.size();
    CVec a(n);
    const double kx = 2.0 * kPi * geom.element_spacing * std::cos(elevation) * std::sin(azimuth);
    const double ky = 2.0 * kPi * geom.element_spacing * std::sin(elevation);
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (int r = 0; r < geom.rows; ++r)
        for (int c = 0; c < geom.cols; ++c)
            a(r * geom.cols + c) = std::polar(norm, kx * r + ky * c);
    return a;
}

double raised_cosine(double t, double period) {
    const double x = t / period;
    const double denom = 1.0 - 4.0 * x * x;
    if (std::abs(denom) < 1e-10) return 0.5;  // limit at |t| = period / 2
    const double sinc = (x == 0.0) ? 1.0 : std::sin(kPi * x) / (kPi * x);
    return sinc * std::cos(kPi * x) / denom;
}

double path_gain_los(double f, double d, double k_abs) {
    if (!(f > 0.0)) throw std::invalid_argument("path_gain_los: frequency must be positive");
    if (!(d > 0.0)) throw std::invalid_argument("path_gain_los: distance must be positive");
    const double spread = kSpeedOfLight / (4.0 * kPi * f * d);
    return spread * spread * std::exp(-k_abs * d);
}

double reflection_coefficient(double f, const ThzRayParams& p) {
    const double s = 2.0 * kPi * f * p.roughness / kSpeedOfLight;
    return p.fresnel_coeff * std::exp(-2.0 * s * s);
}

double nlos_gain(double f, double d, const ThzRayParams& p) {
    const double g = reflection_coefficient(f, p);
    return g * g * path_gain_los(f, d, p.absorption);
}

namespace {

struct RayDraw {
    double delay;
    cplx phase;
    CVec steering;
};

struct LinkGeometry {
    double distance;
    cplx los_phase;
    CVec los_steering;
    std::vector<RayDraw> rays;
};

LinkGeometry draw_link(const UpaGeometry& tx_array, const Vec3& tx, const Vec3& rx, const ThzRayParams& p,
                       std::uint64_t seed) {
    LinkGeometry g;
    g.distance = distance(tx, rx);
    if (!(g.distance > 0.0)) throw std::invalid_argument("THz link endpoints coincide");
    const double dx = rx.x - tx.x;
    const double dy = rx.y - tx.y;
    const double dz = rx.z - tx.z;
    const double az = std::atan2(dy, dx);
    const double el = std::asin(std::clamp(dz / g.distance, -1.0, 1.0));
    g.los_steering = upa_response(tx_array, az, el);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> udelay(0.0, p.cp_length * p.sample_interval);
    std::uniform_real_distribution<double> uaz(-kPi, kPi);
    std::uniform_real_distribution<double> uel(-0.5 * kPi, 0.5 * kPi);
    g.los_phase = std::polar(1.0, uphase(rng));
    for (int i = 0; i < p.n_rays; ++i) {
        RayDraw r;
        r.delay = udelay(rng);
        const double a = uaz(rng);
        const double e = uel(rng);
        r.phase = std::polar(1.0, uphase(rng));
        r.steering = upa_response(tx_array, a, e);
        g.rays.push_back(std::move(r));
    }
    return g;
}

TapChannel taps_at(const LinkGeometry& g, int n_ant, const ThzRayParams& p, double f) {
    TapChannel tc;
    tc.link_distance = g.distance;
    const double gain = std::sqrt(p.tx_gain * p.rx_gain);
    const double sqrt_n = std::sqrt(static_cast<double>(n_ant));
    const double los_amp = std::sqrt(path_gain_los(f, g.distance, p.absorption));
    const double nlos_amp = std::sqrt(nlos_gain(f, g.distance, p));
    const double ray_scale = p.n_rays > 0 ? std::sqrt(static_cast<double>(n_ant) / p.n_rays) : 0.0;
    tc.taps.reserve(p.n_taps);
    for (int t = 0; t < p.n_taps; ++t) {
        const double tt = t * p.sample_interval;
        // LoS delay is absorbed by receiver timing, so its pulse peaks on tap 0.
        CVec h = (sqrt_n * los_amp * gain * raised_cosine(tt, p.sample_interval)) * g.los_phase * g.los_steering;
        for (const auto& r : g.rays) {
            const double w = ray_scale * nlos_amp * gain * raised_cosine(tt - r.delay, p.sample_interval);
            h += (w * r.phase) * r.steering;
        }
        tc.taps.push_back(std::move(h));
    }
    return tc;
}

}  // namespace

TapChannel thz_tap_channel(const UpaGeometry& tx_array, const Vec3& tx_pos, const Vec3& rx_pos,
                           const ThzRayParams& params, double f_m, std::uint64_t seed) {
    LinkGeometry g = draw_link(tx_array, tx_pos, rx_pos, params, seed);
    return taps_at(g, tx_array.size(), params, f_m);
}

CVec thz_subcarrier_channel(const TapChannel& taps, int m, int n_sc) {
    if (n_sc < 1 || m < 0 || m >= n_sc) throw std::out_of_range("thz_subcarrier_channel: subcarrier index out of range");
    if (taps.taps.empty()) throw std::invalid_argument("thz_subcarrier_channel: no taps");
    CVec h = CVec::Zero(taps.taps.front().size());
    for (std::size_t t = 0; t < taps.taps.size(); ++t) {
        const double ang = -2.0 * kPi * static_cast<double>((static_cast<long long>(m) * static_cast<long long>(t)) % n_sc) / n_sc;
        h += std::polar(1.0, ang) * taps.taps[t];
    }
    return h;
}

SubcarrierChannel thz_link_channel(const UpaGeometry& tx_array, const Vec3& tx_pos, const Vec3& rx_pos,
                                   const ThzRayParams& params, const BandPlan& band, std::uint64_t seed) {
    LinkGeometry g = draw_link(tx_array, tx_pos, rx_pos, params, seed);
    SubcarrierChannel sc;
    const int n = band.n_fronthaul_subcarriers;
    sc.per_subcarrier.reserve(n);
    for (int m = 0; m < n; ++m) {
        TapChannel taps = taps_at(g, tx_array.size(), params, band.fronthaul_subcarrier_hz(m));
        sc.per_subcarrier.push_back(thz_subcarrier_channel(taps, m, n));
    }
    return sc;
}

double large_scale_fading_db(double d, double shadow_draw, double sigma_sh) {
    if (!(d > 0.0)) throw std::invalid_argument("large_scale_fading_db: distance must be positive");
    return -30.5 - 36.7 * std::log10(d) + sigma_sh * shadow_draw;
}

AccessChannel access_channel(double beta, int n_ap, std::uint64_t seed) {
    if (!(beta > 0.0)) throw std::invalid_argument("access_channel: beta must be positive");
    if (n_ap < 1) throw std::invalid_argument("access_channel: antenna count must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
    AccessChannel ch;
    ch.large_scale = beta;
    ch.gain_vector.resize(n_ap);
    const double amp = std::sqrt(beta);
    for (int i = 0; i < n_ap; ++i) {
        const double re = n01(rng);
        const double im = n01(rng);
        ch.gain_vector(i) = amp * cplx(re, im);
    }
    return ch;
}

std::uint64_t link_seed(std::uint64_t base, LinkType type, std::uint64_t tx_key, std::uint64_t rx_key) {
    std::uint64_t h = mix64(base);
    h = hash_combine(h, static_cast<std::uint64_t>(type));
    h = hash_combine(h, tx_key);
    h = hash_combine(h, rx_key);
    return h;
}

namespace {

struct Fnv {
    std::uint64_t h = 1469598103934665603ULL;
    void add(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    }
    void add(const CVec& v) { add(v.data(), sizeof(cplx) * static_cast<std::size_t>(v.size())); }
};

constexpr std::uint64_t kCpuKey = 0;

}  // namespace

ChannelSet build_channels(const NetworkScenario& s, const std::vector<Vec3>& extra_nodes,
                          const std::vector<std::uint64_t>& extra_keys) {
    if (extra_nodes.size() != extra_keys.size())
        throw std::invalid_argument("build_channels: every extra node needs a key");
    ChannelSet cs;
    cs.n_aps = s.n_aps();
    cs.n_devices = s.n_devices();
    cs.n_subcarriers = s.band.n_fronthaul_subcarriers;
    cs.node_positions = s.ap_positions;
    for (int q = 0; q < s.n_aps(); ++q) cs.node_keys.push_back(static_cast<std::uint64_t>(q) + 1);
    for (std::size_t i = 0; i < extra_nodes.size(); ++i) {
        cs.node_positions.push_back(extra_nodes[i]);
        cs.node_keys.push_back(extra_keys[i]);
    }
    const int n_nodes = cs.n_nodes();
    const std::uint64_t seed = s.rng_seed;
    const double fc = s.band.fronthaul_center_hz;

    cs.cpu_to_node.resize(n_nodes);
    cs.cpu_los_amplitude.resize(n_nodes);
    for (int k = 0; k < n_nodes; ++k) {
        cs.cpu_to_node[k] = thz_link_channel(s.cpu_array, s.cpu_position, cs.node_positions[k], s.thz, s.band,
                                             link_seed(seed, LinkType::cpu_to_node, kCpuKey, cs.node_keys[k]));
        cs.cpu_los_amplitude(k) =
            std::sqrt(path_gain_los(fc, distance(s.cpu_position, cs.node_positions[k]), s.thz.absorption));
    }

    cs.node_to_ap.assign(n_nodes, std::vector<SubcarrierChannel>(cs.n_aps));
    cs.node_los_amplitude = Mat::Zero(n_nodes, n_nodes);
    for (int a = 0; a < n_nodes; ++a) {
        for (int b = 0; b < n_nodes; ++b) {
            if (a == b) continue;
            const double d = distance(cs.node_positions[a], cs.node_positions[b]);
            cs.node_los_amplitude(a, b) = d > 0.0 ? std::sqrt(path_gain_los(fc, d, s.thz.absorption)) : 0.0;
        }
        for (int q = 0; q < cs.n_aps; ++q) {
            if (a == q) continue;
            cs.node_to_ap[a][q] =
                thz_link_channel(s.ap_array, cs.node_positions[a], cs.node_positions[q], s.thz, s.band,
                                 link_seed(seed, LinkType::node_to_node, cs.node_keys[a], cs.node_keys[q]));
        }
    }

    cs.node_to_device.assign(n_nodes, std::vector<AccessChannel>(cs.n_devices));
    for (int k = 0; k < n_nodes; ++k) {
        for (int u = 0; u < cs.n_devices; ++u) {
            const std::uint64_t dev_key = static_cast<std::uint64_t>(u);
            std::mt19937_64 shadow_rng(link_seed(seed, LinkType::shadowing, cs.node_keys[k], dev_key));
            std::normal_distribution<double> n01(0.0, 1.0);
            const double z = n01(shadow_rng);
            const double d = std::max(distance(cs.node_positions[k], s.device_positions[u]), 1e-3);
            const double beta = db_to_linear(large_scale_fading_db(d, z, s.power.shadow_sigma_db));
            cs.node_to_device[k][u] = access_channel(beta, s.ap_array.size(),
                                                     link_seed(seed, LinkType::node_to_device, cs.node_keys[k], dev_key));
        }
    }

    Fnv f;
    for (const auto& link : cs.cpu_to_node)
        for (const auto& v : link.per_subcarrier) f.add(v);
    for (const auto& row : cs.node_to_ap)
        for (const auto& link : row)
            for (const auto& v : link.per_subcarrier) f.add(v);
    for (const auto& row : cs.node_to_device)
        for (const auto& ch : row) f.add(ch.gain_vector);
    cs.fingerprint = f.h;
    return cs;
}

}  // namespace mddthz
