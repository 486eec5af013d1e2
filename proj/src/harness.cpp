#include "mddthz/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#ifndef MDDTHZ_VERSION
#define MDDTHZ_VERSION "0.1.0-unknown"
#endif

namespace mddthz {

const char* version_string() { return MDDTHZ_VERSION; }

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

SchemeOutcome failed_outcome(Scheme s, int n_devices, const std::string& note) {
    SchemeOutcome o;
    o.report.scheme = to_string(s);
    o.report.c_cc.assign(n_devices, LinkRate::absent());
    o.report.c_ca.assign(n_devices, LinkRate::absent());
    o.report.c_ad.assign(n_devices, LinkRate::finite(0.0));
    end_to_end(o.report);
    o.report.flagged = true;
    o.report.note = note;
    return o;
}

std::string dump_channels_json(const NetworkScenario& s, const ChannelSet& ch) {
    using nlohmann::json;
    json j;
    j["fingerprint"] = ch.fingerprint;
    j["n_aps"] = ch.n_aps;
    j["n_devices"] = ch.n_devices;
    j["n_subcarriers"] = ch.n_subcarriers;
    auto pos = [](const Vec3& p) { return json::array({p.x, p.y, p.z}); };
    j["cpu"] = pos(s.cpu_position);
    j["nodes"] = json::array();
    for (const auto& p : ch.node_positions) j["nodes"].push_back(pos(p));
    j["devices"] = json::array();
    for (const auto& p : s.device_positions) j["devices"].push_back(pos(p));
    // Norms keep the dump small; full vectors are reproducible from the seed.
    json cc = json::array();
    for (int n = 0; n < ch.n_nodes(); ++n) {
        json row = json::array();
        for (int m = 0; m < ch.n_subcarriers; ++m) row.push_back(ch.cc(n, m).squaredNorm());
        cc.push_back(row);
    }
    j["cc_gain"] = cc;
    json ca = json::array();
    for (int t = 0; t < ch.n_nodes(); ++t) {
        json row = json::array();
        for (int r = 0; r < ch.n_aps; ++r) {
            json sub = json::array();
            if (t != r)
                for (int m = 0; m < ch.n_subcarriers; ++m) sub.push_back(ch.ca(t, r, m).squaredNorm());
            row.push_back(sub);
        }
        ca.push_back(row);
    }
    j["ca_gain"] = ca;
    json ad = json::array();
    for (int n = 0; n < ch.n_nodes(); ++n) {
        json row = json::array();
        for (int u = 0; u < ch.n_devices; ++u) row.push_back(ch.ad(n, u).squaredNorm());
        ad.push_back(row);
    }
    j["ad_gain"] = ad;
    return j.dump();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("trial count must be at least 1");
    if (schemes.empty()) throw std::invalid_argument("scheme list is empty");
    if (threads < 1) throw std::invalid_argument("thread count must be at least 1");
}

std::vector<Scheme> parse_scheme_list(const std::string& list) {
    std::vector<Scheme> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item == "all" || item == "ALL") {
            for (Scheme s : all_schemes())
                if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
            continue;
        }
        const Scheme s = parse_scheme(item);
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    if (out.empty()) throw std::invalid_argument("scheme list is empty");
    return out;
}

void apply_experiment_keys(KeyValues& kv, ExperimentConfig& cfg) {
    apply_scenario_keys(kv, cfg.scenario);
    std::string schemes;
    kv.get("schemes", schemes);
    if (!schemes.empty()) cfg.schemes = parse_scheme_list(schemes);
    kv.get("trials", cfg.trials);
    kv.get("seed", cfg.seed);
    kv.get("threads", cfg.threads);
    kv.get("out_dir", cfg.out_dir);
    kv.get("dump_channels", cfg.dump_channels);
    kv.get("trace_solver", cfg.trace_solver);

    SchedulerConfig& sc = cfg.scheduler;
    std::string method;
    kv.get("clustering", method);
    if (!method.empty()) sc.method = parse_clustering_method(method);
    kv.get("tau_gp", sc.tau_gp);
    kv.get("n_subframes", sc.n_subframes);
    kv.get("eps_fronthaul", sc.eps_fronthaul);
    kv.get("eps_access", sc.eps_access);
    kv.get("prune", sc.prune);
    kv.get("m_step", sc.loop.m_step);
    kv.get("step_decay", sc.loop.decay);
    kv.get("kappa_prime_rel", sc.loop.kappa_prime_rel);
    kv.get("l_step", sc.loop.l_step);
    kv.get("l_init", sc.loop.l_init);
    kv.get("access_tolerance", sc.access.tolerance);
    kv.get("access_max_iters", sc.access.max_iters);
    kv.get("psi_scaled", sc.fronthaul.psi_scaled);
    kv.get("kappa_rel", sc.fronthaul.kappa_rel);
    kv.get("chi_com_factor", sc.fronthaul.chi_com_factor);
    kv.get("max_compensation", sc.fronthaul.max_compensation);
    kv.get("max_outer", sc.fronthaul.max_outer);
    kv.get("max_bisection", sc.fronthaul.max_bisection);

    const auto unused = kv.unused();
    if (!unused.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unused) msg += " " + k;
        throw std::invalid_argument(msg);
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    KeyValues kv = KeyValues::load(path);
    ExperimentConfig cfg;
    apply_experiment_keys(kv, cfg);
    return cfg;
}

std::map<std::string, std::string> experiment_keys(const ExperimentConfig& cfg) {
    auto m = scenario_keys(cfg.scenario);
    std::string schemes;
    for (Scheme s : cfg.schemes) schemes += (schemes.empty() ? "" : ",") + to_string(s);
    m["schemes"] = schemes;
    m["trials"] = std::to_string(cfg.trials);
    m["seed"] = std::to_string(cfg.seed);
    const SchedulerConfig& sc = cfg.scheduler;
    m["clustering"] = to_string(sc.method);
    m["tau_gp"] = fmt(sc.tau_gp);
    m["n_subframes"] = std::to_string(sc.n_subframes);
    m["eps_fronthaul"] = fmt(sc.eps_fronthaul);
    m["eps_access"] = fmt(sc.eps_access);
    m["prune"] = sc.prune ? "true" : "false";
    m["m_step"] = std::to_string(sc.loop.m_step);
    m["step_decay"] = fmt(sc.loop.decay);
    m["kappa_prime_rel"] = fmt(sc.loop.kappa_prime_rel);
    m["l_step"] = std::to_string(sc.loop.l_step);
    m["l_init"] = std::to_string(sc.loop.l_init);
    m["access_tolerance"] = fmt(sc.access.tolerance);
    m["access_max_iters"] = std::to_string(sc.access.max_iters);
    m["psi_scaled"] = fmt(sc.fronthaul.psi_scaled);
    m["kappa_rel"] = fmt(sc.fronthaul.kappa_rel);
    m["chi_com_factor"] = fmt(sc.fronthaul.chi_com_factor);
    m["max_compensation"] = fmt(sc.fronthaul.max_compensation);
    m["max_outer"] = std::to_string(sc.fronthaul.max_outer);
    m["max_bisection"] = std::to_string(sc.fronthaul.max_bisection);
    return m;
}

std::uint64_t trial_seed(std::uint64_t run_seed, int trial) {
    return hash_combine(run_seed, static_cast<std::uint64_t>(trial));
}

const SchemeOutcome& TrialResult::outcome(Scheme s, const std::vector<Scheme>& order) const {
    const auto it = std::find(order.begin(), order.end(), s);
    if (it == order.end()) throw std::invalid_argument("scheme not in run: " + to_string(s));
    return outcomes.at(static_cast<std::size_t>(it - order.begin()));
}

std::vector<double> ExperimentResult::device_rates(Scheme s) const {
    std::vector<double> out;
    for (const auto& t : trials) {
        const auto& r = t.outcome(s, config.schemes).report;
        out.insert(out.end(), r.c_end.begin(), r.c_end.end());
    }
    return out;
}

std::vector<double> ExperimentResult::objectives(Scheme s) const {
    std::vector<double> out;
    for (const auto& t : trials) out.push_back(t.outcome(s, config.schemes).report.objective);
    return out;
}

std::vector<double> ExperimentResult::trial_medians(Scheme s) const {
    std::vector<double> out;
    for (const auto& t : trials) {
        auto v = t.outcome(s, config.schemes).report.c_end;
        if (v.empty()) {
            out.push_back(0.0);
            continue;
        }
        std::sort(v.begin(), v.end());
        out.push_back(quantile_sorted(v, 0.5));
    }
    return out;
}

TrialResult run_trial(const ExperimentConfig& cfg, int trial) {
    TrialResult t;
    t.trial = trial;
    t.seed = trial_seed(cfg.seed, trial);
    const NetworkScenario s = generate_scenario(cfg.scenario, t.seed);
    const ChannelSet ch = build_trial_channels(s, cfg.scheduler.method);
    t.channel_hash = ch.fingerprint;
    if (cfg.dump_channels) t.channel_dump = dump_channels_json(s, ch);

    TrialEvaluator ev(s, ch, cfg.scheduler);
    for (Scheme sc : cfg.schemes) {
        SchemeOutcome o;
        try {
            o = ev.run(sc);
        } catch (const std::exception& e) {
            o = failed_outcome(sc, s.n_devices(), std::string("solver failure: ") + e.what());
        }
        if (o.report.flagged || !o.violations.empty()) t.flagged = true;
        t.outcomes.push_back(std::move(o));
    }
    if (cfg.trace_solver) {
        t.sweep = ev.sweep_trace();
        t.solver = ev.solver_trace();
    }
    return t;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    p = std::clamp(p, 0.0, 1.0);
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<std::pair<double, double>> CdfSummary::table() const {
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) out.emplace_back(sorted[i], (static_cast<double>(i) + 1.0) / n);
    return out;
}

CdfSummary make_cdf(std::vector<double> rates, const std::string& scheme, int n_trials, int n_devices) {
    if (rates.empty()) throw std::invalid_argument("cdf of empty sample");
    for (double r : rates)
        if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("cdf sample must be finite and nonnegative");
    CdfSummary c;
    c.scheme = scheme;
    std::sort(rates.begin(), rates.end());
    c.sorted = std::move(rates);
    c.n_trials = n_trials;
    c.n_devices = n_devices;
    c.likely90 = c.likely(0.9);
    c.likely50 = c.likely(0.5);
    c.likely10 = c.likely(0.1);
    c.mean = std::accumulate(c.sorted.begin(), c.sorted.end(), 0.0) / static_cast<double>(c.sorted.size());
    return c;
}

CdfSummary emit_cdf(const ExperimentResult& r, Scheme s) {
    return make_cdf(r.device_rates(s), to_string(s), static_cast<int>(r.trials.size()), r.config.scenario.n_devices);
}

void write_cdf_csv(std::ostream& os, const CdfSummary& c) {
    os << "rate,cdf\n";
    for (const auto& [rate, p] : c.table()) os << num(rate) << ',' << num(p) << '\n';
}

void write_summary_csv(std::ostream& os, const std::vector<CdfSummary>& all) {
    os << "scheme,samples,trials,devices,likely90,median,likely10,mean\n";
    for (const auto& c : all)
        os << c.scheme << ',' << c.sorted.size() << ',' << c.n_trials << ',' << c.n_devices << ',' << num(c.likely90)
           << ',' << num(c.likely50) << ',' << num(c.likely10) << ',' << num(c.mean) << '\n';
}

void write_trial_csv_header(std::ostream& os) {
    os << "trial,seed,scheme,n_clusters,m_cc,m_ca,objective,solver_cc,solver_ca,solver_ad,balance_stop,flagged,note,"
          "channel_hash\n";
}

void write_trial_csv(std::ostream& os, const TrialResult& t) {
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << t.channel_hash;
    auto solver = [](double v) { return std::isfinite(v) ? num(v) : std::string(); };
    for (const auto& o : t.outcomes) {
        const auto& r = o.report;
        std::string note = r.note;
        for (const auto& v : o.violations) note += (note.empty() ? "" : "; ") + v;
        std::replace(note.begin(), note.end(), ',', ';');
        std::replace(note.begin(), note.end(), '\n', ' ');
        os << t.trial << ',' << t.seed << ',' << r.scheme << ',' << r.n_clusters << ',' << r.m_cc_size << ','
           << r.m_ca_size << ',' << num(r.objective) << ',' << solver(o.solver_cc) << ',' << solver(o.solver_ca)
           << ',' << solver(o.solver_ad) << ',' << (o.balance ? to_string(o.balance->stop) : std::string()) << ','
           << ((r.flagged || !o.violations.empty()) ? 1 : 0) << ',' << note << ',' << hash.str() << '\n';
    }
}

namespace {

struct Sinks {
    std::ofstream rates, trials, sweep, solver, channels;
};

void open_sinks(const ExperimentConfig& cfg, Sinks& k) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path d(cfg.out_dir);
    auto open = [](std::ofstream& f, const fs::path& p) {
        f.open(p, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + p.string());
    };
    open(k.rates, d / "rates.csv");
    write_rate_csv_header(k.rates);
    open(k.trials, d / "trials.csv");
    write_trial_csv_header(k.trials);
    if (cfg.trace_solver) {
        open(k.sweep, d / "sweep_trace.csv");
        open(k.solver, d / "solver_trace.csv");
    }
    if (cfg.dump_channels) open(k.channels, d / "channels.jsonl");
}

void append(const ExperimentConfig& cfg, Sinks& k, const TrialResult& t, bool first) {
    for (const auto& o : t.outcomes) write_rate_csv(k.rates, t.trial, o.report, t.channel_hash);
    write_trial_csv(k.trials, t);
    if (cfg.trace_solver) {
        write_sweep_trace_csv(k.sweep, t.trial, t.sweep, first);
        write_solver_trace_csv(k.solver, t.trial, t.solver, first);
    }
    if (cfg.dump_channels) k.channels << "{\"trial\":" << t.trial << ",\"channels\":" << t.channel_dump << "}\n";
}

void write_outputs(const ExperimentResult& r) {
    namespace fs = std::filesystem;
    const fs::path d(r.config.out_dir);
    std::vector<CdfSummary> all;
    for (Scheme s : r.config.schemes) {
        all.push_back(emit_cdf(r, s));
        std::ofstream f(d / ("cdf_" + to_string(s) + ".csv"), std::ios::binary | std::ios::trunc);
        write_cdf_csv(f, all.back());
    }
    std::ofstream f(d / "summary.csv", std::ios::binary | std::ios::trunc);
    write_summary_csv(f, all);

    nlohmann::ordered_json m;
    m["tool"] = "mddthz";
    m["version"] = version_string();
    m["seed"] = r.config.seed;
    m["trials"] = r.config.trials;
    nlohmann::ordered_json schemes = nlohmann::ordered_json::array();
    for (Scheme s : r.config.schemes) schemes.push_back(to_string(s));
    m["schemes"] = schemes;
    nlohmann::ordered_json keys;
    for (const auto& [k, v] : experiment_keys(r.config)) keys[k] = v;
    m["config"] = keys;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    int flagged = 0;
    for (const auto& t : r.trials) {
        seeds.push_back({{"trial", t.trial}, {"seed", t.seed}, {"flagged", t.flagged}});
        flagged += t.flagged ? 1 : 0;
    }
    m["trial_seeds"] = seeds;
    m["flagged_trials"] = flagged;
    m["files"] = {"rates.csv", "trials.csv", "summary.csv"};
    std::ofstream mf(d / "manifest.json", std::ios::binary | std::ios::trunc);
    mf << m.dump(2) << '\n';
}

}  // namespace

// Never throws for a per-trial problem: the trial comes back flagged instead.
static TrialResult guarded_trial(const ExperimentConfig& cfg, int i) {
    try {
        return run_trial(cfg, i);
    } catch (const std::exception& e) {
        TrialResult t;
        t.trial = i;
        t.seed = trial_seed(cfg.seed, i);
        t.flagged = true;
        for (Scheme s : cfg.schemes)
            t.outcomes.push_back(failed_outcome(s, cfg.scenario.n_devices, std::string("trial failure: ") + e.what()));
        return t;
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::function<void(const TrialResult&)>& progress) {
    cfg.validate();
    ExperimentResult result;
    result.config = cfg;
    result.trials.resize(static_cast<std::size_t>(cfg.trials));

    Sinks sinks;
    const bool persist = !cfg.out_dir.empty();
    if (persist) open_sinks(cfg, sinks);

    std::vector<std::optional<TrialResult>> ready(static_cast<std::size_t>(cfg.trials));
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<int> next{0};

    const int n_workers = std::min(cfg.threads, cfg.trials);
    std::vector<std::thread> pool;
    if (n_workers > 1)
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < cfg.trials; i = next.fetch_add(1)) {
                    TrialResult t = guarded_trial(cfg, i);
                    std::lock_guard<std::mutex> lk(mu);
                    ready[static_cast<std::size_t>(i)] = std::move(t);
                    cv.notify_all();
                }
            });

    // Single writer: consumes trials strictly in index order.
    for (int i = 0; i < cfg.trials; ++i) {
        const auto k = static_cast<std::size_t>(i);
        TrialResult t;
        if (pool.empty()) {
            t = guarded_trial(cfg, i);
        } else {
            std::unique_lock<std::mutex> lk(mu);
            cv.wait(lk, [&] { return ready[k].has_value(); });
            t = std::move(*ready[k]);
            ready[k].reset();
        }
        if (persist) append(cfg, sinks, t, i == 0);
        if (progress) progress(t);
        result.trials[k] = std::move(t);
    }
    for (auto& th : pool) th.join();

    if (persist) {
        sinks = Sinks{};
        write_outputs(result);
    }
    return result;
}

}  // namespace mddthz
