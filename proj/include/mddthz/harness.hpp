#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mddthz/config.hpp"
#include "mddthz/scenario.hpp"
#include "mddthz/scheduler.hpp"

namespace mddthz {

/// Version string baked in at configure time (git describe when available).
const char* version_string();

struct ExperimentConfig {
    ScenarioConfig scenario;
    std::vector<Scheme> schemes = all_schemes();
    int trials = 1;
    std::uint64_t seed = 1;
    SchedulerConfig scheduler;
    std::string out_dir;  // empty: results stay in memory
    int threads = 1;
    bool dump_channels = false;
    bool trace_solver = false;

    /// Throws std::invalid_argument on a bad trial count or empty scheme list.
    void validate() const;
};

/// Reads scheduler and run keys on top of the scenario keys. Unknown keys throw.
void apply_experiment_keys(KeyValues& kv, ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::string& path);
/// Flat key/value echo of everything that affects results.
std::map<std::string, std::string> experiment_keys(const ExperimentConfig& cfg);

/// Comma-separated scheme names, case-insensitive.
std::vector<Scheme> parse_scheme_list(const std::string& list);

/// Per-trial seed derived from the run seed.
std::uint64_t trial_seed(std::uint64_t run_seed, int trial);

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    std::uint64_t channel_hash = 0;
    std::vector<SchemeOutcome> outcomes;  // same order as ExperimentConfig::schemes
    std::vector<SweepTraceRow> sweep;
    std::vector<SolverTrace> solver;
    std::string channel_dump;             // JSON, filled only with dump_channels
    bool flagged = false;                 // any scheme hit a solver failure or violation

    const SchemeOutcome& outcome(Scheme s, const std::vector<Scheme>& order) const;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialResult> trials;

    /// End-to-end per-device rates of a scheme over all trials, trial-major.
    std::vector<double> device_rates(Scheme s) const;
    /// Per-trial objective (minimum device rate) of a scheme.
    std::vector<double> objectives(Scheme s) const;
    /// Per-trial median device rate of a scheme.
    std::vector<double> trial_medians(Scheme s) const;
};

/// Runs every scheme on each trial's single scenario draw. Trials run on
/// cfg.threads workers; a single writer appends output in trial order, so
/// files do not depend on the thread count. `progress` is called from the
/// writer after each trial.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::function<void(const TrialResult&)>& progress = {});

/// Evaluates one trial; used by run_experiment and by tests.
TrialResult run_trial(const ExperimentConfig& cfg, int trial);

/// Type-7 (linear interpolation) quantile of sorted data, p in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double p);

struct CdfSummary {
    std::string scheme;
    std::vector<double> sorted;  // ascending
    int n_trials = 0;
    int n_devices = 0;
    double likely90 = 0.0;  // exceeded by 90% of samples: 0.1 quantile
    double likely50 = 0.0;
    double likely10 = 0.0;
    double mean = 0.0;

    /// Rate exceeded with probability p.
    double likely(double p) const { return quantile_sorted(sorted, 1.0 - p); }
    /// (rate, cdf) steps, one row per sample.
    std::vector<std::pair<double, double>> table() const;
};

/// Throws std::invalid_argument on empty input.
CdfSummary make_cdf(std::vector<double> rates, const std::string& scheme = "", int n_trials = 0, int n_devices = 0);
CdfSummary emit_cdf(const ExperimentResult& r, Scheme s);

void write_cdf_csv(std::ostream& os, const CdfSummary& c);
void write_summary_csv(std::ostream& os, const std::vector<CdfSummary>& all);
void write_trial_csv_header(std::ostream& os);
void write_trial_csv(std::ostream& os, const TrialResult& t);

}  // namespace mddthz
