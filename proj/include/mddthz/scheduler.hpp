#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mddthz/access.hpp"
#include "mddthz/association.hpp"
#include "mddthz/fronthaul.hpp"
#include "mddthz/linkrates.hpp"
#include "mddthz/scenario.hpp"

namespace mddthz {

enum class Scheme { mdd_ttwl, tdd_ttwl, cc_hy, ca_hy, ttw, stwl, stw };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);
const std::vector<Scheme>& all_schemes();

/// Subcarrier balancing and cluster sweep knobs. Zero means "derive the default".
struct LoopConfig {
    int m_step = 0;                // 0: ceil(|M_FH| / 8)
    double decay = 0.7;
    double kappa_prime_rel = 0.02; // of the current min fronthaul rate
    int l_step = 2;
    int l_init = 0;                // 0: ceil(U / U_max)
};

struct SchedulerConfig {
    LoopConfig loop;
    ClusteringMethod method = ClusteringMethod::dc;
    double tau_gp = 0.05;
    int n_subframes = 0;         // 0: Z -> infinity
    double eps_fronthaul = 0.0;  // RZF regularization; 0 picks noise * targets / power
    double eps_access = 0.0;
    BisectionConfig access;
    SurrogateConfig fronthaul;
    bool prune = true;           // skip cluster counts whose upper bound cannot win
};

/// MDD frame: three parallel streams with equal shares.
struct MddSchedule {
    SubcarrierPartition partition;
    int n_clusters = 0;
    double tau = 1.0 / 3.0;
    int n_subframes = 0;
    /// Z / (Z + 2/3), or 1 for Z -> infinity.
    double scale() const;
};

struct TddSchedule {
    double tau_cc = 0.0;
    double tau_ca = 0.0;
    double tau_ad = 0.0;
    double tau_gp = 0.0;
    double objective = 0.0;
};

/// min{tau_x / (tau_cc + tau_ca + 2 tau_gp) * C_x}; infinite rates drop out.
double tdd_value(double tau_cc, double tau_ca, double tau_ad, double tau_gp, double c_cc, double c_ca, double c_ad);

/// Exact optimum of the TDD time-fraction program (Z -> infinity). Rates may
/// be +infinity for wired legs.
TddSchedule solve_tdd_fractions(double c_cc, double c_ca, double c_ad, double tau_gp);

struct BalanceStep {
    int iteration = 0;  // j
    int m_ca_size = 0;
    double c_cc = 0.0;
    double c_ca = 0.0;
    double raw_step = 0.0;  // decay^(j-1) * m_step used after this evaluation
};

enum class BalanceStop { balanced, step_decayed, repeated, single_tier };

std::string to_string(BalanceStop s);

struct BalanceOutcome {
    int best_m_ca = 0;        // size with the largest min(C_CC, C_CA)
    double best_value = 0.0;
    std::vector<BalanceStep> steps;
    BalanceStop stop = BalanceStop::balanced;
    double final_gap = 0.0;    // |C_CC - C_CA| at the last evaluation
    double kappa_prime = 0.0;  // at the last evaluation
    double final_raw_step = 0.0;
};

/// Min rates (C_CC, C_CA) for a CAP-to-AP subcarrier count; +infinity marks
/// an absent tier.
using TierEvaluator = std::function<std::pair<double, double>(int m_ca_size)>;

/// Iterative subcarrier-count balancing between the two fronthaul tiers.
BalanceOutcome balance_sizes(int n_subcarriers, const LoopConfig& cfg, const TierEvaluator& eval);

/// Cluster counts visited by the sweep for a method.
std::vector<int> sweep_cluster_counts(ClusteringMethod method, int n_devices, int u_max, int n_aps,
                                      const LoopConfig& cfg);

/// Channels for a trial, including synthetic CAP nodes when static clustering needs them.
ChannelSet build_trial_channels(const NetworkScenario& s, ClusteringMethod method);

/// One solved fronthaul tier.
struct TierResult {
    bool present = false;  // false: no receivers on this tier
    std::vector<int> subcarriers;
    double si = 0.0;  // SI variance handed to relaying CAPs
    PrecoderSet precoders;
    FronthaulProblem problem;
    FronthaulSolution solution;
    double min_rate() const;  // +infinity when absent
};

/// Row of the per-L / per-iteration trace.
struct SweepTraceRow {
    std::string scheme;
    int n_clusters = 0;
    int iteration = 0;   // balancing index, 0 for single evaluations
    int m_ca_size = 0;
    double c_cc = 0.0;   // +infinity for wired or absent
    double c_ca = 0.0;
    double c_ad = 0.0;
    double objective = 0.0;
    bool pruned = false;
};

/// Fronthaul solver trace for one tier solve.
struct SolverTrace {
    std::string scheme;
    std::string tier;
    int n_clusters = 0;
    int m_size = 0;
    std::vector<FronthaulTraceRow> rows;
};

/// Full result of a scheme on one draw.
struct SchemeOutcome {
    RateReport report;            // rates re-evaluated through the link-rate model
    PowerAllocation allocation;
    MddSchedule mdd;
    TddSchedule tdd;
    double solver_cc = 0.0;       // solver-reported min rates; +infinity when not wireless
    double solver_ca = 0.0;
    double solver_ad = 0.0;
    std::vector<std::string> violations;
    std::optional<BalanceOutcome> balance;  // MDD at the chosen L
    std::vector<BalanceOutcome> all_balances;  // MDD, every evaluated L
};

/// Evaluates schemes on one draw and shares per-L work between them.
class TrialEvaluator {
public:
    TrialEvaluator(const NetworkScenario& s, const ChannelSet& ch, SchedulerConfig cfg);
    ~TrialEvaluator();
    TrialEvaluator(const TrialEvaluator&) = delete;
    TrialEvaluator& operator=(const TrialEvaluator&) = delete;

    SchemeOutcome run(Scheme scheme);

    /// Runs MDD with the cluster count forced to L.
    SchemeOutcome run_mdd_at(int n_clusters);

    const std::vector<SweepTraceRow>& sweep_trace() const { return sweep_trace_; }
    const std::vector<SolverTrace>& solver_trace() const { return solver_trace_; }
    const std::vector<std::string>& skipped() const { return skipped_; }

private:
    struct LState;
    struct MddAtL;

    // key > 0: sweep cluster count (grid size for static methods); key 0: singleton clusters
    LState* state(int key);
    void ensure_bounds(LState& st);
    TierResult solve_cc(LState& st, const std::vector<int>& subcarriers, double si, const std::string& scheme);
    TierResult solve_ca(LState& st, const std::vector<int>& subcarriers, const std::string& scheme);
    const TierResult& full_cc(LState& st, const std::string& scheme);
    const TierResult& full_ca(LState& st, const std::string& scheme);
    MddAtL& mdd_at(LState& st);
    double mdd_value(LState& st);
    // Best key by value, visiting keys in descending bound order; -1 when none is feasible.
    // `refine`, when set, is a costlier bound tried only on keys the cheap bound keeps.
    int sweep(const std::string& scheme, const std::function<double(LState&)>& bound,
              const std::function<double(LState&)>& value,
              const std::function<double(LState&)>& refine = {});
    SchemeOutcome finish(Scheme scheme, LState& st, const TierResult* cc, const TierResult* ca, const FrameInfo& frame);
    SchemeOutcome empty_outcome(Scheme scheme, const std::string& note) const;

    const NetworkScenario& s_;
    const ChannelSet& ch_;
    SchedulerConfig cfg_;
    int n_sc_ = 0;
    double noise_fh_ = 0.0;
    double si_ = 0.0;
    double noise_ad_ = 0.0;
    double b_sc_ = 0.0;
    std::map<int, std::unique_ptr<LState>> states_;
    std::vector<SweepTraceRow> sweep_trace_;
    std::vector<SolverTrace> solver_trace_;
    std::vector<std::string> skipped_;
};

void write_sweep_trace_csv(std::ostream& os, int trial, const std::vector<SweepTraceRow>& rows, bool header);
void write_solver_trace_csv(std::ostream& os, int trial, const std::vector<SolverTrace>& traces, bool header);

}  // namespace mddthz
