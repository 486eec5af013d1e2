#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "mddthz/association.hpp"
#include "mddthz/linkrates.hpp"
#include "mddthz/precoding.hpp"

namespace mddthz {

/// Max-min fronthaul power problem shared by both tiers. Targets are the
/// receivers (CAPs for CPU-to-CAP, APs for CAP-to-AP). gains[j](r, t) is
/// |h_r^H w_t|^2 on the j-th listed subcarrier, the diagonal being the
/// desired gain.
struct FronthaulProblem {
    std::vector<int> target_ids;                   // cluster index or AP index
    std::vector<int> target_cluster;               // cluster owning each target
    std::vector<std::vector<int>> target_devices;  // devices carried to each target
    std::vector<int> group;                        // budget group per target
    std::vector<double> budgets;                   // watts per group
    std::vector<int> subcarriers;                  // global subcarrier indices
    std::vector<Mat> gains;                        // one per listed subcarrier
    Vec floor;                                     // noise (+ SI) per target, watts
    double subcarrier_bw = 1.0;

    int n_targets() const { return static_cast<int>(target_ids.size()); }
    int n_rows() const;
};

FronthaulProblem make_cc_problem(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                                 const std::vector<int>& m_cc, const PrecoderSet& f, double noise, double si_variance,
                                 double p_cpu, double subcarrier_bw);

FronthaulProblem make_ca_problem(const ChannelSet& ch, const ClusterAssignment& a, const std::vector<int>& clusters,
                                 const std::vector<int>& m_ca, const PrecoderSet& w, double noise, double p_ap,
                                 double subcarrier_bw);

struct SurrogateConfig {
    double psi_scaled = 200.0;      // psi * budget
    double kappa_rel = 1e-2;        // kappa = kappa_rel * best attainable level
    double chi_com_factor = 2.0;    // chi_com = factor * kappa
    double max_compensation = 2.0;  // cap on total compensation, in initial upper bounds
    int max_outer = 50;
    int max_bisection = 100;
};

/// Stream power keyed by (target position, device, subcarrier position).
using StreamPower = std::map<Key3, double>;

/// z = sqrt(A) / B per active stream.
std::map<Key3, double> qt_update(const FronthaulProblem& p, const StreamPower& power);

/// Exp-based L0 surrogate 1 - exp(-psi p) summed over a group.
double l0_surrogate(const std::vector<double>& p, double psi);

/// Linearization of the surrogate at `anchor`, evaluated at p.
double surrogate(const std::vector<double>& p, const std::vector<double>& anchor, double psi);

/// gamma = 1 for the strongest positive stream of each (target, subcarrier)
/// slot, 0 for the rest.
std::map<Key3, int> recover_gamma(const StreamPower& power);

/// Rate in bit/s of every (target, device) row at the given powers.
std::map<std::pair<int, int>, double> fronthaul_row_rates(const FronthaulProblem& p, const StreamPower& power);

/// Interference-free per-row water-filling bound over the whole subcarrier list.
double fronthaul_upper_bound(const FronthaulProblem& p);

struct FronthaulTraceRow {
    int iteration = 0;
    double chi_lower = 0.0;
    double chi_upper = 0.0;
    bool feasible = false;
};

struct FronthaulSolution {
    bool unbounded = false;  // no rows: nothing to carry on this tier
    StreamPower power;       // after gamma recovery
    std::map<Key3, int> gamma;
    std::map<std::pair<int, int>, double> row_rates;  // (target position, device)
    double min_rate = 0.0;
    double chi_lower = 0.0;
    double upper_initial = 0.0;
    int accepted = 0;
    int bisection_steps = 0;
    bool warning = false;
    std::vector<FronthaulTraceRow> trace;
};

/// Quadratic-transform bisection with exclusive stream activation.
FronthaulSolution solve_fronthaul_maxmin(const FronthaulProblem& p, const SurrogateConfig& cfg = {});

/// Writes powers and gammas into the CPU-to-CAP slice of an allocation.
void store_cc(const FronthaulProblem& p, const FronthaulSolution& s, PowerAllocation& alloc);
/// Writes powers and gammas into the CAP-to-AP slice of an allocation.
void store_ca(const FronthaulProblem& p, const FronthaulSolution& s, PowerAllocation& alloc);

void write_trace_csv(std::ostream& os, const std::vector<FronthaulTraceRow>& trace);

}  // namespace mddthz
