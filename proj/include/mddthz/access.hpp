#pragma once

#include <vector>

#include "mddthz/association.hpp"
#include "mddthz/convex.hpp"
#include "mddthz/linkrates.hpp"
#include "mddthz/precoding.hpp"

namespace mddthz {

/// One amplitude variable x = sqrt(p / P_AP) for cluster l, access node, device.
struct AccessVariable {
    int cluster = 0;
    int node = 0;
    int device = 0;
    double v_norm2 = 0.0;  // squared norm of the per-node precoder block
};

/// Terms seen by one device, with every gain pre-scaled by sqrt(P_AP) / sigma.
struct AccessDeviceRow {
    int device = 0;
    std::vector<std::pair<int, cplx>> desired;                  // serving clusters
    std::vector<std::vector<std::pair<int, cplx>>> intra;        // one coherent term per (l in G_u, u' != u)
    std::vector<std::pair<int, double>> inter;                   // |gain| per variable of non-serving clusters
    double phase = 0.0;                                          // rotation applied to the desired sum
};

struct AccessFeasibilityProblem {
    std::vector<AccessVariable> vars;
    std::vector<AccessDeviceRow> rows;
    std::vector<std::vector<int>> budget_groups;  // variables sharing one AP budget
    double p_ap = 1.0;
};

AccessFeasibilityProblem build_access_problem(const ChannelSet& ch, const ClusterAssignment& a,
                                              const AccessPrecoders& v, double noise, double p_ap);

struct BisectionConfig {
    double tolerance = 1e-3;  // SINR units; iterations = ceil(log2(chi_upper / tolerance))
    int max_iters = 60;
};

/// Largest interference-free SNR of the weakest device under the per-AP
/// budgets. Sets each row's phase to the maximizing direction when `problem`
/// is non-const.
double chi_upper(AccessFeasibilityProblem& problem);
double chi_upper(const AccessFeasibilityProblem& problem);

/// Max |sum_i g_i x_i| over 0 <= x_i <= bound_i. `angle` receives the phase of
/// the maximizing sum.
double max_coherent_sum(const std::vector<cplx>& g, const std::vector<double>& bound, double* angle = nullptr);

struct AccessFeasibility {
    bool feasible = false;
    bool solver_failure = false;
    Vec x;  // amplitudes
};

/// SOC feasibility of min-SINR >= chi. x0 (optional) must satisfy the budgets strictly.
AccessFeasibility soc_feasible(const AccessFeasibilityProblem& problem, double chi, const Vec* x0 = nullptr);

/// Minimizes the sum of per-(cluster, device) amplitude norms at SINR >= chi
/// from a strictly feasible start; returns the start when the solve fails.
Vec min_norm_solution(const AccessFeasibilityProblem& problem, double chi, const Vec& x_start);

/// SINR of every row at amplitudes x, from the problem's own scaled gains.
std::vector<double> problem_sinr(const AccessFeasibilityProblem& problem, const Vec& x);

struct AccessSolution {
    std::map<Key3, double> ad_power;  // (l, node, u) -> watts
    double chi_lower = 0.0;
    double chi_upper = 0.0;
    int iterations = 0;
    bool warning = false;
    double solver_min_sinr = 0.0;  // from the problem rows at the returned powers
    std::vector<double> sinr;  // re-evaluated with the link-rate model
    double min_sinr = 0.0;
    std::vector<std::pair<double, bool>> trace;  // (chi tried, feasible)
};

AccessSolution solve_access_maxmin(const AccessFeasibilityProblem& problem, const BisectionConfig& cfg = {});

/// Builds, solves and re-evaluates the access link for an assignment.
AccessSolution solve_access(const ChannelSet& ch, const ClusterAssignment& a, const AccessPrecoders& v, double noise,
                            double p_ap, const BisectionConfig& cfg = {});

}  // namespace mddthz
