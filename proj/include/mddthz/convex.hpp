#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mddthz/types.hpp"

namespace mddthz::convex {

/// a.x <= b with a sparse coefficient list. Always enforced strictly.
struct LinearRow {
    std::vector<std::pair<int, double>> a;
    double b = 0.0;
};

/// ||A x_S + c|| <= d.x_S + e over the variable subset S.
struct SocRow {
    std::vector<int> vars;
    Mat A;  // k x |S|
    Vec c;  // k
    Vec d;  // |S|
    double e = 0.0;
    bool soft = false;    // relaxed by the slack in phase one
    double weight = 1.0;  // slack enters the right-hand side as weight * s
};

/// Smooth concave function of the full variable vector.
class ConcaveFunction {
public:
    virtual ~ConcaveFunction() = default;
    /// Returns false when x lies outside the domain. `grad` may be null.
    virtual bool value_grad(const Vec& x, double& value, Vec* grad) const = 0;
    /// H(0:n, 0:n) += weight * (-Hessian of the function at x).
    virtual void add_neg_hessian(const Vec& x, double weight, Mat& h) const = 0;
};

/// f(x) >= level.
struct ConcaveRow {
    std::shared_ptr<const ConcaveFunction> f;
    double level = 0.0;
    bool soft = false;
    double weight = 1.0;  // slack enters as f(x) + weight * s >= level
};

struct Problem {
    int n = 0;
    Vec cost;  // linear objective used by minimize()
    std::vector<LinearRow> linear;
    std::vector<SocRow> socs;
    std::vector<ConcaveRow> concave;
};

struct Options {
    double gap_tol = 1e-7;        // absolute bound on the barrier duality gap
    double mu = 12.0;             // barrier growth factor
    double newton_tol = 1e-9;     // half squared Newton decrement
    int max_newton = 600;         // total Newton steps across all stages
    double slack_lower = -1e6;    // phase-one slack bound keeping the problem bounded
};

enum class Status { optimal, feasible, infeasible, failed };

std::string to_string(Status s);

struct Result {
    Status status = Status::failed;
    Vec x;
    double slack = 0.0;      // phase-one slack at x
    double slack_lb = 0.0;   // certified lower bound on the optimal slack
    double objective = 0.0;
    int newton_steps = 0;
};

/// Minimizes cost.x over the strict interior of all rows, starting from a
/// strictly feasible x0.
Result minimize(const Problem& p, const Vec& x0, const Options& opt = {});

enum class PhaseOneMode {
    feasible_stop,  // return as soon as the soft rows hold strictly
    max_margin      // minimize the slack to optimality
};

/// Relaxes soft rows by a common slack s and minimizes s. x0 must satisfy the
/// hard rows strictly. `feasible` means a point with s < 0 was found;
/// `infeasible` means the optimal slack is certified positive. In max-margin
/// mode `optimal` is returned with the minimal slack.
Result phase_one(const Problem& p, const Vec& x0, PhaseOneMode mode, const Options& opt = {});

/// True when x satisfies every row strictly (soft rows without slack).
bool strictly_feasible(const Problem& p, const Vec& x);

}  // namespace mddthz::convex
