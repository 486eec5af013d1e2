#include "mddthz/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mddthz::convex {

std::string to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::feasible: return "feasible";
        case Status::infeasible: return "infeasible";
        case Status::failed: return "failed";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log barrier over the rows of a problem. With `slack` set, the variable
// vector carries one extra trailing entry s that relaxes the soft rows.
class Barrier {
public:
    Barrier(const Problem& p, bool slack, double slack_lower)
        : p_(p), slack_(slack), slack_lower_(slack_lower), dim_(p.n + (slack ? 1 : 0)) {
        theta_ = static_cast<double>(p.linear.size()) + 2.0 * static_cast<double>(p.socs.size()) +
                 static_cast<double>(p.concave.size()) + (slack ? 1.0 : 0.0);
        ata_.reserve(p.socs.size());
        for (const auto& row : p.socs) ata_.push_back(row.A.transpose() * row.A);
    }

    int dim() const { return dim_; }
    double theta() const { return theta_; }

    // phi = -sum log h_i. Returns false outside the domain.
    bool eval(const Vec& y, double& phi, Vec* g, Mat* h) const {
        const int n = p_.n;
        const double s = slack_ ? y[n] : 0.0;
        phi = 0.0;
        if (g) g->setZero(dim_);
        if (h) h->setZero(dim_, dim_);
        if (slack_) {
            const double r = s - slack_lower_;
            if (!(r > 0.0)) return false;
            phi -= std::log(r);
            if (g) (*g)[n] -= 1.0 / r;
            if (h) (*h)(n, n) += 1.0 / (r * r);
        }
        for (const auto& row : p_.linear) {
            double ax = 0.0;
            for (const auto& [j, a] : row.a) ax += a * y[j];
            const double r = row.b - ax;
            if (!(r > 0.0)) return false;
            phi -= std::log(r);
            if (g)
                for (const auto& [j, a] : row.a) (*g)[j] += a / r;
            if (h) {
                const double w = 1.0 / (r * r);
                for (const auto& [i, ai] : row.a)
                    for (const auto& [j, aj] : row.a) (*h)(i, j) += w * ai * aj;
            }
        }
        for (std::size_t ri = 0; ri < p_.socs.size(); ++ri) {
            const SocRow& row = p_.socs[ri];
            const int k = static_cast<int>(row.vars.size());
            const bool rel = slack_ && row.soft;
            const int m = k + (rel ? 1 : 0);
            xs_.resize(k);
            for (int j = 0; j < k; ++j) xs_[j] = y[row.vars[j]];
            u_.noalias() = row.A * xs_;
            u_ += row.c;
            const double t = row.d.dot(xs_) + row.e + (rel ? row.weight * s : 0.0);
            if (!(t > 0.0)) return false;
            const double r = t * t - u_.squaredNorm();
            if (!(r > 0.0)) return false;
            phi -= std::log(r);
            if (!g && !h) continue;
            dt_.resize(m);
            dt_.head(k) = row.d;
            if (rel) dt_[k] = row.weight;
            dr_ = 2.0 * t * dt_;
            dr_.head(k).noalias() -= 2.0 * row.A.transpose() * u_;
            auto idx = [&](int a) { return a < k ? row.vars[a] : n; };
            if (g)
                for (int a = 0; a < m; ++a) (*g)[idx(a)] -= dr_[a] / r;
            if (h) {
                const double w1 = 1.0 / (r * r), w2 = 2.0 / r;
                const Mat& ata = ata_[ri];
                for (int b = 0; b < m; ++b) {
                    const int ib = idx(b);
                    for (int a = 0; a < m; ++a) {
                        double v = w1 * dr_[a] * dr_[b] - w2 * dt_[a] * dt_[b];
                        if (a < k && b < k) v += w2 * ata(a, b);
                        (*h)(idx(a), ib) += v;
                    }
                }
            }
        }
        Vec fg;
        std::vector<int> nz;
        const Vec x = p_.concave.empty() ? Vec() : Vec(y.head(n));
        for (const auto& row : p_.concave) {
            const bool rel = slack_ && row.soft;
            double f = 0.0;
            if (!row.f->value_grad(x, f, (g || h) ? &fg : nullptr)) return false;
            const double r = f + (rel ? row.weight * s : 0.0) - row.level;
            if (!(r > 0.0) || !std::isfinite(r)) return false;
            phi -= std::log(r);
            if (!g && !h) continue;
            if (g) {
                g->head(n) -= fg / r;
                if (rel) (*g)[n] -= row.weight / r;
            }
            if (h) {
                const double w = 1.0 / (r * r);
                // rows touch few variables; a dense outer product dominated the solve time
                nz.clear();
                for (int i = 0; i < n; ++i)
                    if (fg[i] != 0.0) nz.push_back(i);
                for (int i : nz) {
                    const double wi = w * fg[i];
                    for (int j : nz) (*h)(j, i) += wi * fg[j];
                }
                if (rel) {
                    h->block(0, n, n, 1) += w * row.weight * fg;
                    h->block(n, 0, 1, n) += w * row.weight * fg.transpose();
                    (*h)(n, n) += w * row.weight * row.weight;
                }
                row.f->add_neg_hessian(x, 1.0 / r, *h);
            }
        }
        return std::isfinite(phi);
    }

private:
    const Problem& p_;
    std::vector<Mat> ata_;  // A^T A per SOC row
    mutable Vec xs_, u_, dt_, dr_;
    bool slack_;
    double slack_lower_;
    int dim_;
    double theta_;
};

bool solve_spd(const Mat& h, const Vec& rhs, Vec& out) {
    Eigen::LLT<Mat> llt(h);
    if (llt.info() == Eigen::Success) {
        out = llt.solve(rhs);
        if (out.allFinite()) return true;
    }
    const double scale = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double reg = 1e-14; reg < 1e-2; reg *= 100.0) {
        Mat hr = h;
        hr.diagonal().array() += reg * scale;
        Eigen::LLT<Mat> l2(hr);
        if (l2.info() == Eigen::Success) {
            out = l2.solve(rhs);
            if (out.allFinite()) return true;
        }
    }
    return false;
}

enum class StopRule { gap, negative_slack };

struct PathResult {
    Vec y;
    double tau = 0.0;
    int steps = 0;
    bool early = false;   // stopped on a negative slack
    bool stalled = false;
    bool infeasible = false;
    double slack_lb = -kInf;
};

// Barrier path following on tau * c.y + phi(y).
PathResult follow_path(const Barrier& bar, const Vec& c, Vec y, const Options& opt, StopRule rule, int slack_index) {
    PathResult res;
    const int dim = bar.dim();
    Vec g(dim), dir(dim);
    Mat h(dim, dim);
    double phi = 0.0;
    if (!bar.eval(y, phi, &g, &h)) {
        res.stalled = true;
        res.y = y;
        return res;
    }
    // initial tau balancing the objective against the barrier gradient
    double tau = 1.0;
    {
        Vec hc, hg;
        if (solve_spd(h, c, hc) && solve_spd(h, g, hg)) {
            const double den = c.dot(hc);
            const double t = -c.dot(hg) / den;
            if (std::isfinite(t) && t > 0.0 && den > 0.0) tau = t;
        }
        tau = std::clamp(tau, bar.theta() / 1e9, 1e12);
        if (bar.theta() / tau < opt.gap_tol) tau = bar.theta() / opt.gap_tol;
    }

    for (;;) {
        // centering
        for (int inner = 0;; ++inner) {
            if (res.steps >= opt.max_newton) {
                res.stalled = true;
                res.y = y;
                res.tau = tau;
                return res;
            }
            if (!bar.eval(y, phi, &g, &h)) {
                res.stalled = true;
                res.y = y;
                res.tau = tau;
                return res;
            }
            const Vec grad = tau * c + g;
            if (!solve_spd(h, -grad, dir)) {
                res.stalled = true;
                res.y = y;
                res.tau = tau;
                return res;
            }
            const double lam2 = -grad.dot(dir);
            if (lam2 / 2.0 <= opt.newton_tol) break;
            const double f0 = tau * c.dot(y) + phi;
            double alpha = 1.0, phi_new = 0.0;
            Vec trial(dim);
            bool moved = false;
            while (alpha > 1e-14) {
                trial = y + alpha * dir;
                if (bar.eval(trial, phi_new, nullptr, nullptr)) {
                    const double f1 = tau * c.dot(trial) + phi_new;
                    if (f1 <= f0 - 0.25 * alpha * lam2 || f1 <= f0 - 1e-13 * std::abs(f0)) {
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            ++res.steps;
            if (!moved) break;  // numerical floor; treat as centered
            y = trial;
            if (rule == StopRule::negative_slack && y[slack_index] < 0.0) {
                res.early = true;
                res.y = y;
                res.tau = tau;
                return res;
            }
            if (alpha == 1.0 && lam2 / 2.0 < 1e-3 && inner > 40) break;
        }
        const double gap = bar.theta() / tau;
        if (slack_index >= 0) {
            res.slack_lb = y[slack_index] - gap;
            if (rule == StopRule::negative_slack && res.slack_lb > 0.0) {
                res.infeasible = true;
                break;
            }
        }
        if (gap < opt.gap_tol) break;
        tau *= opt.mu;
    }
    res.y = y;
    res.tau = tau;
    return res;
}

double soft_requirement(const Problem& p, const Vec& x, bool& ok) {
    ok = true;
    double req = -kInf;
    for (const auto& row : p.socs) {
        if (!row.soft) continue;
        Vec xs(row.vars.size());
        for (std::size_t j = 0; j < row.vars.size(); ++j) xs[j] = x[row.vars[j]];
        const double need = (row.A * xs + row.c).norm() - (row.d.dot(xs) + row.e);
        req = std::max(req, need / row.weight);
    }
    for (const auto& row : p.concave) {
        if (!row.soft) continue;
        double f = 0.0;
        if (!row.f->value_grad(x, f, nullptr) || !std::isfinite(f)) {
            ok = false;
            return kInf;
        }
        req = std::max(req, (row.level - f) / row.weight);
    }
    return req;
}

}  // namespace

bool strictly_feasible(const Problem& p, const Vec& x) {
    Barrier bar(p, false, 0.0);
    double phi = 0.0;
    return bar.eval(x, phi, nullptr, nullptr);
}

Result minimize(const Problem& p, const Vec& x0, const Options& opt) {
    if (x0.size() != p.n || p.cost.size() != p.n) throw std::invalid_argument("minimize: dimension mismatch");
    Result r;
    Barrier bar(p, false, 0.0);
    double phi = 0.0;
    if (!bar.eval(x0, phi, nullptr, nullptr)) {
        r.x = x0;
        r.status = Status::failed;
        return r;
    }
    PathResult path = follow_path(bar, p.cost, x0, opt, StopRule::gap, -1);
    r.x = path.y;
    r.objective = p.cost.dot(path.y);
    r.newton_steps = path.steps;
    r.status = path.stalled ? Status::failed : Status::optimal;
    return r;
}

Result phase_one(const Problem& p, const Vec& x0, PhaseOneMode mode, const Options& opt) {
    if (x0.size() != p.n) throw std::invalid_argument("phase_one: dimension mismatch");
    Result r;
    r.x = x0;
    {
        // hard rows must hold at the start
        Problem hard = p;
        hard.socs.erase(std::remove_if(hard.socs.begin(), hard.socs.end(), [](const SocRow& s) { return s.soft; }),
                        hard.socs.end());
        hard.concave.erase(
            std::remove_if(hard.concave.begin(), hard.concave.end(), [](const ConcaveRow& s) { return s.soft; }),
            hard.concave.end());
        if (!strictly_feasible(hard, x0)) {
            r.status = Status::failed;
            return r;
        }
    }
    bool ok = true;
    const double req = soft_requirement(p, x0, ok);
    if (!ok) {
        r.status = Status::failed;
        return r;
    }
    if (req == -kInf) {  // no soft rows
        r.status = Status::feasible;
        r.slack = r.slack_lb = 0.0;
        return r;
    }
    if (mode == PhaseOneMode::feasible_stop && req < 0.0) {
        r.status = Status::feasible;
        r.slack = req;
        return r;
    }
    double s0 = req + 0.1 * std::abs(req) + 1e-2;
    s0 = std::max(s0, opt.slack_lower + 1.0);
    Barrier bar(p, true, opt.slack_lower);
    Vec y(p.n + 1);
    y.head(p.n) = x0;
    y[p.n] = s0;
    Vec c = Vec::Zero(p.n + 1);
    c[p.n] = 1.0;
    const StopRule rule = mode == PhaseOneMode::feasible_stop ? StopRule::negative_slack : StopRule::gap;
    PathResult path = follow_path(bar, c, y, opt, rule, p.n);
    r.x = path.y.head(p.n);
    r.slack = path.y[p.n];
    r.slack_lb = path.slack_lb;
    r.newton_steps = path.steps;
    if (mode == PhaseOneMode::max_margin) {
        if (!path.stalled) r.status = Status::optimal;
        else r.status = r.slack < 0.0 ? Status::feasible : Status::failed;
        return r;
    }
    if (path.early || r.slack < 0.0) {
        r.status = Status::feasible;
        return r;
    }
    if (path.infeasible) {
        r.status = Status::infeasible;
        return r;
    }
    if (path.stalled) {
        r.status = Status::failed;
        return r;
    }
    r.status = Status::infeasible;  // gap closed without a negative slack
    return r;
}

}  // namespace mddthz::convex
