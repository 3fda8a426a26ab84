#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "stllab/error.hpp"

namespace stllab {

struct LbfgsbOptions {
    int memory = 10;
    int max_iterations = 100;
    double pgtol = 1e-5;
    double ftol = 2.220446049250313e-09;
    int max_backtracks = 40;
};

struct LbfgsbResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string message;
};

/// Objective returning f(x) and writing the gradient into g.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& g)>;

/// Box-constrained minimization: limited-memory BFGS direction on the free
/// variables, projected backtracking (Armijo) line search.
inline LbfgsbResult lbfgsb_minimize(const Objective& fg, Eigen::VectorXd x, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper, const LbfgsbOptions& opt = {}) {
    const Eigen::Index n = x.size();
    if (lower.size() != n || upper.size() != n) throw ValidationError("lbfgsb: bound sizes do not match x");
    auto project = [&](Eigen::VectorXd v) { return v.cwiseMax(lower).cwiseMin(upper); };

    LbfgsbResult res;
    x = project(std::move(x));
    Eigen::VectorXd g(n);
    double f = fg(x, g);
    res.evaluations = 1;
    if (!std::isfinite(f)) throw NumericError("lbfgsb: objective is not finite at the starting point");

    std::deque<Eigen::VectorXd> S, Y;
    std::deque<double> rho;
    auto free_mask = [&](const Eigen::VectorXd& xv, const Eigen::VectorXd& gv) {
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if ((xv(i) <= lower(i) && gv(i) > 0.0) || (xv(i) >= upper(i) && gv(i) < 0.0)) mask(i) = 0.0;
        return mask;
    };

    for (;;) {
        const Eigen::VectorXd mask = free_mask(x, g);
        const Eigen::VectorXd pg = g.cwiseProduct(mask);
        if (pg.lpNorm<Eigen::Infinity>() <= opt.pgtol) {
            res.converged = true;
            res.message = "projected gradient below tolerance";
            break;
        }
        if (res.iterations >= opt.max_iterations) {
            res.message = "iteration limit reached";
            break;
        }

        // two-loop recursion restricted to the free variables
        Eigen::VectorXd q = pg;
        std::vector<double> alpha(S.size());
        for (std::size_t k = S.size(); k-- > 0;) {
            alpha[k] = rho[k] * S[k].cwiseProduct(mask).dot(q);
            q -= alpha[k] * Y[k].cwiseProduct(mask);
        }
        if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double beta = rho[k] * Y[k].cwiseProduct(mask).dot(q);
            q += (alpha[k] - beta) * S[k].cwiseProduct(mask);
        }
        Eigen::VectorXd d = -q.cwiseProduct(mask);
        if (!(d.dot(g) < 0.0)) {
            d = -pg;
            S.clear();
            Y.clear();
            rho.clear();
        }
        double t = S.empty() ? std::min(1.0, 1.0 / pg.norm()) : 1.0;

        Eigen::VectorXd x_new, g_new(n);
        double f_new = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            x_new = project(x + t * d);
            const double decrease = g.dot(x_new - x);
            if (!(decrease < 0.0)) break; // projected step makes no progress
            f_new = fg(x_new, g_new);
            ++res.evaluations;
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        ++res.iterations;
        if (!accepted) {
            if (!S.empty()) {
                S.clear();
                Y.clear();
                rho.clear();
                continue;
            }
            res.message = "line search failed";
            break;
        }

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > std::numeric_limits<double>::epsilon() * yv.squaredNorm()) {
            S.push_back(s);
            Y.push_back(yv);
            rho.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > opt.memory) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
        }
        const double rel = (f - f_new) / std::max({std::abs(f), std::abs(f_new), 1.0});
        x = x_new;
        g = g_new;
        f = f_new;
        if (rel <= opt.ftol) {
            res.converged = true;
            res.message = "relative reduction below tolerance";
            break;
        }
    }
    res.x = x;
    res.f = f;
    return res;
}

} // namespace stllab
