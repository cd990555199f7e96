#ifndef COPMIX_OPTIM_HPP
#define COPMIX_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace copmix {

struct BoxMaxOptions {
    int max_iter = 100;
    int history = 5;          // limited-memory pairs
    double grad_step = 1e-6;  // central-difference step
    double grad_tol = 1e-8;
    double step_tol = 1e-12;
};

struct BoxMaxResult {
    Eigen::VectorXd x;
    double f = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Box-constrained maximization with a limited-memory quasi-Newton
/// (L-BFGS two-loop) direction, central-difference gradients, projection
/// onto the box, and an Armijo backtracking line search. Returns the best
/// point seen, so the result never undercuts the starting value.
inline BoxMaxResult maximize_box(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi,
                                 const BoxMaxOptions& opts = {}) {
    const auto dim = x0.size();
    if (lo.size() != dim || hi.size() != dim)
        throw std::invalid_argument("maximize_box: bound dimension mismatch");
    auto project = [&](Eigen::VectorXd v) {
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
        return v;
    };
    auto gradient = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            double step = opts.grad_step;
            Eigen::VectorXd xp = x, xm = x;
            xp[i] = std::min(x[i] + step, hi[i]);
            xm[i] = std::max(x[i] - step, lo[i]);
            double denom = xp[i] - xm[i];
            g[i] = denom > 0.0 ? (f(xp) - f(xm)) / denom : 0.0;
        }
        return g;
    };

    Eigen::VectorXd x = project(std::move(x0));
    double fx = f(x);
    if (!std::isfinite(fx))
        throw std::runtime_error("maximize_box: objective not finite at start");

    BoxMaxResult best{x, fx, 0, false};
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> mem; // (s, y)
    Eigen::VectorXd g = gradient(x);

    for (int it = 0; it < opts.max_iter; ++it) {
        best.iterations = it + 1;
        // projected gradient convergence check
        Eigen::VectorXd pg = project(x + g) - x;
        if (pg.norm() < opts.grad_tol) {
            best.converged = true;
            break;
        }

        // two-loop recursion on the ascent direction
        Eigen::VectorXd d = g;
        std::vector<double> alpha(mem.size());
        for (std::size_t k = mem.size(); k-- > 0;) {
            const auto& [s, y] = mem[k];
            double rho = 1.0 / y.dot(s);
            alpha[k] = rho * s.dot(d);
            d -= alpha[k] * y;
        }
        if (!mem.empty()) {
            const auto& [s, y] = mem.back();
            d *= s.dot(y) / y.dot(y);
        }
        for (std::size_t k = 0; k < mem.size(); ++k) {
            const auto& [s, y] = mem[k];
            double rho = 1.0 / y.dot(s);
            d += (alpha[k] - rho * y.dot(d)) * s;
        }
        if (d.dot(g) <= 0.0) d = g; // fall back to steepest ascent

        // backtracking along the projected arc
        double step = 1.0;
        double fnew = fx;
        Eigen::VectorXd xnew = x;
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::VectorXd cand = project(x + step * d);
            if ((cand - x).norm() < opts.step_tol) break;
            double fc = f(cand);
            if (std::isfinite(fc) && fc > fx + 1e-4 * g.dot(cand - x)) {
                xnew = std::move(cand);
                fnew = fc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            best.converged = true;
            break;
        }

        Eigen::VectorXd gnew = gradient(xnew);
        Eigen::VectorXd s = xnew - x;
        Eigen::VectorXd y = g - gnew; // ascent: curvature pair uses -grad diff
        if (s.dot(y) > 1e-12) {
            mem.emplace_back(s, y);
            if (static_cast<int>(mem.size()) > opts.history) mem.pop_front();
        }
        x = std::move(xnew);
        fx = fnew;
        g = std::move(gnew);
        if (fx > best.f) {
            best.x = x;
            best.f = fx;
        }
    }
    return best;
}

} // namespace copmix

#endif
