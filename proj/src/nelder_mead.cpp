// Nelder-Mead simplex minimizer
// Part of adaptp - adaptive climb/descent trajectory prediction

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "adaptp/optimizer.hpp"

namespace adaptp::opt {

void SimplexConfig::validate() const {
    if (!(expansion > reflection && reflection > contraction &&
          contraction > 0.0)) {
        throw ConfigError(
            "simplex coefficients need expansion > reflection > contraction > 0");
    }
    if (!(shrink > 0.0 && shrink < 1.0)) {
        throw ConfigError("simplex shrink must lie in (0, 1)");
    }
    if (max_iters < 0 || restarts < 0) {
        throw ConfigError("simplex iteration and restart counts must be >= 0");
    }
}

NelderMeadResult nelder_mead(const Objective &f, const Eigen::VectorXd &x0,
                             const SimplexConfig &cfg) {
    cfg.validate();
    const Eigen::Index k = x0.size();
    if (k < 1) {
        throw ConfigError("Nelder-Mead needs at least one dimension");
    }
    NelderMeadResult result;
    auto eval = [&](const Eigen::VectorXd &x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    const double f0 = eval(x0);
    if (!std::isfinite(f0)) {
        throw ConfigError("Nelder-Mead objective is not finite at x0");
    }

    const auto n = static_cast<std::size_t>(k) + 1;
    std::vector<Eigen::VectorXd> simplex(n, x0);
    std::vector<double> values(n, f0);
    for (Eigen::Index i = 0; i < k; ++i) {
        auto &v = simplex[static_cast<std::size_t>(i) + 1];
        v(i) += std::max(0.05 * std::abs(x0(i)), 1e-4);
        values[static_cast<std::size_t>(i) + 1] = eval(v);
    }

    std::vector<std::size_t> order(n);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) {
                             return values[a] < values[b];
                         });
        std::vector<Eigen::VectorXd> s(n);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::move(simplex[order[i]]);
            v[i] = values[order[i]];
        }
        simplex = std::move(s);
        values = std::move(v);
    };

    sort_simplex();
    result.best_history.push_back(values.front());

    Eigen::VectorXd centroid(k);
    for (;;) {
        const double spread = values.back() - values.front();
        if (spread <= cfg.f_tol) {
            result.reason = StopReason::FTol;
            break;
        }
        double x_spread = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            x_spread = std::max(
                x_spread, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
        }
        if (x_spread <= cfg.x_tol) {
            result.reason = StopReason::XTol;
            break;
        }
        if (result.iterations >= cfg.max_iters) {
            result.reason = StopReason::MaxIters;
            break;
        }
        ++result.iterations;

        centroid.setZero();
        for (std::size_t i = 0; i + 1 < n; ++i) centroid += simplex[i];
        centroid /= static_cast<double>(n - 1);

        const Eigen::VectorXd &worst = simplex.back();
        const double f_best = values.front();
        const double f_second = values[n - 2];
        const double f_worst = values.back();

        const Eigen::VectorXd xr =
            centroid + cfg.reflection * (centroid - worst);
        const double fr = eval(xr);

        bool do_shrink = false;
        if (fr < f_best) {
            const Eigen::VectorXd xe =
                centroid + cfg.expansion * (xr - centroid);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex.back() = xe;
                values.back() = fe;
            } else {
                simplex.back() = xr;
                values.back() = fr;
            }
        } else if (fr < f_second) {
            simplex.back() = xr;
            values.back() = fr;
        } else if (fr < f_worst) {
            const Eigen::VectorXd xc =
                centroid + cfg.contraction * (xr - centroid);
            const double fc = eval(xc);
            if (fc <= fr) {
                simplex.back() = xc;
                values.back() = fc;
            } else {
                do_shrink = true;
            }
        } else {
            const Eigen::VectorXd xc =
                centroid + cfg.contraction * (worst - centroid);
            const double fc = eval(xc);
            if (fc < f_worst) {
                simplex.back() = xc;
                values.back() = fc;
            } else {
                do_shrink = true;
            }
        }
        if (do_shrink) {
            for (std::size_t i = 1; i < n; ++i) {
                simplex[i] = simplex[0] + cfg.shrink * (simplex[i] - simplex[0]);
                values[i] = eval(simplex[i]);
            }
        }
        sort_simplex();
        result.best_history.push_back(values.front());
    }

    result.x = simplex.front();
    result.f = values.front();
    return result;
}

} // namespace adaptp::opt
