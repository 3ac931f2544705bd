#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace hardyw {

// Downhill simplex with standard coefficients plus a finite-difference
// polish stage. Objectives may return +inf to reject a point (hard barrier);
// the simplex then contracts away from it, so the objective stays exact
// inside the feasible box.

struct SimplexOptions {
    int max_iters = 2000;
    double f_tol = 1e-12;
    double x_tol = 1e-13;
};

struct SimplexResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
};

template <class F>
SimplexResult nelder_mead(F&& fn, std::span<const double> x0,
                          std::span<const double> step, const SimplexOptions& opt) {
    const int dim = static_cast<int>(x0.size());
    const int m = dim + 1;
    std::vector<std::vector<double>> xs(m, std::vector<double>(x0.begin(), x0.end()));
    std::vector<double> fs(m);
    for (int i = 0; i < dim; ++i) xs[i + 1][i] += step[i];
    for (int i = 0; i < m; ++i) fs[i] = fn(xs[i]);

    std::vector<int> order(m);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    SimplexResult res;

    for (int it = 0; it < opt.max_iters; ++it) {
        res.iterations = it + 1;
        for (int i = 0; i < m; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fs[a] < fs[b]; });
        const int best = order[0], worst = order[m - 1], second = order[m - 2];

        double size = 0.0;
        for (int i = 1; i < m; ++i)
            for (int d = 0; d < dim; ++d)
                size = std::max(size, std::abs(xs[order[i]][d] - xs[best][d]));
        // both criteria: an f-spread of zero alone can be a symmetric stall
        if (size <= opt.x_tol &&
            (std::isfinite(fs[worst]) ? fs[worst] - fs[best] <= opt.f_tol : true)) {
            res.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (int i = 0; i < m; ++i)
            if (i != worst)
                for (int d = 0; d < dim; ++d) centroid[d] += xs[i][d];
        for (int d = 0; d < dim; ++d) centroid[d] /= dim;

        auto blend = [&](std::vector<double>& out, double coef) {
            for (int d = 0; d < dim; ++d)
                out[d] = centroid[d] + coef * (xs[worst][d] - centroid[d]);
        };

        blend(trial, -1.0); // reflect
        const double fr = fn(trial);
        if (fr < fs[best]) {
            blend(trial2, -2.0); // expand
            const double fe = fn(trial2);
            if (fe < fr) {
                xs[worst] = trial2;
                fs[worst] = fe;
            } else {
                xs[worst] = trial;
                fs[worst] = fr;
            }
            continue;
        }
        if (fr < fs[second]) {
            xs[worst] = trial;
            fs[worst] = fr;
            continue;
        }
        const bool outside = fr < fs[worst];
        blend(trial2, outside ? -0.5 : 0.5); // contract
        const double fc = fn(trial2);
        if (fc < std::min(fr, fs[worst])) {
            xs[worst] = trial2;
            fs[worst] = fc;
            continue;
        }
        for (int i = 0; i < m; ++i) { // shrink toward best
            if (i == best) continue;
            for (int d = 0; d < dim; ++d)
                xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
            fs[i] = fn(xs[i]);
        }
    }

    int best = 0;
    for (int i = 1; i < m; ++i)
        if (fs[i] < fs[best]) best = i;
    res.x = xs[best];
    res.f = fs[best];
    return res;
}

// Central-difference steepest descent with a backtracking line search,
// applied at the simplex incumbent. Cheap and robust where the landscape
// is smooth; stops once a full sweep improves by less than f_tol.
template <class F>
SimplexResult fd_polish(F&& fn, std::span<const double> x0, double f0,
                        double f_tol, int max_rounds = 60) {
    const int dim = static_cast<int>(x0.size());
    SimplexResult res;
    res.x.assign(x0.begin(), x0.end());
    res.f = f0;
    std::vector<double> g(dim), xp(dim), xm(dim), trial(dim);
    double step = 1e-1;
    for (int round = 0; round < max_rounds; ++round) {
        res.iterations = round + 1;
        double gnorm2 = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double h = 1e-7 * std::max(1.0, std::abs(res.x[d]));
            xp = res.x;
            xm = res.x;
            xp[d] += h;
            xm[d] -= h;
            const double fp = fn(xp), fm = fn(xm);
            g[d] = (std::isfinite(fp) && std::isfinite(fm)) ? (fp - fm) / (2 * h) : 0.0;
            gnorm2 += g[d] * g[d];
        }
        if (gnorm2 == 0.0) break;
        const double gnorm = std::sqrt(gnorm2);
        bool improved = false;
        double t = step;
        for (int ls = 0; ls < 40; ++ls) {
            for (int d = 0; d < dim; ++d) trial[d] = res.x[d] - t * g[d] / gnorm;
            const double ft = fn(trial);
            if (ft < res.f) {
                improved = ft < res.f - f_tol;
                res.x = trial;
                res.f = ft;
                step = t * 2.0;
                break;
            }
            t *= 0.5;
        }
        if (!improved) {
            if (step <= 1e-12) break;
            step = std::min(step * 0.25, 1e-6);
            if (round > max_rounds / 2) break;
        }
    }
    res.converged = true;
    return res;
}

} // namespace hardyw
