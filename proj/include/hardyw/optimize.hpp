#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hardyw/geometry.hpp"
#include "hardyw/nelder_mead.hpp"
#include "hardyw/parallel.hpp"
#include "hardyw/quantum.hpp"
#include "hardyw/rng.hpp"

namespace hardyw {

struct OptOptions {
    int starts = 64;
    std::uint64_t seed = 0;
    int max_iters = 2000;
    double f_tol = 1e-12;
    double penalty_initial = 10.0;  // generic path only
    double penalty_growth = 10.0;   // generic path only
    double residual_target = 1e-8;  // generic path only
    bool planar_only = false;
    int threads = 0; // <= 0: all cores

    void validate() const {
        if (starts < 1) throw validation_error("options: starts must be >= 1");
        if (!(f_tol > 0.0)) throw validation_error("options: f_tol must be > 0");
        if (!(penalty_growth > 1.0))
            throw validation_error("options: penalty_growth must be > 1");
        if (max_iters < 1) throw validation_error("options: max_iters must be >= 1");
    }
};

struct OptResult {
    double best_probability = 0.0;
    HardyConfig config;
    std::vector<Vec2> w_free;          // W path only; empty on the generic path
    double residual_max = 0.0;         // statevector-oracle residuals of config
    int starts_converged = 0;
    std::uint64_t evaluations = 0;
    double max_eval_probability = 0.0; // largest probability evaluated anywhere
    int best_start = -1;
};

namespace detail {

// New deterministic seed for a sub-computation (grid cell, sample block).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL + index * 0xbf58476d1ce4e5b9ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Objective over the gauge-fixed w parameterization, in amplitude-scaled
// coordinates: parameter block j holds q_j = w_j / a_j^2. The constraint
// relation v_i = -a_i^2 w_i/||w_i||^2 makes a_i^2 the natural magnitude of
// w_i, so in q-space every optimum sits at O(1) coordinates regardless of
// how lopsided the amplitudes are. Layout:
//   full:   p = [m, q2.x, q2.y, ..., q_{N-1}.x, q_{N-1}.y]   (dim 2N-3)
//   planar: p = [m, q2.x, ..., q_{N-1}.x]                    (dim N-1)
// with w_1 = (-a_1^2 m, 0) (the common-rotation gauge pinned) and
// w_N = -sum. Points leaving the norm box are rejected outright so the
// probability formula is evaluated only where it is exact.
class WViolationObjective {
public:
    WViolationObjective(const Amplitudes& a, bool planar)
        : a_(a.values()), n_(a.size()), planar_(planar), w_(n_), scratch_(n_) {}

    int dim() const { return planar_ ? n_ - 1 : 2 * n_ - 3; }

    bool decode(std::span<const double> p) {
        if (!(p[0] > 0.0)) return false;
        w_[0] = {-p[0] * a_[0] * a_[0], 0.0};
        Vec2 sum = w_[0];
        for (int j = 1; j < n_ - 1; ++j) {
            const double s = a_[j] * a_[j];
            w_[j] = planar_ ? Vec2{s * p[j], 0.0}
                            : Vec2{s * p[2 * j - 1], s * p[2 * j]};
            sum += w_[j];
        }
        w_[n_ - 1] = -sum;
        for (int i = 0; i < n_; ++i) {
            const double norm = w_[i].norm();
            if (!(norm >= eps_w && norm <= 1.0 / eps_w)) return false;
        }
        return true;
    }

    // Negated probability; +inf outside the box.
    double operator()(std::span<const double> p) {
        if (!decode(p)) return std::numeric_limits<double>::infinity();
        const double prob = violation_probability_core(a_, w_, scratch_);
        ++evaluations;
        if (prob > max_probability_seen) max_probability_seen = prob;
        return -prob;
    }
    double operator()(const std::vector<double>& p) {
        return (*this)(std::span<const double>(p));
    }

    std::vector<Vec2> w_free_from(std::span<const double> p) {
        if (!decode(p)) throw degenerate_error("w parameters outside the norm box");
        return std::vector<Vec2>(w_.begin(), w_.end() - 1);
    }

    std::uint64_t evaluations = 0;
    double max_probability_seen = 0.0;

private:
    std::span<const double> a_;
    int n_;
    bool planar_;
    std::vector<Vec2> w_;
    std::vector<Vec2> scratch_;
};

// Gauge-rotate an explicit w configuration so w_1 lands on the negative
// x-axis, then encode it as an amplitude-scaled parameter vector.
inline std::vector<double> params_from_w(const Amplitudes& a, std::span<const Vec2> w,
                                         bool planar) {
    const int n = static_cast<int>(w.size());
    const double angle = std::numbers::pi - std::atan2(w[0].y, w[0].x);
    std::vector<double> p(planar ? n - 1 : 2 * n - 3);
    p[0] = w[0].norm() / (a[0] * a[0]);
    for (int j = 1; j < n - 1; ++j) {
        const Vec2 r = rotate(w[j], angle) / (a[j] * a[j]);
        if (planar) {
            p[j] = r.x;
        } else {
            p[2 * j - 1] = r.x;
            p[2 * j] = r.y;
        }
    }
    return p;
}

// Deterministic dense sweep of the planar two-scalar family for N = 3.
// Two of the vectors run over log grids at their natural a_i^2 scales and
// the third closes the sum; every choice of closing vector is tried, since
// a configuration whose closing vector is orders of magnitude smaller than
// the other two (one tiny amplitude) is unreachable from the other grids.
// The best triple seeds the simplex, which refines in the full space.
inline std::vector<double> planar_grid_seed(const Amplitudes& a,
                                            WViolationObjective& obj, bool planar) {
    std::array<Vec2, 3> w, best_w, scratch;
    double best_p = -1.0;
    constexpr int steps = 48;
    auto mag = [](double scale, int step) {
        return scale * std::pow(10.0, -3.0 + 6.0 * step / steps);
    };
    for (int dep = 0; dep < 3; ++dep) {
        const int i1 = (dep + 1) % 3, i2 = (dep + 2) % 3;
        for (int ia = 0; ia <= steps; ++ia) {
            for (int ib = 0; ib <= steps; ++ib) {
                for (const double sign : {1.0, -1.0}) {
                    w[i1] = {mag(a[i1] * a[i1], ia), 0.0};
                    w[i2] = {sign * mag(a[i2] * a[i2], ib), 0.0};
                    w[dep] = -w[i1] - w[i2];
                    bool ok = true;
                    for (const Vec2& wi : w) {
                        const double norm = wi.norm();
                        if (!(norm >= eps_w && norm <= 1.0 / eps_w)) ok = false;
                    }
                    if (!ok) continue;
                    const double p =
                        violation_probability_core(a.values(), w, scratch);
                    ++obj.evaluations;
                    if (p > obj.max_probability_seen) obj.max_probability_seen = p;
                    if (p > best_p) {
                        best_p = p;
                        best_w = w;
                    }
                }
            }
        }
    }
    if (best_p < 0.0) return {};
    return params_from_w(a, best_w, planar);
}

// 1D violation maximization over the symmetric family with the "special"
// vector at `special`: w_i = s elsewhere, w_special = -(N-1)s. Coarse log
// scan plus golden-section refinement; used both as the symmetric-reduced
// optimizer's inner solve and as a structured multistart seed.
inline std::pair<double, double>
best_symmetric_scale(const Amplitudes& a, int special, WViolationObjective* track = nullptr) {
    const int n = a.size();
    std::vector<Vec2> w(n);
    std::vector<Vec2> scratch(n);
    auto prob_at = [&](double s) {
        for (int i = 0; i < n; ++i) w[i] = {s, 0.0};
        w[special] = {-(n - 1) * s, 0.0};
        for (const Vec2& wi : w) {
            const double norm = wi.norm();
            if (!(norm >= eps_w && norm <= 1.0 / eps_w)) return -1.0;
        }
        const double p = violation_probability_core(a.values(), w, scratch);
        if (track) {
            ++track->evaluations;
            if (p > track->max_probability_seen) track->max_probability_seen = p;
        }
        return p;
    };

    double best_s = 1.0, best_p = -1.0;
    constexpr int grid = 360;
    for (int k = 0; k <= grid; ++k) {
        const double s = std::pow(10.0, -6.0 + 12.0 * k / grid);
        const double p = prob_at(s);
        if (p > best_p) {
            best_p = p;
            best_s = s;
        }
    }
    // Golden-section around the best grid point (log coordinates).
    double lo = std::log(best_s) - 12.0 * std::numbers::ln10 / grid;
    double hi = std::log(best_s) + 12.0 * std::numbers::ln10 / grid;
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = prob_at(std::exp(x1)), f2 = prob_at(std::exp(x2));
    for (int it = 0; it < 160 && hi - lo > 1e-14; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = prob_at(std::exp(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = prob_at(std::exp(x1));
        }
    }
    const double s = std::exp(0.5 * (lo + hi));
    return {s, prob_at(s)};
}

struct StartOutcome {
    double probability = -1.0;
    std::vector<double> params;
    bool converged = false;
    std::uint64_t evaluations = 0;
    double max_probability_seen = 0.0;
};

struct MultistartOutcome {
    std::vector<double> best_params;
    double best_probability = -1.0;
    int best_start = -1;
    int starts_converged = 0;
    std::uint64_t evaluations = 0;
    double max_eval_probability = 0.0;
};

template <class MakeObjective, class SeedFn>
MultistartOutcome run_multistart(int dim, const OptOptions& opts,
                                 MakeObjective make_objective, SeedFn seed_start) {
    std::vector<StartOutcome> outcomes(opts.starts);
    parallel_for_index(opts.starts, opts.threads, [&](std::size_t s) {
        auto objective = make_objective();
        StartOutcome& out = outcomes[s];
        std::vector<double> x0 = seed_start(static_cast<int>(s), objective);
        if (x0.empty()) return; // seed rejected (e.g. structured seed infeasible)

        std::vector<double> step(dim);
        SimplexOptions nm{opts.max_iters, opts.f_tol, 1e-13};
        double fbest = std::numeric_limits<double>::infinity();
        std::vector<double> xbest = x0;
        double scale = 0.5;
        for (int round = 0; round < 4; ++round) {
            for (int d = 0; d < dim; ++d)
                step[d] = scale * std::max(0.1, std::abs(xbest[d]));
            SimplexResult r = nelder_mead(objective, xbest, step, nm);
            out.converged = r.converged;
            if (r.f >= fbest - opts.f_tol) {
                if (r.f < fbest) {
                    fbest = r.f;
                    xbest = std::move(r.x);
                }
                break;
            }
            fbest = r.f;
            xbest = std::move(r.x);
            scale *= 0.12;
        }
        if (std::isfinite(fbest)) {
            SimplexResult p = fd_polish(objective, xbest, fbest, opts.f_tol);
            fbest = p.f;
            xbest = std::move(p.x);
        }
        out.probability = std::isfinite(fbest) ? -fbest : -1.0;
        out.params = std::move(xbest);
        out.evaluations = objective.evaluations;
        out.max_probability_seen = objective.max_probability_seen;
    });

    MultistartOutcome agg;
    for (int s = 0; s < opts.starts; ++s) {
        agg.evaluations += outcomes[s].evaluations;
        agg.max_eval_probability =
            std::max(agg.max_eval_probability, outcomes[s].max_probability_seen);
        if (outcomes[s].converged) ++agg.starts_converged;
        if (outcomes[s].probability > agg.best_probability) {
            agg.best_probability = outcomes[s].probability;
            agg.best_start = s;
        }
    }
    if (agg.best_start < 0)
        throw infeasible_error("multistart: no start converged to a feasible point", 1.0);
    agg.best_params = std::move(outcomes[agg.best_start].params);
    return agg;
}

inline OptResult make_w_result(const MultistartOutcome& ms, const Amplitudes& a,
                               bool planar) {
    OptResult res;
    res.evaluations = ms.evaluations;
    res.max_eval_probability = ms.max_eval_probability;
    res.starts_converged = ms.starts_converged;
    res.best_start = ms.best_start;
    WViolationObjective obj(a, planar);
    res.w_free = obj.w_free_from(ms.best_params);
    auto [cfg, sv] = hardy_config_from_w(a, res.w_free);
    res.config = std::move(cfg);
    res.best_probability = violation_probability_from_w(a, res.w_free);
    if (a.size() <= max_dense_qubits) {
        const StateVector psi = build_w_state(a);
        const auto residuals = constraint_residuals(psi, res.config);
        res.residual_max = *std::max_element(residuals.begin(), residuals.end());
        const std::vector<Outcome> plus(a.size(), Outcome::plus);
        const double oracle = joint_probability_statevector(psi, res.config.U, plus);
        if (std::abs(oracle - res.best_probability) > 1e-8)
            throw internal_error("w-path result fails oracle verification");
    } else {
        res.residual_max = 0.0; // feasible by construction; dense oracle capped
    }
    return res;
}

} // namespace detail

// Maximize P(U...U|+...+) for the generalized W state with amplitudes `a`
// over the feasible family parameterized by the free w-vectors. Multistart:
// a few structured seeds (symmetric-family optima with the special vector at
// each position, plus the 1/(N-1) construction) followed by seeded random
// starts, half planar / half full-2D. Every visited configuration is
// feasible by construction.
inline OptResult maximize_w_violation(const Amplitudes& a, const OptOptions& opts) {
    opts.validate();
    const int n = a.size();
    if (n < 2)
        throw validation_error("maximize_w_violation: need at least 2 qubits");

    detail::WViolationObjective proto(a, opts.planar_only);
    const int dim = proto.dim();
    const bool with_grid_seed = n == 3;
    const int structured = std::min((with_grid_seed ? n + 2 : n + 1), opts.starts);

    auto seed_start = [&](int s, detail::WViolationObjective& obj) -> std::vector<double> {
        if (s < structured) {
            if (with_grid_seed) {
                if (s == 0) return detail::planar_grid_seed(a, obj, opts.planar_only);
                --s; // remaining structured seeds shift down by one
            }
            std::vector<Vec2> w(n);
            if (s < n) {
                // symmetric family, special vector at position s
                auto [scale, prob] = detail::best_symmetric_scale(a, s, &obj);
                if (prob <= 0.0) return {};
                for (int i = 0; i < n; ++i) w[i] = {scale, 0.0};
                w[s] = {-(n - 1) * scale, 0.0};
            } else {
                for (int i = 0; i < n - 1; ++i) w[i] = {1.0 / (n - 1), 0.0};
                w[n - 1] = {-1.0, 0.0};
            }
            return detail::params_from_w(a, w, opts.planar_only);
        }
        Rng rng(opts.seed, static_cast<std::uint64_t>(s));
        std::vector<double> x(dim);
        x[0] = rng.log_uniform(1e-2, 1e2);
        const bool planar_start = opts.planar_only || s % 2 == 0;
        for (int j = 1; j < n - 1; ++j) {
            const double mag = rng.log_uniform(1e-2, 1e2);
            const double ang = planar_start ? (rng.coin() ? 0.0 : std::numbers::pi)
                                            : rng.uniform(0.0, two_pi);
            if (opts.planar_only) {
                x[j] = mag * std::cos(ang);
            } else {
                x[2 * j - 1] = mag * std::cos(ang);
                x[2 * j] = mag * std::sin(ang);
            }
        }
        return x;
    };

    const detail::MultistartOutcome ms = detail::run_multistart(
        dim, opts, [&] { return detail::WViolationObjective(a, opts.planar_only); },
        seed_start);
    return detail::make_w_result(ms, a, opts.planar_only);
}

// Reduced search under the symmetry ansatz: amplitudes (a,...,a,a_N), all
// w-vectors on the x-axis with w_i identical for i < N. Two free scalars
// (amplitude split and w scale); one when the amplitudes are pinned uniform.
inline OptResult maximize_symmetric_w(int n, const OptOptions& opts,
                                      bool uniform_amplitudes = false) {
    opts.validate();
    if (n < 3)
        throw validation_error("maximize_symmetric_w: need at least 3 qubits");

    auto amplitudes_for = [&](double split) {
        std::vector<double> v(n, std::cos(split) / std::sqrt(double(n - 1)));
        v.back() = std::sin(split);
        return Amplitudes(std::move(v));
    };

    double best_split = std::atan(1.0 / std::sqrt(double(n - 1))); // uniform point
    double best_scale = 0.0, best_prob = -1.0;
    std::uint64_t evals = 0;
    double max_seen = 0.0;

    if (uniform_amplitudes) {
        const Amplitudes a = Amplitudes::uniform(n);
        detail::WViolationObjective track(a, true);
        auto [scale, prob] = detail::best_symmetric_scale(a, n - 1, &track);
        best_scale = scale;
        best_prob = prob;
        evals = track.evaluations;
        max_seen = track.max_probability_seen;
    } else {
        // Nested solve: outer golden section on the amplitude split, inner
        // 1D scale solve. The landscape in the split is smooth; a coarse
        // scan guards against local optima.
        auto value_at = [&](double split) {
            const Amplitudes a = amplitudes_for(split);
            detail::WViolationObjective track(a, true);
            auto [scale, prob] = detail::best_symmetric_scale(a, n - 1, &track);
            evals += track.evaluations;
            max_seen = std::max(max_seen, track.max_probability_seen);
            return std::pair<double, double>(prob, scale);
        };
        constexpr int grid = 96;
        const double lo_split = 1e-3, hi_split = half_pi - 1e-3;
        for (int k = 0; k <= grid; ++k) {
            const double t = lo_split + (hi_split - lo_split) * k / grid;
            auto [p, s] = value_at(t);
            if (p > best_prob) {
                best_prob = p;
                best_split = t;
                best_scale = s;
            }
        }
        double lo = std::max(lo_split, best_split - (hi_split - lo_split) / grid);
        double hi = std::min(hi_split, best_split + (hi_split - lo_split) / grid);
        constexpr double inv_phi = 0.6180339887498949;
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        auto [f1, s1] = value_at(x1);
        auto [f2, s2] = value_at(x2);
        for (int it = 0; it < 120 && hi - lo > 1e-13; ++it) {
            if (f1 > f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                s2 = s1;
                x1 = hi - inv_phi * (hi - lo);
                std::tie(f1, s1) = value_at(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                s1 = s2;
                x2 = lo + inv_phi * (hi - lo);
                std::tie(f2, s2) = value_at(x2);
            }
        }
        if (f1 > best_prob) {
            best_prob = f1;
            best_split = x1;
            best_scale = s1;
        }
        if (f2 > best_prob) {
            best_prob = f2;
            best_split = x2;
            best_scale = s2;
        }
    }

    if (best_prob <= 0.0)
        throw infeasible_error("maximize_symmetric_w: no feasible symmetric point", 1.0);

    const Amplitudes a =
        uniform_amplitudes ? Amplitudes::uniform(n) : amplitudes_for(best_split);
    OptResult res;
    res.w_free.assign(n - 1, Vec2{best_scale, 0.0});
    // special vector sits at index N (dependent slot): w_N = -(N-1)*scale
    auto [cfg, sv] = hardy_config_from_w(a, res.w_free);
    res.config = std::move(cfg);
    res.best_probability = violation_probability_from_w(a, res.w_free);
    res.evaluations = evals;
    res.max_eval_probability = max_seen;
    res.starts_converged = 1;
    res.best_start = 0;
    if (n <= max_dense_qubits) {
        const auto residuals = constraint_residuals(build_w_state(a), res.config);
        res.residual_max = *std::max_element(residuals.begin(), residuals.end());
    }
    return res;
}

// Hardy terms of an arbitrary state under raw angle parameters:
// target P(U...U|+...+) and the N+1 equation-constraint probabilities.
namespace detail {

class GenericObjective {
public:
    GenericObjective(const StateVector& state, double mu)
        : state_(&state), n_(state.n), mu_(mu), U_(n_), D_(n_), bank_(n_),
          plus_(n_, Outcome::plus), minus_(n_, Outcome::minus) {}

    void set_mu(double mu) { mu_ = mu; }

    // p = [phiU..., thetaU..., phiD..., thetaD...] (4N raw angles)
    void decode(std::span<const double> p) {
        for (int i = 0; i < n_; ++i) {
            U_[i] = {p[i], p[n_ + i]};
            D_[i] = {p[2 * n_ + i], p[3 * n_ + i]};
        }
    }

    double target_and_residuals(std::span<const double> p, double& residual_max) {
        decode(p);
        bank_ = U_;
        residual_max = 0.0;
        residual_sq_ = 0.0;
        for (int i = 0; i < n_; ++i) {
            bank_[i] = D_[i];
            const double r = joint_probability_statevector(*state_, bank_, plus_);
            residual_sq_ += r * r;
            residual_max = std::max(residual_max, r);
            bank_[i] = U_[i];
        }
        const double r_last = joint_probability_statevector(*state_, D_, minus_);
        residual_sq_ += r_last * r_last;
        residual_max = std::max(residual_max, r_last);
        return joint_probability_statevector(*state_, U_, plus_);
    }

    // Negated penalty merit: -(target - mu * sum residual^2).
    double operator()(std::span<const double> p) {
        double rmax = 0.0;
        const double t = target_and_residuals(p, rmax);
        ++evaluations;
        if (rmax <= feasible_mark_ && t > max_probability_seen)
            max_probability_seen = t;
        return -(t - mu_ * residual_sq_);
    }
    double operator()(const std::vector<double>& p) {
        return (*this)(std::span<const double>(p));
    }

    const std::vector<MeasurementSetting>& U() const { return U_; }
    const std::vector<MeasurementSetting>& D() const { return D_; }

    std::uint64_t evaluations = 0;
    double max_probability_seen = 0.0;

private:
    const StateVector* state_;
    int n_;
    double mu_;
    double residual_sq_ = 0.0;
    double feasible_mark_ = 1e-8;
    std::vector<MeasurementSetting> U_, D_, bank_;
    std::vector<Outcome> plus_, minus_;
};

} // namespace detail

// Penalty-method maximization of the Hardy target over all 4N raw angles for
// an arbitrary state (the GHZ comparison path). The penalty weight grows by
// penalty_growth until the worst constraint probability drops below
// residual_target; starts that never get there are discarded, and if none
// survives an infeasible_error carries the best residual reached.
inline OptResult maximize_generic(const StateVector& state, const OptOptions& opts) {
    opts.validate();
    const int n = state.n;
    if (n < 2 || n > 12)
        throw validation_error("maximize_generic: qubit count out of [2, 12]");
    const int dim = 4 * n;

    struct GenericOutcome {
        double target = -1.0;
        double residual_max = 1.0;
        std::vector<double> params;
        bool converged = false;
        std::uint64_t evaluations = 0;
        double max_probability_seen = 0.0;
    };
    std::vector<GenericOutcome> outcomes(opts.starts);

    parallel_for_index(opts.starts, opts.threads, [&](std::size_t s) {
        GenericOutcome& out = outcomes[s];
        Rng rng(opts.seed, static_cast<std::uint64_t>(s));
        std::vector<double> x(dim);
        for (int i = 0; i < n; ++i) {
            x[i] = rng.uniform(0.0, half_pi);
            x[n + i] = rng.uniform(0.0, two_pi);
            x[2 * n + i] = rng.uniform(0.0, half_pi);
            x[3 * n + i] = rng.uniform(0.0, two_pi);
        }
        detail::GenericObjective obj(state, opts.penalty_initial);
        SimplexOptions nm{opts.max_iters, opts.f_tol, 1e-13};
        std::vector<double> step(dim, 0.4);
        double mu = opts.penalty_initial;
        double rmax = 1.0;
        for (int round = 0; round < 24; ++round) {
            obj.set_mu(mu);
            SimplexResult r = nelder_mead(obj, x, step, nm);
            x = std::move(r.x);
            out.converged = r.converged;
            obj.target_and_residuals(x, rmax);
            if (rmax <= opts.residual_target) break;
            if (mu > 1e14) break;
            mu *= opts.penalty_growth;
            std::fill(step.begin(), step.end(), 0.05);
        }
        if (rmax <= opts.residual_target * 1e4) {
            // polish at the final penalty weight to squeeze the residuals
            obj.set_mu(std::max(mu, 1e10));
            const double f0 = obj(x);
            SimplexResult p = fd_polish(obj, x, f0, opts.f_tol);
            x = std::move(p.x);
            obj.target_and_residuals(x, rmax);
        }
        out.target = obj.target_and_residuals(x, out.residual_max);
        out.params = std::move(x);
        out.evaluations = obj.evaluations;
        out.max_probability_seen = obj.max_probability_seen;
    });

    OptResult res;
    int best = -1;
    double best_residual = 1.0;
    for (int s = 0; s < opts.starts; ++s) {
        res.evaluations += outcomes[s].evaluations;
        res.max_eval_probability =
            std::max(res.max_eval_probability, outcomes[s].max_probability_seen);
        if (outcomes[s].converged) ++res.starts_converged;
        best_residual = std::min(best_residual, outcomes[s].residual_max);
        if (outcomes[s].residual_max <= opts.residual_target &&
            (best < 0 || outcomes[s].target > outcomes[best].target))
            best = s;
    }
    if (best < 0)
        throw infeasible_error("maximize_generic: no start reached residual target " +
                                   std::to_string(opts.residual_target) +
                                   " (best residual " + std::to_string(best_residual) + ")",
                               best_residual);

    const GenericOutcome& win = outcomes[best];
    res.best_start = best;
    res.best_probability = win.target;
    res.residual_max = win.residual_max;
    res.config.n = n;
    // generic states carry no W amplitudes; the config keeps the empty marker
    detail::GenericObjective obj(state, 0.0);
    obj.decode(win.params);
    std::vector<MeasurementSetting> U(n), D(n);
    for (int i = 0; i < n; ++i) {
        U[i] = canonical_setting(obj.U()[i].phi, obj.U()[i].theta);
        D[i] = canonical_setting(obj.D()[i].phi, obj.D()[i].theta);
    }
    res.config.U = std::move(U);
    res.config.D = std::move(D);
    return res;
}

struct AmplitudeGridSpec {
    int resolution = 64;
    double margin = 0.01; // radians trimmed from both ends of [0, pi/2]

    void validate() const {
        if (resolution < 2) throw validation_error("scan: resolution must be >= 2");
        if (!(margin > 0.0 && margin < std::numbers::pi / 4))
            throw validation_error("scan: margin must be in (0, pi/4)");
    }
};

struct ScanCell {
    double alpha = 0.0;
    double beta = 0.0;
    double probability = 0.0;
    bool ok = false;
};

// Row-major over the (alpha, beta) grid: beta increases row by row (top to
// bottom), alpha increases left to right inside a row. Amplitudes follow the
// spherical parameterization a = (cos b cos a, cos b sin a, sin b).
struct ScanResult {
    AmplitudeGridSpec grid;
    std::vector<ScanCell> cells;

    const ScanCell& at(int beta_row, int alpha_col) const {
        return cells[std::size_t(beta_row) * grid.resolution + alpha_col];
    }
};

inline ScanResult scan_amplitudes(const AmplitudeGridSpec& grid, const OptOptions& opts) {
    grid.validate();
    opts.validate();
    const int r = grid.resolution;
    const double lo = grid.margin;
    const double h = (half_pi - 2.0 * grid.margin) / (r - 1);

    ScanResult out;
    out.grid = grid;
    out.cells.resize(std::size_t(r) * r);

    parallel_for_index(out.cells.size(), opts.threads, [&](std::size_t c) {
        ScanCell& cell = out.cells[c];
        const int bi = static_cast<int>(c) / r;
        const int ai = static_cast<int>(c) % r;
        cell.alpha = lo + ai * h;
        cell.beta = lo + bi * h;
        OptOptions cell_opts = opts;
        cell_opts.seed = detail::derive_seed(opts.seed, c);
        cell_opts.threads = 1; // cells are the unit of parallelism
        try {
            const Amplitudes a({std::cos(cell.beta) * std::cos(cell.alpha),
                                std::cos(cell.beta) * std::sin(cell.alpha),
                                std::sin(cell.beta)});
            OptResult best = maximize_w_violation(a, cell_opts);
            cell.probability = best.best_probability;
            cell.ok = true;
        } catch (const std::exception&) {
            cell.probability = 0.0;
            cell.ok = false;
        }
    });
    return out;
}

// Violation probabilities of perfect W states for a range of qubit counts.
inline std::vector<std::pair<int, double>>
perfect_w_table(int n_min, int n_max, const OptOptions& opts) {
    if (!(3 <= n_min && n_min <= n_max && n_max <= 12))
        throw validation_error("perfect_w_table: need 3 <= n_min <= n_max <= 12");
    std::vector<std::pair<int, double>> rows;
    rows.reserve(n_max - n_min + 1);
    for (int n = n_min; n <= n_max; ++n) {
        OptOptions o = opts;
        o.seed = detail::derive_seed(opts.seed, static_cast<std::uint64_t>(n));
        rows.emplace_back(n, maximize_w_violation(Amplitudes::uniform(n), o).best_probability);
    }
    return rows;
}

} // namespace hardyw
