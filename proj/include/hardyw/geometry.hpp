#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "hardyw/quantum.hpp"
#include "hardyw/vec2.hpp"

namespace hardyw {

// Representation vector of an observable/eigenvalue pair:
// (tan(phi) cos(theta), tan(phi) sin(theta)), infinite exactly at phi = pi/2.
// "Infinite" is an explicit variant; floating-point infinities never enter
// the probability formulas.
struct RepVector {
    bool finite = true;
    Vec2 xy{};

    static RepVector infinite() { return {false, {}}; }
};

inline RepVector rep_vector(const MeasurementSetting& s) {
    if (s.phi == half_pi) return RepVector::infinite();
    const double t = std::tan(s.phi);
    return {true, {t * std::cos(s.theta), t * std::sin(s.theta)}};
}

inline Vec2 finite_xy(const RepVector& r) {
    if (!r.finite)
        throw degenerate_error("representation vector at infinity in a finite-only formula");
    return r.xy;
}

// Inverse of rep_vector on the finite range; theta of the zero vector is 0.
inline MeasurementSetting setting_from_rep_vector(Vec2 r) {
    const double n = r.norm();
    if (n == 0.0) return {0.0, 0.0};
    double theta = std::atan2(r.y, r.x);
    if (theta < 0.0) theta += two_pi;
    if (theta >= two_pi || theta == 0.0) theta = 0.0; // fold 2*pi, drop -0
    return {std::atan(n), theta};
}

// Swap the two outcomes of one observable on unscaled representation
// vectors: r -> -r / ||r||^2. Involutive; undefined at 0 (the partner
// vector is infinite).
inline Vec2 conjugate_rep(Vec2 r) {
    const double n2 = r.norm2();
    if (n2 == 0.0)
        throw degenerate_error("conjugate_rep: zero vector (paired vector is infinite)");
    return r * (-1.0 / n2);
}

// Closed-form joint outcome probability for a generalized W state:
// P = ||sum t_i||^2 / prod(1 + ||t_i||^2 / a_i^2), t_i the scaled
// representation vectors of the outcome eigenstates.
inline double geo_joint_probability(const Amplitudes& a, std::span<const Vec2> t) {
    if (a.empty() || static_cast<int>(t.size()) != a.size())
        throw validation_error("geo_joint_probability: length mismatch");
    Vec2 s{};
    double den = 1.0;
    for (int i = 0; i < a.size(); ++i) {
        s += t[i];
        den *= 1.0 + t[i].norm2() / (a[i] * a[i]);
    }
    return clamp_probability(s.norm2() / den);
}

// Scaled representation vectors of a full Hardy parameterization:
// u_i = a_i v(U_i,+1), v_i = a_i v(D_i,+1), w_i = a_i v(D_i,-1),
// and their sums.
struct ScaledVectors {
    int n = 0;
    std::vector<Vec2> u_i, v_i, w_i;
    Vec2 u{}, v{}, w{};
};

// Full scenario: state amplitudes plus the two measurement banks.
struct HardyConfig {
    int n = 0;
    Amplitudes amplitudes;
    std::vector<MeasurementSetting> U, D;
};

// w-vectors are confined to norms in [eps_w, 1/eps_w]; outside that box the
// configuration is degenerate and carries no violation probability anyway.
inline constexpr double eps_w = 1e-8;

namespace detail {

inline void check_w_box(Vec2 w, const char* which) {
    const double n = w.norm();
    if (!(n >= eps_w && n <= 1.0 / eps_w))
        throw degenerate_error(std::string("hardy_config_from_w: ") + which +
                               " norm outside [1e-8, 1e8]");
}

// Core of the w-parameterization. `w` holds all n vectors (the dependent
// w_n = -sum already appended); writes u_i into `u_out` and returns u.
// No allocation: this is the optimizer's hot path.
inline Vec2 scaled_u_from_w(std::span<const double> a, std::span<const Vec2> w,
                            std::span<Vec2> u_out) {
    const int n = static_cast<int>(w.size());
    Vec2 v{};
    for (int i = 0; i < n; ++i) {
        const double a2 = a[i] * a[i];
        u_out[i] = w[i] * (-a2 / w[i].norm2()); // v_i for now
        v += u_out[i];
    }
    const Vec2 u = v * (-1.0 / double(n - 1));
    for (int i = 0; i < n; ++i) u_out[i] += u;
    return u;
}

inline double violation_probability_core(std::span<const double> a,
                                         std::span<const Vec2> w,
                                         std::span<Vec2> scratch) {
    const int n = static_cast<int>(w.size());
    const Vec2 u = scaled_u_from_w(a, w, scratch);
    double den = 1.0;
    for (int i = 0; i < n; ++i)
        den *= 1.0 + scratch[i].norm2() / (a[i] * a[i]);
    return u.norm2() / den;
}

} // namespace detail

// Build the feasible configuration determined by the free w-vectors
// (w_n := -sum of the others). The constraint relations fix everything:
// v_i = -a_i^2 w_i / ||w_i||^2, u = -v/(N-1), u_i = v_i + u, and the
// settings come from the unscaled representation vectors u_i/a_i, v_i/a_i.
// Every equation constraint of the resulting scenario vanishes identically.
inline std::pair<HardyConfig, ScaledVectors>
hardy_config_from_w(const Amplitudes& a, std::span<const Vec2> w_free) {
    const int n = a.size();
    if (static_cast<int>(w_free.size()) != n - 1)
        throw validation_error("hardy_config_from_w: expected N-1 free w-vectors");

    ScaledVectors sv;
    sv.n = n;
    sv.w_i.assign(w_free.begin(), w_free.end());
    Vec2 wsum{};
    for (const Vec2& wi : w_free) wsum += wi;
    sv.w_i.push_back(-wsum);
    for (int i = 0; i < n; ++i)
        detail::check_w_box(sv.w_i[i], i == n - 1 ? "dependent w_N" : "w_i");

    sv.v_i.resize(n);
    for (int i = 0; i < n; ++i) {
        const double a2 = a[i] * a[i];
        sv.v_i[i] = sv.w_i[i] * (-a2 / sv.w_i[i].norm2());
        sv.v += sv.v_i[i];
        sv.w += sv.w_i[i];
    }
    sv.u = sv.v * (-1.0 / double(n - 1));
    sv.u_i.resize(n);
    for (int i = 0; i < n; ++i)
        sv.u_i[i] = sv.v_i[i] + sv.u;

    HardyConfig cfg{n, a, {}, {}};
    cfg.U.reserve(n);
    cfg.D.reserve(n);
    for (int i = 0; i < n; ++i) {
        cfg.U.push_back(setting_from_rep_vector(sv.u_i[i] / a[i]));
        cfg.D.push_back(setting_from_rep_vector(sv.v_i[i] / a[i]));
    }
    return {std::move(cfg), std::move(sv)};
}

// P(U_1...U_N|+...+) of the configuration induced by w_free.
inline double violation_probability_from_w(const Amplitudes& a,
                                           std::span<const Vec2> w_free) {
    const int n = a.size();
    if (static_cast<int>(w_free.size()) != n - 1)
        throw validation_error("violation_probability_from_w: expected N-1 free w-vectors");
    std::vector<Vec2> w(w_free.begin(), w_free.end());
    Vec2 wsum{};
    for (const Vec2& wi : w_free) wsum += wi;
    w.push_back(-wsum);
    for (int i = 0; i < n; ++i)
        detail::check_w_box(w[i], i == n - 1 ? "dependent w_N" : "w_i");
    std::vector<Vec2> scratch(n);
    return clamp_probability(
        detail::violation_probability_core(a.values(), w, scratch));
}

// The N+1 equation-constraint probabilities, in order
// [P(D_1 U...|+...+), ..., P(U... D_N|+...+), P(D...D|-...-)],
// evaluated by the statevector oracle.
inline std::vector<double> constraint_residuals(const StateVector& state,
                                                const HardyConfig& c) {
    if (state.n != c.n)
        throw validation_error("constraint_residuals: dimension mismatch");
    const int n = c.n;
    std::vector<double> out;
    out.reserve(n + 1);
    std::vector<MeasurementSetting> settings(c.U);
    std::vector<Outcome> outs(n, Outcome::plus);
    for (int i = 0; i < n; ++i) {
        settings[i] = c.D[i];
        out.push_back(joint_probability_statevector(state, settings, outs));
        settings[i] = c.U[i];
    }
    outs.assign(n, Outcome::minus);
    out.push_back(joint_probability_statevector(state, c.D, outs));
    return out;
}

} // namespace hardyw
