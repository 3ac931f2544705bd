#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hardyw/errors.hpp"

namespace hardyw {

using cplx = std::complex<double>;

inline constexpr double half_pi = std::numbers::pi / 2.0;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Amplitude vector (a_1,...,a_N) of a generalized W state: strictly positive,
// squared sum 1. Inputs off by at most 1e-5 are renormalized (published values
// are printed to few digits); anything further off is rejected. The default
// state is empty, used where a scenario has no W amplitudes (e.g. a GHZ
// configuration); every validated instance has at least two entries.
class Amplitudes {
public:
    Amplitudes() = default;

    explicit Amplitudes(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 2)
            throw validation_error("amplitudes: need at least 2 entries");
        double s2 = 0.0;
        for (double a : values_) {
            if (!(a > 0.0))
                throw validation_error("amplitudes: entries must be strictly positive");
            s2 += a * a;
        }
        if (std::abs(s2 - 1.0) > 1e-5)
            throw validation_error("amplitudes: squared sum " + std::to_string(s2) +
                                   " too far from 1");
        // skip the rescale when already normalized to rounding error, so
        // parsing serialized amplitudes reproduces them bit for bit
        if (std::abs(s2 - 1.0) > 1e-13) {
            const double inv = 1.0 / std::sqrt(s2);
            for (double& a : values_) a *= inv;
        }
    }

    static Amplitudes uniform(int n) {
        if (n < 2) throw validation_error("amplitudes: need at least 2 entries");
        return Amplitudes(std::vector<double>(n, 1.0 / std::sqrt(double(n))));
    }

    int size() const { return static_cast<int>(values_.size()); }
    bool empty() const { return values_.empty(); }
    double operator[](int i) const { return values_[i]; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

// Dense n-qubit state, qubit 1 = most significant bit of the basis index.
struct StateVector {
    int n = 0;
    std::vector<cplx> amps;

    double norm2() const {
        double s = 0.0;
        for (const cplx& c : amps) s += std::norm(c);
        return s;
    }
};

inline constexpr int max_dense_qubits = 20;

// One-qubit +/-1 observable given by its +1 eigenstate
// cos(phi)|0> + e^{i theta} sin(phi)|1>, phi in [0, pi/2], theta in [0, 2pi).
struct MeasurementSetting {
    double phi = 0.0;
    double theta = 0.0;
};

enum class Outcome : int { plus = +1, minus = -1 };

inline int sign(Outcome o) { return static_cast<int>(o); }

inline std::array<cplx, 2> eigenstate(const MeasurementSetting& s, Outcome o) {
    const double c = std::cos(s.phi), sn = std::sin(s.phi);
    const cplx ph = std::polar(1.0, s.theta);
    if (o == Outcome::plus) return {cplx(c, 0.0), ph * sn};
    return {cplx(sn, 0.0), -ph * c};
}

// Canonical (phi, theta) of the outcome eigenstate itself: the -1 eigenstate
// of a setting at phi is the +1 eigenstate of a setting at pi/2 - phi with
// theta shifted by pi.
inline MeasurementSetting outcome_setting(const MeasurementSetting& s, Outcome o) {
    if (o == Outcome::plus) return s;
    double theta = s.theta + std::numbers::pi;
    if (theta >= two_pi) theta -= two_pi;
    return {half_pi - s.phi, theta};
}

// Fold an arbitrary (phi, theta) pair into the canonical parameter ranges
// without changing the physical eigenstate.
inline MeasurementSetting canonical_setting(double phi, double theta) {
    const cplx a(std::cos(phi), 0.0);
    const cplx b = std::polar(1.0, theta) * std::sin(phi);
    const double na = std::abs(a), nb = std::abs(b);
    if (na == 0.0) return {half_pi, 0.0};
    const double phase = a.real() < 0.0 ? -1.0 : 1.0;
    double th = std::arg(b * phase);
    if (nb < 1e-300) th = 0.0;
    if (th < 0.0) th += two_pi;
    if (th >= two_pi) th = 0.0;
    return {std::atan2(nb, na), th};
}

inline double clamp_probability(double p) {
    if (p >= 0.0 && p <= 1.0) return p;
    if (p < 0.0 && p >= -1e-12) return 0.0;
    if (p > 1.0 && p <= 1.0 + 1e-12) return 1.0;
    throw internal_error("probability " + std::to_string(p) + " outside [0,1]");
}

// |psi> = a_1|10...0> + a_2|01...0> + ... + a_N|00...1>
inline StateVector build_w_state(const Amplitudes& a) {
    const int n = a.size();
    if (n < 2) throw validation_error("build_w_state: empty amplitudes");
    if (n > max_dense_qubits)
        throw validation_error("build_w_state: dense representation capped at 20 qubits");
    StateVector sv{n, std::vector<cplx>(std::size_t(1) << n)};
    for (int i = 0; i < n; ++i)
        sv.amps[std::size_t(1) << (n - 1 - i)] = a[i];
    return sv;
}

// (|00...0> + |11...1>)/sqrt(2)
inline StateVector build_ghz_state(int n) {
    if (n < 2 || n > max_dense_qubits)
        throw validation_error("build_ghz_state: qubit count out of [2, 20]");
    StateVector sv{n, std::vector<cplx>(std::size_t(1) << n)};
    const double r = 1.0 / std::numbers::sqrt2;
    sv.amps.front() = r;
    sv.amps.back() = r;
    return sv;
}

// P = |<phi_1 ... phi_N|psi>|^2 by contracting one qubit at a time, last
// qubit (least significant bit) first. This is the brute-force oracle every
// closed-form path is checked against.
inline double joint_probability_statevector(const StateVector& state,
                                            std::span<const MeasurementSetting> settings,
                                            std::span<const Outcome> outcomes) {
    const int n = state.n;
    if (static_cast<int>(settings.size()) != n || static_cast<int>(outcomes.size()) != n)
        throw validation_error("joint_probability_statevector: length mismatch");
    std::vector<cplx> buf(state.amps.begin(), state.amps.end());
    std::size_t len = buf.size();
    for (int q = n - 1; q >= 0; --q) {
        const auto e = eigenstate(settings[q], outcomes[q]);
        const cplx c0 = std::conj(e[0]), c1 = std::conj(e[1]);
        len >>= 1;
        for (std::size_t k = 0; k < len; ++k)
            buf[k] = c0 * buf[2 * k] + c1 * buf[2 * k + 1];
    }
    return clamp_probability(std::norm(buf[0]));
}

// Quadratic-form route for N = 3 (second independent algebraic path):
// P = a'^T Q a' with Q_ij = cos(theta_i - theta_j) and
// a'_i = a_i sin(phi_i) prod_{j != i} cos(phi_j), plus the rank-2
// factorization Q = B^T B with B rows (cos theta_i), (sin theta_i).
struct QuadraticForm {
    std::array<std::array<double, 3>, 3> Q;
    std::array<double, 3> avec;
    double via_q = 0.0; // a'^T Q a'
    double via_b = 0.0; // ||B a'||^2
};

inline QuadraticForm quadratic_form(const Amplitudes& a,
                                    std::span<const MeasurementSetting> settings,
                                    std::span<const Outcome> outcomes) {
    if (a.size() != 3 || settings.size() != 3 || outcomes.size() != 3)
        throw validation_error("quadratic_form: defined for N = 3 only");
    std::array<double, 3> phi, theta;
    for (int i = 0; i < 3; ++i) {
        const MeasurementSetting s = outcome_setting(settings[i], outcomes[i]);
        phi[i] = s.phi;
        theta[i] = s.theta;
    }
    QuadraticForm f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            f.Q[i][j] = std::cos(theta[i] - theta[j]);
    for (int i = 0; i < 3; ++i) {
        double t = a[i] * std::sin(phi[i]);
        for (int j = 0; j < 3; ++j)
            if (j != i) t *= std::cos(phi[j]);
        f.avec[i] = t;
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            f.via_q += f.avec[i] * f.Q[i][j] * f.avec[j];
    double bx = 0.0, by = 0.0;
    for (int i = 0; i < 3; ++i) {
        bx += std::cos(theta[i]) * f.avec[i];
        by += std::sin(theta[i]) * f.avec[i];
    }
    f.via_b = bx * bx + by * by;
    return f;
}

inline double quadratic_form_probability(const Amplitudes& a,
                                         std::span<const MeasurementSetting> settings,
                                         std::span<const Outcome> outcomes) {
    return clamp_probability(quadratic_form(a, settings, outcomes).via_q);
}

} // namespace hardyw
