#include "hardyw/quantum.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hardyw/rng.hpp"

using namespace hardyw;

namespace {

constexpr double inv_sqrt3 = 0.5773502691896258;

std::vector<MeasurementSetting> settings3(double phi, double theta) {
    return std::vector<MeasurementSetting>(3, {phi, theta});
}

} // namespace

TEST(Amplitudes, ValidatesAndNormalizes) {
    const Amplitudes a({inv_sqrt3, inv_sqrt3, inv_sqrt3});
    EXPECT_EQ(a.size(), 3);
    EXPECT_NEAR(a[0] * a[0] + a[1] * a[1] + a[2] * a[2], 1.0, 1e-15);

    // printed to six digits, squared sum off by ~1e-6: renormalized
    const Amplitudes vb({0.448473, 0.632011, 0.632008});
    double s2 = 0.0;
    for (double v : vb.values()) s2 += v * v;
    EXPECT_NEAR(s2, 1.0, 1e-12);

    EXPECT_THROW(Amplitudes({0.5, 0.5}), validation_error);          // far from 1
    EXPECT_THROW(Amplitudes({1.0}), validation_error);               // N < 2
    EXPECT_THROW(Amplitudes({0.0, 1.0}), validation_error);          // zero entry
    EXPECT_THROW(Amplitudes({-inv_sqrt3, inv_sqrt3, inv_sqrt3}), validation_error);
}

TEST(BuildStates, WStatePlacesAmplitudesMsbFirst) {
    const StateVector w3 = build_w_state(Amplitudes::uniform(3));
    ASSERT_EQ(w3.amps.size(), 8u);
    // qubit 1 = most significant bit: |100> = 4, |010> = 2, |001> = 1
    EXPECT_NEAR(w3.amps[4].real(), inv_sqrt3, 1e-15);
    EXPECT_NEAR(w3.amps[2].real(), inv_sqrt3, 1e-15);
    EXPECT_NEAR(w3.amps[1].real(), inv_sqrt3, 1e-15);
    for (std::size_t i : {0, 3, 5, 6, 7}) EXPECT_EQ(w3.amps[i], cplx(0.0));
    EXPECT_NEAR(w3.norm2(), 1.0, 1e-12);

    const StateVector w2 = build_w_state(Amplitudes::uniform(2));
    EXPECT_NEAR(w2.amps[2].real(), 1.0 / std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(w2.amps[1].real(), 1.0 / std::numbers::sqrt2, 1e-15);

    const StateVector wvb = build_w_state(Amplitudes({0.448473, 0.632011, 0.632008}));
    EXPECT_NEAR(wvb.norm2(), 1.0, 1e-12);
}

TEST(BuildStates, GhzEndpoints) {
    const StateVector g3 = build_ghz_state(3);
    EXPECT_NEAR(g3.amps.front().real(), 1.0 / std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(g3.amps.back().real(), 1.0 / std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(g3.norm2(), 1.0, 1e-12);

    const StateVector g10 = build_ghz_state(10);
    EXPECT_EQ(g10.amps.size(), 1024u);
    int nonzero = 0;
    for (const cplx& c : g10.amps)
        if (c != cplx(0.0)) ++nonzero;
    EXPECT_EQ(nonzero, 2);

    EXPECT_THROW(build_ghz_state(1), validation_error);
    EXPECT_THROW(build_ghz_state(21), validation_error);
}

TEST(Eigenstate, CanonicalCases) {
    const auto e1 = eigenstate({0.0, 0.0}, Outcome::plus);
    EXPECT_NEAR(std::abs(e1[0] - cplx(1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(e1[1]), 0.0, 1e-15);

    const auto e2 = eigenstate({std::numbers::pi / 4, 0.0}, Outcome::minus);
    EXPECT_NEAR(e2[0].real(), 1.0 / std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(e2[1].real(), -1.0 / std::numbers::sqrt2, 1e-15);

    const auto e3 = eigenstate({half_pi, std::numbers::pi}, Outcome::plus);
    EXPECT_NEAR(std::abs(e3[0]), 0.0, 1e-15);
    EXPECT_NEAR(e3[1].real(), -1.0, 1e-15);
    EXPECT_NEAR(e3[1].imag(), 0.0, 1e-15);
}

TEST(Eigenstate, PairIsOrthonormal) {
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        const MeasurementSetting s{rng.uniform(0.0, half_pi), rng.uniform(0.0, two_pi)};
        const auto p = eigenstate(s, Outcome::plus);
        const auto m = eigenstate(s, Outcome::minus);
        EXPECT_NEAR(std::norm(p[0]) + std::norm(p[1]), 1.0, 1e-14);
        EXPECT_NEAR(std::norm(m[0]) + std::norm(m[1]), 1.0, 1e-14);
        EXPECT_NEAR(std::abs(std::conj(p[0]) * m[0] + std::conj(p[1]) * m[1]), 0.0, 1e-14);
    }
}

TEST(JointProbability, WStateExamples) {
    const StateVector w3 = build_w_state(Amplitudes::uniform(3));
    const std::vector<Outcome> ppp(3, Outcome::plus);

    // all settings |0>: W has no |000> component
    EXPECT_EQ(joint_probability_statevector(w3, settings3(0.0, 0.0), ppp), 0.0);

    // qubit 1 projected on |1>, others on |0>: weight a_1^2 = 1/3
    const std::vector<Outcome> mpp{Outcome::minus, Outcome::plus, Outcome::plus};
    EXPECT_NEAR(joint_probability_statevector(w3, settings3(0.0, 0.0), mpp), 1.0 / 3.0,
                1e-14);

    const StateVector g3 = build_ghz_state(3);
    EXPECT_NEAR(joint_probability_statevector(g3, settings3(std::numbers::pi / 4, 0.0), ppp),
                0.25, 1e-14);

    const std::vector<MeasurementSetting> two(2, {0.3, 0.4});
    EXPECT_THROW(joint_probability_statevector(w3, two, ppp), validation_error);
}

TEST(JointProbability, OutcomeCompleteness) {
    Rng rng(17);
    for (int n : {2, 4, 6, 8}) {
        std::vector<double> raw(n);
        double s2 = 0.0;
        for (double& v : raw) {
            v = rng.uniform(0.1, 1.0);
            s2 += v * v;
        }
        for (double& v : raw) v /= std::sqrt(s2);
        const StateVector psi = build_w_state(Amplitudes(std::move(raw)));
        std::vector<MeasurementSetting> settings(n);
        for (auto& s : settings)
            s = {rng.uniform(0.0, half_pi), rng.uniform(0.0, two_pi)};
        double total = 0.0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            std::vector<Outcome> out(n);
            for (int q = 0; q < n; ++q)
                out[q] = (mask >> q) & 1 ? Outcome::minus : Outcome::plus;
            total += joint_probability_statevector(psi, settings, out);
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(QuadraticForm, VanishesWhenAllPhiZero) {
    const Amplitudes a = Amplitudes::uniform(3);
    const std::vector<Outcome> ppp(3, Outcome::plus);
    const auto f = quadratic_form(a, settings3(0.0, 2.1), ppp);
    for (double v : f.avec) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(f.via_q, 0.0);
    EXPECT_EQ(quadratic_form_probability(a, settings3(0.0, 0.7), ppp), 0.0);
}

TEST(QuadraticForm, EqualThetasGiveRankOneAllOnes) {
    Rng rng(23);
    for (int k = 0; k < 20; ++k) {
        const double theta = rng.uniform(0.0, two_pi);
        std::vector<MeasurementSetting> s(3);
        for (auto& m : s) m = {rng.uniform(0.0, half_pi), theta};
        const Amplitudes a = Amplitudes::uniform(3);
        const std::vector<Outcome> ppp(3, Outcome::plus);
        const auto f = quadratic_form(a, s, ppp);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_NEAR(f.Q[i][j], 1.0, 1e-12);
        const double sum = f.avec[0] + f.avec[1] + f.avec[2];
        EXPECT_NEAR(f.via_q, sum * sum, 1e-14);
    }
}

TEST(QuadraticForm, MatchesOracleAndFactorization) {
    Rng rng(29);
    const Amplitudes a = Amplitudes::uniform(3);
    double max_diff = 0.0, max_fact = 0.0;
    for (int k = 0; k < 1000; ++k) {
        std::vector<MeasurementSetting> s(3);
        std::vector<Outcome> o(3);
        std::array<double, 3> theta{};
        for (int i = 0; i < 3; ++i) {
            s[i] = {rng.uniform(0.0, half_pi), rng.uniform(0.0, two_pi)};
            o[i] = rng.coin() ? Outcome::plus : Outcome::minus;
            theta[i] = outcome_setting(s[i], o[i]).theta;
        }
        const auto f = quadratic_form(a, s, o);
        const StateVector psi = build_w_state(a);
        max_diff = std::max(
            max_diff, std::abs(f.via_q - joint_probability_statevector(psi, s, o)));
        max_diff = std::max(max_diff, std::abs(f.via_q - f.via_b));
        // Q = B^T B entrywise
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double bij = std::cos(theta[i]) * std::cos(theta[j]) +
                                   std::sin(theta[i]) * std::sin(theta[j]);
                max_fact = std::max(max_fact, std::abs(f.Q[i][j] - bij));
            }
    }
    EXPECT_LE(max_diff, 1e-10);
    EXPECT_LE(max_fact, 1e-12);
}

TEST(Clamping, NearMissesClampFarMissesThrow) {
    EXPECT_EQ(clamp_probability(-5e-13), 0.0);
    EXPECT_EQ(clamp_probability(1.0 + 5e-13), 1.0);
    EXPECT_EQ(clamp_probability(0.25), 0.25);
    EXPECT_THROW(clamp_probability(-1e-9), internal_error);
    EXPECT_THROW(clamp_probability(1.0 + 1e-9), internal_error);
}

TEST(CanonicalSetting, FoldsArbitraryAngles) {
    Rng rng(31);
    for (int k = 0; k < 200; ++k) {
        const double phi = rng.uniform(-8.0, 8.0);
        const double theta = rng.uniform(-8.0, 8.0);
        const MeasurementSetting c = canonical_setting(phi, theta);
        EXPECT_GE(c.phi, 0.0);
        EXPECT_LE(c.phi, half_pi);
        EXPECT_GE(c.theta, 0.0);
        EXPECT_LT(c.theta, two_pi);
        // same physical eigenstate up to global phase
        const cplx a0(std::cos(phi), 0.0);
        const cplx a1 = std::polar(1.0, theta) * std::sin(phi);
        const auto e = eigenstate(c, Outcome::plus);
        const double overlap =
            std::abs(std::conj(a0) * e[0] + std::conj(a1) * e[1]);
        EXPECT_NEAR(overlap, 1.0, 1e-12);
    }
}
