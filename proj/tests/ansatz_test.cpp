/***************************************************************************
   Copyright 2026 The abzero Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
****************************************************************************/
// Potentials and zero-mode construction.

#include <abzero/ansatz.hpp>

#include <gtest/gtest.h>

#include <random>

namespace {

using namespace abzero;

ZeroModeFamily family(const FluxConfiguration& c, Spin s, int count, BuildOptions o = {})
{
    return build_zero_modes(c, decide(c, s), count, o);
}

FluxConfiguration two_sites(double a, double b)
{
    FluxConfiguration c;
    c.finite = {{0.0, a}, {1.0, b}};
    return c;
}

const cplx probes[] = {cplx(0.3, 0.7), cplx(-1.2, 0.4), cplx(2.5, -1.9), cplx(0.05, -0.02)};

TEST(Finite, SpinUpModulus)
{
    auto fam = family(two_sites(0.6, 0.6), Spin::Plus, 1);
    ASSERT_EQ(fam.members.size(), 1u);
    for (cplx z : probes)
        EXPECT_NEAR(fam.members[0].abs(z) / (std::pow(std::abs(z), -0.6) * std::pow(std::abs(z - 1.0), -0.6)), 1.0, 1e-13);
}

TEST(Finite, SpinDownModulus)
{
    auto fam = family(two_sites(0.3, 0.4), Spin::Minus, 1);
    ASSERT_EQ(fam.members.size(), 1u);
    for (cplx z : probes)
        EXPECT_NEAR(fam.members[0].abs(z) / (std::pow(std::abs(z), -0.7) * std::pow(std::abs(z - 1.0), -0.6)), 1.0, 1e-13);
    auto s = fam.members[0].singular_within(5.0);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_NEAR(fam.members[0].exponent_at(0.0), -0.7, 1e-14);
    EXPECT_NEAR(fam.members[0].exponent_at(1.0), -0.6, 1e-14);
}

TEST(Finite, FamilyTruncatedToMultiplicity)
{
    auto fam = family(two_sites(0.6, 0.6), Spin::Plus, 3);
    EXPECT_EQ(fam.members.size(), 1u);
    EXPECT_FALSE(fam.notice.empty());
}

TEST(Finite, PolynomialDegree)
{
    FluxConfiguration c;
    for (int k = 0; k < 5; ++k) c.finite.push_back({std::polar(1.0, 2 * pi * k / 5), 0.8});
    auto fam = family(c, Spin::Plus, 3);
    ASSERT_EQ(fam.members.size(), 3u);
    cplx z(0.4, 1.7);
    double base = fam.members[0].abs(z);
    for (int k = 1; k < 3; ++k) EXPECT_NEAR(fam.members[k].abs(z) / base, std::pow(std::abs(z), k), 1e-12);
}

TEST(Candidate, ConstantFactor)
{
    auto psi = build_candidate(two_sites(0.3, 0.4), Spin::Plus);
    for (cplx z : probes)
        EXPECT_NEAR(psi.abs(z) / (std::pow(std::abs(z), -0.3) * std::pow(std::abs(z - 1.0), -0.4)), 1.0, 1e-13);
    EXPECT_EQ(psi.decay_hint().kind, DecayHint::Kind::PowerLaw);
}

TEST(Lattice, ModulusUsesModifiedSigma)
{
    FluxConfiguration c;
    c.lattices.push_back({{1.0, I}, {{0.0, 0.5}}});
    auto fam = family(c, Spin::Plus, 3);
    ASSERT_EQ(fam.members.size(), 3u);
    LatticeBasis b{1.0, I};
    for (int k = 0; k < 3; ++k)
        for (cplx z : probes) {
            double ex = std::pow(std::abs(z), k) / std::sqrt(std::abs(sigma_tilde(z, b)));
            EXPECT_NEAR(fam.members[k].abs(z) / ex, 1.0, 1e-11);
        }
}

TEST(Chain, SincMembers)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    auto fam = family(c, Spin::Plus, 3);
    ASSERT_EQ(fam.members.size(), 3u);
    ASSERT_TRUE(fam.alpha_range);
    EXPECT_NEAR(fam.alpha_range->hi, pi / 2, 1e-15);
    for (std::size_t m = 0; m < 3; ++m) {
        double a = fam.alphas[m];
        EXPECT_NEAR(a, pi / 2 * (m + 1) / 4.0, 1e-15);
        for (cplx z : probes) {
            double ex = std::abs(std::sin(a * z) / z) / std::sqrt(std::abs(std::sin(pi * z)));
            EXPECT_NEAR(fam.members[m].abs(z) / ex, 1.0, 1e-11);
        }
    }
}

TEST(Chain, AlphaOutsideRangeRejected)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    BuildOptions o;
    o.alpha = 2.0;
    EXPECT_THROW(family(c, Spin::Plus, 1, o), domain_error);
    o.alpha = 1.0;
    auto fam = family(c, Spin::Plus, 2, o);
    EXPECT_DOUBLE_EQ(fam.alphas.back(), 1.0);
}

TEST(Irregular, ModulusFormula)
{
    FluxConfiguration c;
    c.irregular = IrregularComponent{3, 0.5};
    BuildOptions o;
    o.alpha = pi / 4;
    auto fam = family(c, Spin::Plus, 1, o);
    for (cplx z : probes) {
        cplx z3 = z * z * z;
        double ex = std::abs(std::sin(pi / 4 * z3) / z3) / std::sqrt(std::abs(std::sin(pi * z3) / (z * z)));
        EXPECT_NEAR(fam.members[0].abs(z) / ex, 1.0, 1e-11);
    }
}

TEST(Potential, GradientMatchesDifferences)
{
    FluxConfiguration c;
    c.uniform_flux_density = 0.3;
    c.finite = {{cplx(0.5, 0.5), 0.4}};
    c.lattices.push_back({{1.0, cplx(0.2, 1.1)}, {{0.0, 0.5}}});
    auto phi = build_scalar_potential(c);
    const double h = 1e-6;
    for (cplx z : {cplx(0.3, 0.2), cplx(-1.4, 2.25)}) {
        auto g = phi->gradient(z);
        EXPECT_NEAR(g[0], (phi->value(z + h) - phi->value(z - h)) / (2 * h), 1e-6);
        EXPECT_NEAR(g[1], (phi->value(z + I * h) - phi->value(z - I * h)) / (2 * h), 1e-6);
    }
    EXPECT_NEAR(phi->source_density(), 2 * pi * 0.3, 1e-15);
}

TEST(Potential, SitesCarryTheirFlux)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.25}}});
    c.finite = {{cplx(0.5, 1.0), 0.6}};
    auto phi = build_scalar_potential(c);
    auto s = phi->sites_within(1.2);
    double total = 0;
    for (const auto& x : s) total += x.theta;
    EXPECT_NEAR(total, 3 * 0.25 + 0.6, 1e-12);
}

TEST(Complement, FluxesAndField)
{
    FluxConfiguration c;
    c.uniform_flux_density = 0.3;
    c.finite = {{cplx(1.0, 2.0), 0.3}};
    auto d = flux_complement(c);
    EXPECT_DOUBLE_EQ(d.uniform_flux_density, -0.3);
    EXPECT_NEAR(d.finite[0].theta, 0.7, 1e-15);
    EXPECT_EQ(d.finite[0].position, cplx(1.0, 2.0));
}

TEST(Sinc, SeriesMatchesClosedForm)
{
    for (cplx w : {cplx(0.999e-3, 0.0), cplx(0.0, 1.001e-3), cplx(0.7e-3, 0.7e-3)}) {
        cplx direct = std::log(std::sin(w) / w);
        EXPECT_LT(std::abs(detail::log_sinc(w) - direct), 1e-15);
        EXPECT_LT(std::abs(detail::log_sinc_derivative(w) - (1.0 / std::tan(w) - 1.0 / w)), 1e-9);
    }
    EXPECT_EQ(detail::log_sinc(0.0), 0.0);
}

TEST(Exotic, MatchesDirectFormulaAwayFromCancellations)
{
    auto s = [](cplx w) {
        cplx v = std::sqrt(w);
        return std::abs(v) < 1e-8 ? cplx(1.0) : std::sin(v) / v;
    };
    for (cplx t : {cplx(0.3, 1.0), cplx(-7.1, 2.2), cplx(20.3, 1.5), cplx(5.0, 4.0), cplx(-2.0, 0.5)}) {
        cplx direct = (I / pi) * (std::sin(t) / t) / (s(pi * t) * s(-pi * t));
        cplx lf = ExoticTerm::log_f(t);
        EXPECT_LT(std::abs(std::exp(lf) - direct), 1e-11 * std::abs(direct));
    }
}

TEST(Exotic, ContinuousThroughCancelledZeros)
{
    // sin t vanishes at t = pi k^2 together with s(-pi t); the ratio stays finite
    for (int k = 1; k <= 3; ++k)
        for (double sgn : {1.0, -1.0}) {
            cplx t0 = sgn * pi * k * k;
            double v0 = ExoticTerm::log_f(t0).real();
            ASSERT_TRUE(std::isfinite(v0));
            for (cplx e : {cplx(1e-7, 0), cplx(0, 1e-7), cplx(-1e-7, 1e-7)})
                EXPECT_NEAR(ExoticTerm::log_f(t0 + e).real(), v0, 1e-5);
        }
    // across the switch between the cancelled and the plain branch
    const double k = 2.0;
    for (double off : {0.49, 0.5, 0.51}) {
        cplx v(k * pi + off, 0.3);
        cplx t = v * v / pi;
        cplx a = ExoticTerm::log_f(t), b = ExoticTerm::log_f(t * (1.0 + 1e-9));
        EXPECT_NEAR(a.real(), b.real(), 1e-6);
    }
}

TEST(Exotic, DecaysAlongRealAxis)
{
    double prev = ExoticTerm::log_f(cplx(10.5, 0.5)).real();
    for (double x : {40.5, 160.5, 640.5}) {
        double v = ExoticTerm::log_f(cplx(x, 0.5)).real();
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(ParallelChains, PerturbedMembersBuild)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    c.chains.push_back({2.0, {{0.5, 0.5}}});
    c.perturbation.added.push_back({{{cplx(0.3, 1.0), cplx(-1.2, 0.7)}, std::nullopt}, 0.5});
    auto v = decide(c, Spin::Plus);
    ASSERT_TRUE(exists(v.status));
    auto fam = build_zero_modes(c, v, 2);
    ASSERT_EQ(fam.members.size(), 2u);
    for (cplx z : probes) EXPECT_TRUE(std::isfinite(fam.members[0].log_abs(z)));
}

}  // namespace
