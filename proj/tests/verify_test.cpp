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
// Verification harness: quadrature, residuals, Laurent coefficients, loop fluxes.

#include <abzero/verify.hpp>

#include <gtest/gtest.h>

#include <random>

namespace {

using namespace abzero;

// integral over the plane of |z|^-2a |z - 1|^-2b for a, b < 1 < a + b
double two_point_integral(double a, double b)
{
    auto g = [](double x) { return std::tgamma(x) / std::tgamma(1 - x); };
    return pi * g(1 - a) * g(1 - b) * g(a + b - 1);
}

TEST(Quadrature, SingularDiscCalibration)
{
    for (double th : {0.25, 0.5, 0.75}) {
        auto r = disc_integral([th](cplx z) { return std::pow(std::abs(z), -2 * th); }, 0.0, 1.0, {{0.0, -2 * th}});
        EXPECT_NEAR(r.value / (pi / (1 - th)), 1.0, 1e-8);
    }
}

TEST(Quadrature, OffCentreSingularity)
{
    cplx p(0.7, -0.4);
    auto r = disc_integral([p](cplx z) { return std::pow(std::abs(z - p), -1.0); }, p, 1.0, {{p, -1.0}});
    EXPECT_NEAR(r.value, 2 * pi, 1e-8);
    // the same point seen from a disc centred elsewhere
    auto s = disc_integral([p](cplx z) { return std::pow(std::abs(z - p), -1.0); }, 0.0, 3.0, {{p, -1.0}});
    auto t = disc_integral([p](cplx z) { return std::pow(std::abs(z - p), -1.0); }, p, 2.0, {{p, -1.0}});
    EXPECT_GT(s.value, t.value);
}

TEST(Plane, Gaussian)
{
    DecayHint h;
    h.kind = DecayHint::Kind::Gaussian;
    auto q = plane_integral([](cplx z) { return std::exp(-std::norm(z)); }, [](double) { return std::vector<std::pair<cplx, double>>{}; }, h);
    EXPECT_EQ(q.flag, L2Flag::Convergent);
    EXPECT_NEAR(q.value, pi, 1e-6);
}

TEST(Plane, PowerLawWithKnownRatio)
{
    DecayHint h;
    h.kind = DecayHint::Kind::PowerLaw;
    h.ratio = 0.25;
    auto q = plane_integral([](cplx z) { return 1.0 / std::pow(1 + std::norm(z), 2); },
                            [](double) { return std::vector<std::pair<cplx, double>>{}; }, h);
    EXPECT_EQ(q.flag, L2Flag::Convergent);
    EXPECT_NEAR(q.value / pi, 1.0, 1e-5);
    // partial integrals are nondecreasing
    for (std::size_t i = 1; i < q.radii_trace.size(); ++i) EXPECT_GE(q.radii_trace[i].second, q.radii_trace[i - 1].second);
}

TEST(Plane, SlowDecayDiverges)
{
    DecayHint h;
    h.kind = DecayHint::Kind::PowerLaw;
    auto q = plane_integral([](cplx z) { return 1.0 / std::sqrt(1 + std::norm(z)); },
                            [](double) { return std::vector<std::pair<cplx, double>>{}; }, h);
    EXPECT_EQ(q.flag, L2Flag::Divergent);
}

TEST(L2, TwoSiteOracle)
{
    FluxConfiguration c;
    c.finite = {{0.0, 0.6}, {1.0, 0.6}};
    auto fam = build_zero_modes(c, decide(c, Spin::Plus), 1);
    auto q = l2_norm_squared(fam.members[0]);
    EXPECT_EQ(q.flag, L2Flag::Convergent);
    EXPECT_NEAR(q.value / two_point_integral(0.6, 0.6), 1.0, 1e-5);
}

TEST(L2, CandidateDivergesBelowThreshold)
{
    FluxConfiguration c;
    c.finite = {{0.0, 0.3}, {1.0, 0.4}};
    EXPECT_EQ(l2_norm_squared(build_candidate(c, Spin::Plus)).flag, L2Flag::Divergent);
}

TEST(L2, NonIntegrableSingularityRejected)
{
    FluxConfiguration c;
    c.finite = {{0.0, 0.5}};
    auto phi = build_scalar_potential(c);
    WaveFunction psi(Spin::Plus, phi, {{std::make_shared<LinearTerm>(0.0), -1}}, DecayHint{}, "bad");
    EXPECT_THROW(l2_norm_squared(psi), precondition_error);
}

TEST(Residual, FiniteModesSecondOrder)
{
    FluxConfiguration c;
    c.finite = {{0.0, 0.3}, {cplx(1.0, 0.5), 0.4}, {cplx(-0.5, 1.0), 0.9}};
    for (Spin s : {Spin::Plus, Spin::Minus}) {
        auto v = decide(c, s);
        ASSERT_TRUE(exists(v.status));
        auto psi = build_zero_modes(c, v, 1).members[0];
        auto rep = annihilation_residual(psi, choose_probe_region(psi));
        EXPECT_NEAR(rep.order, 2.0, 0.2) << to_string(s);
        EXPECT_LT(rep.residuals.back(), 1e-3);
    }
}

TEST(Residual, FieldModesSecondOrder)
{
    FluxConfiguration c;
    c.uniform_flux_density = 0.3;
    c.lattices.push_back({{1.0, I}, {{0.0, 0.5}}});
    for (Spin s : {Spin::Plus, Spin::Minus}) {
        auto psi = build_zero_modes(c, decide(c, s), 2).members[1];
        auto rep = annihilation_residual(psi, choose_probe_region(psi));
        EXPECT_NEAR(rep.order, 2.0, 0.2);
    }
}

TEST(Residual, WrongPotentialDoesNotConverge)
{
    FluxConfiguration c, d;
    c.finite = {{0.0, 0.6}, {1.0, 0.6}};
    d.finite = {{0.0, 0.7}, {1.0, 0.6}};
    auto psi = build_zero_modes(c, decide(c, Spin::Plus), 1).members[0];
    VectorPotential a(build_scalar_potential(d));
    auto rep = annihilation_residual(psi, a, choose_probe_region(psi));
    EXPECT_LT(std::abs(rep.order), 0.1);
    EXPECT_GT(rep.residuals.back(), 1e-2);
}

TEST(Residual, ProbeTooCloseToSite)
{
    FluxConfiguration c;
    c.finite = {{0.0, 0.6}, {1.0, 0.6}};
    auto psi = build_zero_modes(c, decide(c, Spin::Plus), 1).members[0];
    ProbeRegion p{cplx(0.5, 0.0), 0.45, 0.55};
    EXPECT_THROW(annihilation_residual(psi, p), precondition_error);
}

TEST(Residual, ProbeRegionAvoidsSites)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    auto psi = build_zero_modes(c, decide(c, Spin::Plus), 1).members[0];
    auto p = choose_probe_region(psi);
    for (const auto& s : psi.potential().sites_within(10.0)) EXPECT_GT(std::abs(s.position - p.centre), p.r_outer);
}

TEST(Laplacian, PotentialSourcesMatchField)
{
    FluxConfiguration c;
    c.uniform_flux_density = 0.45;
    c.finite = {{0.0, 0.3}, {cplx(2.0, 1.0), 0.8}};
    c.chains.push_back({cplx(0.0, 1.5), {{-3.0, 0.5}}});
    auto phi = build_scalar_potential(c);
    auto rep = laplacian_residual(*phi, ProbeRegion{cplx(1.0, -1.0), 0.2, 0.5});
    EXPECT_TRUE(rep.exact || rep.order > 1.5);
    EXPECT_LT(rep.residuals.back(), 1e-4);
}

TEST(Laurent, KnownCoefficient)
{
    auto r = laurent_coefficient([](cplx z) { return std::exp(z); }, 0.0, 1.0, 3);
    EXPECT_NEAR(std::abs(r.coefficient - 1.0 / 6.0), 0.0, 1e-14);
    auto p = laurent_coefficient([](cplx z) { return 1.0 / (z * z) + z; }, 0.0, 0.5, -2);
    EXPECT_NEAR(std::abs(p.coefficient - 1.0), 0.0, 1e-13);
}

TEST(Laurent, CauchyInequalityOnRandomFunctions)
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> deg(-3, 6);
    for (int i = 0; i < 20; ++i) {
        std::vector<cplx> coef(10);
        for (auto& a : coef) a = cplx(g(rng), g(rng));
        cplx pole(3.0 + std::abs(g(rng)), g(rng));
        auto f = [&](cplx z) {
            cplx s = 0.0;
            for (int k = 0; k < 10; ++k) s += coef[k] * std::pow(z, k - 3);
            return s + 1.0 / (z - pole);
        };
        auto rep = laurent_coefficient(f, 0.0, 1.0 + 0.1 * i, deg(rng));
        EXPECT_TRUE(rep.bound_holds);
    }
}

TEST(LoopFlux, NestedRectangles)
{
    FluxConfiguration c;
    c.uniform_flux_density = 0.2;
    c.finite = {{0.0, 0.3}, {cplx(2.0, 0.5), 0.45}};
    VectorPotential a(build_scalar_potential(c));
    for (auto rect : {Rectangle{-0.5, 0.5, -0.5, 0.5}, Rectangle{-1.0, 3.0, -1.0, 1.0}, Rectangle{4.0, 5.0, 4.0, 6.0}}) {
        auto rep = loop_flux(a, rect);
        EXPECT_NEAR(rep.circulation, rep.expected, 1e-8);
    }
    EXPECT_THROW(loop_flux(a, Rectangle{0.0, 1.0, -1.0, 1.0}), precondition_error);
}

}  // namespace
