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
// Flux configurations: enumeration, normalisation, merging and set statistics.

#include <abzero/fluxcfg.hpp>

#include <gtest/gtest.h>

#include <random>

namespace {

using namespace abzero;

TEST(Enumerate, ChainSitesInDisc)
{
    ChainComponent ch{1.0, {{cplx(0.0, 0.5), 0.3}}};
    auto s = chain_sites_within(ch, 3.0);
    // |k + i/2| <= 3 for k = -2..2
    EXPECT_EQ(s.size(), 5u);
    for (const auto& p : s) EXPECT_LE(std::abs(p.position), 3.0);
}

TEST(Enumerate, LatticeCountGrowsLikeArea)
{
    LatticeComponent l{{1.0, cplx(0.5, 0.8)}, {{0.0, 0.5}}};
    for (double r : {20.0, 40.0}) {
        double n = static_cast<double>(lattice_sites_within(l, r).size());
        EXPECT_NEAR(n / (pi * r * r / 0.8), 1.0, 0.05);
    }
}

TEST(Enumerate, SequencePoints)
{
    PointSequence seq{cplx(0.0, 1.0), 1.0, 2.0, 0.5, 1};
    auto pts = points_within(seq, 10.0);
    for (std::size_t m = 0; m < pts.size(); ++m)
        EXPECT_NEAR(pts[m].real(), 2.0 * std::sqrt(static_cast<double>(m + 1)), 1e-12);
    EXPECT_EQ(pts.size(), 24u);  // 2 sqrt(m) <= sqrt(99)
}

TEST(Enumerate, IrregularSiteCount)
{
    IrregularComponent c{3, 0.5};
    // origin plus 2N points on each circle |z|^N = m
    EXPECT_EQ(irregular_sites_within(c, 2.0).size(), 1u + 6u * 8u);
}

TEST(Enumerate, SupportWithPerturbation)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    c.perturbation.removed.points = {2.0};
    c.perturbation.added.push_back({{{cplx(0.5, 1.0)}, std::nullopt}, 0.25});
    auto s = enumerate_support(c, 3.0);
    EXPECT_EQ(s.size(), 7u - 1u + 1u);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(std::abs(s[i - 1].position), std::abs(s[i].position));
}

TEST(Enumerate, RemovingANonSiteIsAnError)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    c.perturbation.removed.points = {0.5};
    EXPECT_THROW(enumerate_support(c, 3.0), config_error);
}

TEST(Validate, RejectsBadInput)
{
    FluxConfiguration a;
    a.chains.push_back({0.0, {{0.0, 0.5}}});
    EXPECT_THROW(validate(a), config_error);
    FluxConfiguration b;
    b.lattices.push_back({{1.0, 2.0}, {{0.0, 0.5}}});
    EXPECT_THROW(validate(b), config_error);
    FluxConfiguration c;
    c.finite = {{0.0, std::nan("")}};
    EXPECT_THROW(validate(c), config_error);
    FluxConfiguration d;
    d.uniform_flux_density = std::numeric_limits<double>::infinity();
    EXPECT_THROW(validate(d), config_error);
}

TEST(Validate, RejectsDuplicateSites)
{
    FluxConfiguration a;
    a.finite = {{cplx(1.0, 1.0), 0.3}, {cplx(1.0, 1.0), 0.2}};
    EXPECT_THROW(validate(a), config_error);
    FluxConfiguration b;
    b.chains.push_back({cplx(0.0, 2.0), {{0.5, 0.5}}});
    b.finite = {{cplx(0.5, -4.0), 0.3}};
    EXPECT_THROW(validate(b), config_error);
    FluxConfiguration c;
    c.lattices.push_back({{1.0, cplx(0.5, 0.8)}, {{0.1, 0.5}}});
    c.finite = {{cplx(0.1 + 1.0 + 1.0, 1.6), 0.3}};  // offset + w1 + 2 w2
    EXPECT_THROW(validate(c), config_error);
    c.finite = {{cplx(0.3, 0.3), 0.3}};
    EXPECT_NO_THROW(validate(c));
}

TEST(Normalize, FractionalPartsAndLog)
{
    FluxConfiguration c;
    c.finite = {{0.0, 1.6}, {1.0, -0.25}, {2.0, 3.0}};
    auto r = normalize_fluxes(c);
    ASSERT_EQ(r.config.finite.size(), 2u);
    EXPECT_NEAR(r.config.finite[0].theta, 0.6, 1e-15);
    EXPECT_NEAR(r.config.finite[1].theta, 0.75, 1e-15);
    ASSERT_EQ(r.gauge.shifts.size(), 3u);
    EXPECT_EQ(r.gauge.shifts[0].shift, 1);
    EXPECT_EQ(r.gauge.shifts[1].shift, -1);
    EXPECT_EQ(r.gauge.shifts[2].theta, 0.0);
}

TEST(Normalize, Idempotent)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> th(-3.0, 3.0), x(-5.0, 5.0);
    for (int i = 0; i < 20; ++i) {
        FluxConfiguration c;
        for (int k = 0; k < 4; ++k) c.finite.push_back({cplx(x(rng), x(rng)), th(rng)});
        c.chains.push_back({cplx(1.0, 0.3), {{cplx(0.2, 7.0), th(rng)}}});
        auto once = normalize_fluxes(c).config;
        auto twice = normalize_fluxes(once).config;
        ASSERT_EQ(once.finite.size(), twice.finite.size());
        for (std::size_t k = 0; k < once.finite.size(); ++k) {
            EXPECT_GE(once.finite[k].theta, 0.0);
            EXPECT_LT(once.finite[k].theta, 1.0);
            EXPECT_EQ(once.finite[k].theta, twice.finite[k].theta);
        }
    }
}

TEST(SpinDual, ComplementsFluxes)
{
    FluxConfiguration c;
    c.uniform_flux_density = 0.2;
    c.finite = {{cplx(1.0, 2.0), 0.3}};
    auto d = spin_dual(c);
    EXPECT_DOUBLE_EQ(d.uniform_flux_density, -0.2);
    EXPECT_NEAR(d.finite[0].theta, 0.7, 1e-15);
    EXPECT_EQ(d.finite[0].position, cplx(1.0, -2.0));
}

TEST(Merge, CommensuratePeriods)
{
    // Z and 2Z + 0.5 on one line: period 2 with offsets 0, 0.5, 1
    std::vector<ChainComponent> chains{{1.0, {{0.0, 0.5}}}, {2.0, {{0.5, 0.5}}}};
    auto m = merge_collinear_chains(chains);
    ASSERT_TRUE(m.chain);
    EXPECT_NEAR(std::abs(m.chain->omega0), 2.0, 1e-12);
    EXPECT_EQ(m.chain->offsets.size(), 3u);
}

TEST(Merge, CoincidentPointsAddFlux)
{
    std::vector<ChainComponent> chains{{1.0, {{0.0, 0.25}}}, {2.0, {{0.0, 0.5}}}};
    auto m = merge_collinear_chains(chains);
    ASSERT_TRUE(m.chain);
    double total = 0;
    for (const auto& k : m.chain->offsets) total += k.theta;
    EXPECT_NEAR(total, 2 * 0.25 + 0.5, 1e-14);
}

TEST(Merge, IncommensurateRejected)
{
    std::vector<ChainComponent> chains{{1.0, {{0.0, 0.5}}}, {std::sqrt(2.0), {{0.5, 0.5}}}};
    auto m = merge_collinear_chains(chains);
    EXPECT_FALSE(m.chain);
    EXPECT_FALSE(m.rejection.empty());
}

TEST(SetStats, CountsAndSums)
{
    std::vector<cplx> pts;
    for (int k = 1; k <= 100; ++k) pts.push_back(static_cast<double>(k));
    SetStats st(pts, 100.0);
    EXPECT_EQ(st.count(10.0), 10u);
    EXPECT_NEAR(st.T(2.0, 100.0), 1.6349839001848923, 1e-12);  // H(100, 2)
    EXPECT_NEAR(std::abs(st.S(1.0, 3.0) - (1.0 + 0.5 + 1.0 / 3.0)), 0.0, 1e-15);
}

TEST(SetStats, ConvergenceExponentAndGenus)
{
    LatticeComponent l{{1.0, I}, {{cplx(0.5, 0.5), 0.5}}};
    std::vector<cplx> pts;
    for (const auto& s : lattice_sites_within(l, 200.0)) pts.push_back(s.position);
    SetStats st(pts, 200.0);
    EXPECT_NEAR(st.convergence_exponent(), 2.0, 0.1);
    ASSERT_TRUE(st.genus());
    EXPECT_EQ(*st.genus(), 2);

    std::vector<cplx> line;
    for (int k = -400; k <= 400; ++k) line.push_back(k + 0.5);
    SetStats sl(line, 400.0);
    EXPECT_NEAR(sl.convergence_exponent(), 1.0, 0.1);
    EXPECT_EQ(sl.genus().value_or(-1), 1);

    SetStats fin({1.0, 2.0, 3.0}, 400.0);
    EXPECT_FALSE(fin.genus());
}

TEST(Geometry, MinSeparation)
{
    EXPECT_NEAR(min_separation({0.0, 1.0, cplx(0.0, 0.25)}), 0.25, 1e-15);
}

}  // namespace
