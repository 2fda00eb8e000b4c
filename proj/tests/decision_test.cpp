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
// Decision rules: verdicts on reference configurations and invariances.

#include <abzero/decision.hpp>

#include <gtest/gtest.h>

#include "random_configs.hpp"

namespace {

using namespace abzero;

FluxConfiguration finite(std::initializer_list<FluxSite> sites, double xi0 = 0.0)
{
    FluxConfiguration c;
    c.finite = sites;
    c.uniform_flux_density = xi0;
    return c;
}

TEST(Finite, MultiplicityFromTotalFlux)
{
    auto a = finite({{0.0, 0.6}, {1.0, 0.6}});
    auto v = decide(a, Spin::Plus);
    EXPECT_EQ(v.status, VerdictStatus::ExistsFinite);
    EXPECT_EQ(v.multiplicity.value_or(0), 1);
    EXPECT_EQ(v.theorem, "Thm 6.1");
    EXPECT_EQ(decide(a, Spin::Minus).status, VerdictStatus::NotExists);

    auto b = finite({{0.0, 0.3}, {1.0, 0.4}});
    EXPECT_EQ(decide(b, Spin::Plus).status, VerdictStatus::NotExists);
    auto vb = decide(b, Spin::Minus);
    EXPECT_EQ(vb.status, VerdictStatus::ExistsFinite);
    EXPECT_EQ(vb.multiplicity.value_or(0), 1);
}

TEST(Finite, IntegerTotalFluxBoundary)
{
    // sum theta = 2: degrees k < 1 only
    auto c = finite({{0.0, 0.5}, {1.0, 0.5}, {I, 0.5}, {1.0 + I, 0.5}});
    EXPECT_EQ(decide(c, Spin::Plus).multiplicity.value_or(0), 1);
    EXPECT_EQ(decide(c, Spin::Minus).multiplicity.value_or(0), 1);
    // sum theta = 1: nothing for spin up
    EXPECT_EQ(decide(finite({{0.0, 0.5}, {1.0, 0.5}}), Spin::Plus).status, VerdictStatus::NotExists);
}

TEST(Finite, ManySitesManyModes)
{
    FluxConfiguration c;
    for (int k = 0; k < 10; ++k) c.finite.push_back({static_cast<double>(k), 0.75});
    // spin up: k < 6.5 gives 7; spin down: k < 10 - 1 - 7.5 gives 2
    EXPECT_EQ(decide(c, Spin::Plus).multiplicity.value_or(0), 7);
    EXPECT_EQ(decide(c, Spin::Minus).multiplicity.value_or(0), 2);
}

TEST(Empty, NoZeroModes)
{
    FluxConfiguration c;
    EXPECT_EQ(decide(c, Spin::Plus).status, VerdictStatus::NotExists);
    EXPECT_EQ(decide(c, Spin::Minus).status, VerdictStatus::NotExists);
}

TEST(Field, SignSelectsSpin)
{
    auto c = finite({{0.0, 0.5}}, 0.2);
    EXPECT_EQ(decide(c, Spin::Plus).status, VerdictStatus::ExistsInfinite);
    EXPECT_EQ(decide(c, Spin::Minus).status, VerdictStatus::NotExists);
    c.uniform_flux_density = -0.2;
    EXPECT_EQ(decide(c, Spin::Plus).status, VerdictStatus::NotExists);
    EXPECT_EQ(decide(c, Spin::Minus).status, VerdictStatus::ExistsInfinite);
}

TEST(Chains, InfiniteBothSpins)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    for (Spin s : {Spin::Plus, Spin::Minus}) {
        auto v = decide(c, s);
        EXPECT_EQ(v.status, VerdictStatus::ExistsInfinite);
        EXPECT_EQ(v.theorem, "Thm 6.3");
    }
}

TEST(Chains, IncommensurateCollinear)
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.3}}});
    c.chains.push_back({std::sqrt(2.0), {{0.5, 0.2}}});
    auto v = decide(c, Spin::Plus);
    EXPECT_EQ(v.status, VerdictStatus::ExistsInfinite);
    EXPECT_EQ(v.rule, "R3");
}

TEST(Lattices, InfiniteWithoutField)
{
    FluxConfiguration c;
    c.lattices.push_back({{1.0, I}, {{0.0, 0.5}}});
    auto v = decide(c, Spin::Plus);
    EXPECT_EQ(v.status, VerdictStatus::ExistsInfinite);
    EXPECT_EQ(v.theorem, "Thm 6.5");
}

TEST(Lattices, FieldDichotomy)
{
    FluxConfiguration c;
    c.lattices.push_back({{1.0, I}, {{0.0, 0.5}}});
    c.uniform_flux_density = 0.3;
    EXPECT_EQ(decide(c, Spin::Minus).status, VerdictStatus::ExistsInfinite);
    c.uniform_flux_density = 0.7;
    EXPECT_EQ(decide(c, Spin::Minus).status, VerdictStatus::NotExists);
    EXPECT_EQ(decide(c, Spin::Minus).theorem, "Thm 6.8");
}

TEST(Irregular, InfiniteBothSpins)
{
    FluxConfiguration c;
    c.irregular = IrregularComponent{3, 0.5};
    EXPECT_EQ(decide(c, Spin::Plus).status, VerdictStatus::ExistsInfinite);
    EXPECT_EQ(decide(c, Spin::Minus).status, VerdictStatus::ExistsInfinite);
}

void expect_same(const ZeroModeVerdict& a, const ZeroModeVerdict& b)
{
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.rule, b.rule);
    EXPECT_EQ(a.theorem, b.theorem);
    EXPECT_EQ(a.multiplicity, b.multiplicity);
}

TEST(Invariance, IntegerFluxShifts)
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 25; ++i) {
        auto c = fixtures::random_config(rng);
        auto s = fixtures::shift_fluxes(c, rng);
        for (Spin sp : {Spin::Plus, Spin::Minus}) expect_same(decide(c, sp), decide(s, sp));
    }
}

TEST(Invariance, Translation)
{
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> x(-10.0, 10.0);
    for (int i = 0; i < 25; ++i) {
        auto c = fixtures::random_config(rng);
        auto t = fixtures::translate(c, cplx(x(rng), x(rng)));
        for (Spin sp : {Spin::Plus, Spin::Minus}) expect_same(decide(c, sp), decide(t, sp));
    }
}

TEST(Invariance, SpinDualSwapsStatuses)
{
    // spin down of c is spin up of the dual for finite sets
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> th(0.05, 0.95), x(-3.0, 3.0);
    for (int i = 0; i < 20; ++i) {
        FluxConfiguration c;
        for (int k = 0; k < 4; ++k) c.finite.push_back({cplx(x(rng), x(rng)), th(rng)});
        auto d = spin_dual(c);
        EXPECT_EQ(decide(c, Spin::Minus).multiplicity, decide(d, Spin::Plus).multiplicity);
    }
}

TEST(Rules, EvaluateListsApplicableRules)
{
    auto c = finite({{0.0, 0.6}, {1.0, 0.6}});
    auto all = evaluate_rules(c, Spin::Plus);
    ASSERT_FALSE(all.empty());
    EXPECT_EQ(all.front().rule, "R1");
}

}  // namespace
