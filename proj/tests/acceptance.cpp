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
// Acceptance suite: one PASS/FAIL line per criterion, tolerances and time
// limits pinned below. Exit status is zero when the failing criteria are
// exactly those listed with --expect-fail.

#include <abzero/ansatz.hpp>
#include <abzero/cafun.hpp>
#include <abzero/decision.hpp>
#include <abzero/growth.hpp>
#include <abzero/verify.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "random_configs.hpp"

namespace {

using namespace abzero;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds
    std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// integral over the plane of |z|^-2a |z - 1|^-2b for a, b < 1 < a + b
double two_point_integral(double a, double b)
{
    auto g = [](double x) { return std::tgamma(x) / std::tgamma(1 - x); };
    return pi * g(1 - a) * g(1 - b) * g(a + b - 1);
}

FluxConfiguration two_sites(double a, double b)
{
    FluxConfiguration c;
    c.finite = {{0.0, a}, {1.0, b}};
    return c;
}

FluxConfiguration square_lattice(double xi0)
{
    FluxConfiguration c;
    c.uniform_flux_density = xi0;
    c.lattices.push_back({{1.0, I}, {{0.0, 0.5}}});
    return c;
}

Outcome legendre()
{
    constexpr double tol = 1e-9;
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> len(0.3, 4.0), ang(0.0, 2 * pi), gap(0.15, pi - 0.15);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        cplx w1 = std::polar(len(rng), ang(rng));
        cplx w2 = w1 / std::abs(w1) * std::polar(len(rng), gap(rng));
        auto c = lattice_constants({w1, w2});
        worst = std::max(worst, std::abs(c.eta1 * w2 - c.eta2 * w1 - 2.0 * pi * I));
    }
    return {worst < tol, fmt("max |eta1 w2 - eta2 w1 - 2 pi i| = %.2e over 20 bases (tol %.0e)", worst, tol)};
}

Outcome constants()
{
    auto sq = lattice_constants({1.0, I});
    auto hex = lattice_constants({std::exp(-I * pi / 3.0), std::exp(I * pi / 3.0)});
    double dmu = std::abs(sq.mu - pi / 2);
    bool ok = std::abs(sq.nu) < 1e-10 && dmu <= 2 * std::numeric_limits<double>::epsilon() && std::abs(hex.nu) < 1e-9;
    return {ok, fmt("square |nu| = %.2e, |mu - pi/2| = %.2e; hexagonal |nu| = %.2e", std::abs(sq.nu), dmu, std::abs(hex.nu))};
}

Outcome sigma_tilde_type()
{
    LatticeBasis b{1.0, I};
    WeierstrassLattice L(b);
    auto rep = growth_estimate(LogModulus([&](cplx z) { return L.log_sigma_tilde(z).real(); }), geometric_grid(5, 40, 16));
    bool ok = std::abs(rep.order - 2) <= 0.05 && std::abs(rep.type / (pi / 2) - 1) <= 0.05;
    return {ok, fmt("order %.4f (2 +- 0.05), type %.4f (pi/2 +- 5%%)", rep.order, rep.type)};
}

Outcome calibration()
{
    constexpr double tol = 1e-5;
    double worst = 0;
    for (double th : {0.25, 0.5, 0.75}) {
        auto r = disc_integral([th](cplx z) { return std::pow(std::abs(z), -2 * th); }, 0.0, 1.0, {{0.0, -2 * th}});
        worst = std::max(worst, std::abs(r.value / (pi / (1 - th)) - 1));
    }
    return {worst < tol, fmt("max relative error %.2e for theta in {0.25, 0.5, 0.75} (tol %.0e)", worst, tol)};
}

Outcome finite_dichotomy()
{
    constexpr double tol = 1e-4;
    auto a = two_sites(0.6, 0.6);
    auto up = l2_norm_squared(build_zero_modes(a, decide(a, Spin::Plus), 1).members[0]);
    double ref_up = two_point_integral(0.6, 0.6);
    double e_up = std::abs(up.value / ref_up - 1);
    auto b = two_sites(0.3, 0.4);
    auto cand = l2_norm_squared(build_candidate(b, Spin::Plus));
    auto vd = decide(b, Spin::Minus);
    auto down = l2_norm_squared(build_zero_modes(b, vd, 1).members[0]);
    double e_down = std::abs(down.value / two_point_integral(0.7, 0.6) - 1);
    bool ok = up.flag == L2Flag::Convergent && e_up < tol && cand.flag == L2Flag::Divergent &&
              down.flag == L2Flag::Convergent && e_down < tol;
    return {ok, fmt("(0.6,0.6)+ %s %.8f vs %.8f (rel %.1e); (0.3,0.4)+ candidate %s; (0.3,0.4)- %s (rel %.1e)",
                    to_string(up.flag), up.value, ref_up, e_up, to_string(cand.flag), to_string(down.flag), e_down)};
}

Outcome chain()
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    auto fam = build_zero_modes(c, decide(c, Spin::Plus), 3);
    bool ok = fam.members.size() == 3;
    std::string d;
    for (const auto& m : fam.members) {
        auto q = l2_norm_squared(m);
        auto r = annihilation_residual(m, choose_probe_region(m));
        ok = ok && q.flag == L2Flag::Convergent && r.order >= 1.8 && r.order <= 2.2;
        d += fmt("%s%s %.5g order %.3f", d.empty() ? "" : "; ", to_string(q.flag), q.value, r.order);
    }
    return {ok, d};
}

Outcome lattice_norms()
{
    auto c = square_lattice(0.0);
    auto fam = build_zero_modes(c, decide(c, Spin::Plus), 3);
    bool conv = fam.members.size() == 3, increasing = true;
    std::vector<double> norms;
    for (const auto& m : fam.members) {
        auto q = l2_norm_squared(m);
        conv = conv && q.flag == L2Flag::Convergent;
        if (!norms.empty() && !(q.value > norms.back())) increasing = false;
        norms.push_back(q.value);
    }
    return {conv && increasing, fmt("k = 0, 1, 2 norms %.6g, %.6g, %.6g; all convergent: %s; strictly increasing: %s",
                                    norms[0], norms[1], norms[2], conv ? "yes" : "no", increasing ? "yes" : "no")};
}

Outcome field_dichotomy()
{
    auto low = square_lattice(0.3), high = square_lattice(0.7);
    auto vl = decide(low, Spin::Minus);
    auto ql = l2_norm_squared(build_zero_modes(low, vl, 1).members[0]);
    auto vh = decide(high, Spin::Minus);
    auto qh = l2_norm_squared(build_candidate(high, Spin::Minus));
    bool ok = exists(vl.status) && ql.flag == L2Flag::Convergent && vh.status == VerdictStatus::NotExists &&
              qh.flag == L2Flag::Divergent;
    return {ok, fmt("field 0.3: %s, member %s %.6g; field 0.7: %s, candidate %s", to_string(vl.status),
                    to_string(ql.flag), ql.value, to_string(vh.status), to_string(qh.flag))};
}

Outcome exotic()
{
    FluxConfiguration c;
    c.chains.push_back({1.0, {{0.0, 0.5}}});
    c.chains.push_back({2.0, {{0.5, 0.5}}});
    c.perturbation.added.push_back(
        {{{cplx(0.3, 1.0), cplx(-1.2, 0.7), cplx(2.1, -0.8), cplx(-0.4, -1.5), cplx(1.0, 2.0)}, std::nullopt}, 0.5});
    auto v = decide(c, Spin::Plus);
    if (!exists(v.status)) return {false, fmt("verdict %s", to_string(v.status))};
    BuildOptions o;
    o.alpha = pi / 4;
    auto psi = build_zero_modes(c, v, 1, o).members[0];
    auto q = l2_norm_squared(psi);
    return {q.flag == L2Flag::Convergent, fmt("%s, alpha = pi/4: %s %.6g (error %.1e)", v.theorem.c_str(), to_string(q.flag), q.value, q.error)};
}

Outcome irregular()
{
    constexpr double tol = 0.01;
    constexpr int n = 3;
    constexpr double alpha = pi / 4, radius = 1.9;  // radius^3 is not an integer, so no site on the rim
    FluxConfiguration c;
    c.irregular = IrregularComponent{n, 0.5};
    BuildOptions o;
    o.alpha = alpha;
    auto psi = build_zero_modes(c, decide(c, Spin::Plus), 1, o).members[0];
    auto q = l2_norm_squared(psi);
    // direct quadrature on the truncated disc
    std::vector<std::pair<cplx, double>> sing;
    for (const auto& s : psi.singular_within(radius + 0.1)) sing.emplace_back(s.point, 2 * s.exponent);
    auto direct = disc_integral([&](cplx z) { return std::exp(2 * psi.log_abs(z)); }, 0.0, radius, sing, 1e-10, 1e-8);
    // w = z^3 maps the disc three-to-one onto |w| < radius^3 with dA_z = |w|^(2/3 - 2) dA_w / 9, and
    // |psi|^2 = |sin(alpha w)|^2 |sin(pi w)|^-1 |w|^(2/3 - 2)
    auto g = [&](cplx w) {
        double s = std::norm(detail::sinc(alpha * w)) * alpha * alpha;  // |sin(alpha w) / w|^2
        return s / std::abs(std::sin(pi * w)) * std::pow(std::abs(w), 4.0 / n - 2.0);
    };
    std::vector<std::pair<cplx, double>> wsing{{0.0, 4.0 / n - 3.0}};
    double wr = std::pow(radius, n);
    for (int k = 1; k <= static_cast<int>(wr); ++k) {
        wsing.emplace_back(static_cast<double>(k), -1.0);
        wsing.emplace_back(-static_cast<double>(k), -1.0);
    }
    auto oracle = disc_integral(g, 0.0, wr, wsing, 1e-10, 1e-8);
    double oracle_value = oracle.value * n / (n * n);
    double rel = std::abs(direct.value / oracle_value - 1);
    bool ok = q.flag == L2Flag::Convergent && rel < tol;
    return {ok, fmt("plane %s %.6g; |z| < %.1f direct %.8g vs w-plane %.8g (rel %.1e, tol %.0e)", to_string(q.flag), q.value,
                    radius, direct.value, oracle_value, rel, tol)};
}

Outcome gauge()
{
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> x(-20.0, 20.0);
    int mismatches = 0;
    auto same = [](const ZeroModeVerdict& a, const ZeroModeVerdict& b) {
        return a.status == b.status && a.rule == b.rule && a.theorem == b.theorem && a.multiplicity == b.multiplicity;
    };
    for (int i = 0; i < 10; ++i) {
        auto c = fixtures::random_config(rng);
        auto s = fixtures::shift_fluxes(c, rng);
        auto t = fixtures::translate(c, cplx(x(rng), x(rng)));
        for (Spin sp : {Spin::Plus, Spin::Minus}) {
            auto v = decide(c, sp);
            if (!same(v, decide(s, sp))) ++mismatches;
            if (!same(v, decide(t, sp))) ++mismatches;
        }
    }
    return {mismatches == 0, fmt("%d mismatches over 10 configurations, 2 spins, flux shifts and translations", mismatches)};
}

Outcome loop()
{
    constexpr double tol = 1e-6;
    FluxConfiguration c;
    c.finite = {{0.0, 0.3}, {cplx(2.0, 0.5), 0.45}};
    VectorPotential a(build_scalar_potential(c));
    struct Case {
        Rectangle rect;
        double enclosed;
    };
    const Case cases[] = {{{-0.5, 0.5, -0.5, 0.5}, 0.3}, {{-1.0, 3.0, -1.0, 1.0}, 0.75}, {{-2.0, 4.0, -2.0, 2.0}, 0.75},
                          {{4.0, 5.0, 4.0, 6.0}, 0.0}};
    double worst = 0;
    for (const auto& k : cases) {
        auto rep = loop_flux(a, k.rect);
        worst = std::max(worst, std::abs(rep.circulation / (2 * pi) - k.enclosed));
    }
    return {worst < tol, fmt("max |circulation / 2 pi - enclosed theta| = %.2e over 4 rectangles (tol %.0e)", worst, tol)};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"abzero acceptance suite"};
    std::vector<int> expected;
    std::vector<int> only;
    app.add_option("--expect-fail", expected, "criteria known to fail");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {1, "Legendre identity", 5, legendre},
        {2, "lattice constants", 5, constants},
        {3, "sigma-tilde growth", 30, sigma_tilde_type},
        {4, "quadrature calibration", 10, calibration},
        {5, "finite dichotomy", 60, finite_dichotomy},
        {6, "chain family", 60, chain},
        {7, "lattice family norms", 60, lattice_norms},
        {8, "field dichotomy", 60, field_dichotomy},
        {9, "perturbed parallel chains", 120, exotic},
        {10, "irregular family", 120, irregular},
        {11, "gauge invariance", 10, gauge},
        {12, "loop flux", 10, loop},
    };
    std::set<int> failed;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = o.pass && dt <= c.time_limit;
        if (!pass) failed.insert(c.id);
        std::printf("%s %2d %s: %s [%.2f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt,
                    c.time_limit);
        std::fflush(stdout);
    }
    std::set<int> expect(expected.begin(), expected.end());
    if (!only.empty()) {
        std::set<int> sel(only.begin(), only.end());
        std::erase_if(expect, [&](int id) { return !sel.count(id); });
    }
    std::printf("%zu failed", failed.size());
    if (!expect.empty()) std::printf(" (expected to fail: %zu)", expect.size());
    std::printf("\n");
    return failed == expect ? 0 : 1;
}
