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
// Command-line front end: decide, verify, special and grid.

#include <abzero/ansatz.hpp>
#include <abzero/cafun.hpp>
#include <abzero/config_io.hpp>
#include <abzero/decision.hpp>
#include <abzero/report.hpp>
#include <abzero/verify.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

namespace {

using namespace abzero;

enum Exit { kOk = 0, kError = 1, kDomain = 2, kNegative = 3, kUndecided = 4 };

struct Settings {
    RunManifest manifest;
    std::string out;
    // special
    std::string function;
    std::vector<double> omega1{1.0, 0.0}, omega2{0.0, 1.0}, z{0.5, 0.25};
    double r0 = 5, r1 = 40;
    int radii = 12;
    // grid
    int member = 0;
    std::vector<double> bounds{-1, 1, -1, 1};
    std::vector<int> resolution{3, 3};
};

Spin parse_spin(const std::string& s)
{
    if (s == "+" || s == "plus" || s == "up") return Spin::Plus;
    if (s == "-" || s == "minus" || s == "down") return Spin::Minus;
    throw config_error("spin must be + or -");
}

void emit(const Settings& st, const std::string& text)
{
    if (st.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(st.out, std::ios::binary);
    if (!f) throw config_error("cannot write " + st.out);
    f << text;
}

L2Options l2_options(const RunManifest& m)
{
    L2Options o;
    o.abs_tol = m.abs_tol;
    o.rel_tol = m.rel_tol;
    o.threads = m.deterministic ? 1 : std::max(1, m.threads);
    return o;
}

BuildOptions build_options(const RunManifest& m)
{
    BuildOptions b;
    b.alpha = m.alpha;
    b.r_max = m.r_max;
    return b;
}

json base_report(const RunManifest& m, const FluxConfiguration& c)
{
    json r;
    r["manifest"] = manifest_to_json(m);
    r["config"] = config_to_json(normalize_fluxes(c).config);
    return r;
}

int verdict_exit(const ZeroModeVerdict& v)
{
    if (exists(v.status)) return kOk;
    if (v.status == VerdictStatus::NotExists) return kNegative;
    return kUndecided;
}

// For a finite multiplicity m: members 0..m-1 converge and degree m diverges.
json check_multiplicity(const FluxConfiguration& c, const ZeroModeVerdict& v, const RunManifest& m)
{
    json j;
    int mult = *v.multiplicity;
    auto fam = build_zero_modes(c, v, mult, build_options(m));
    bool all = true;
    for (const auto& w : fam.members) all = all && l2_norm_squared(w, l2_options(m)).flag == L2Flag::Convergent;
    const WaveFunction& w0 = fam.members.front();
    auto f = w0.factors();
    f.push_back({std::make_shared<LinearTerm>(0.0), mult});
    DecayHint h = w0.decay_hint();
    h.ratio *= std::pow(4.0, mult);
    WaveFunction next(w0.spin(), w0.potential_ptr(), f, h, "degree " + std::to_string(mult));
    auto q = l2_norm_squared(next, l2_options(m));
    j["members_convergent"] = all;
    j["next_degree_flag"] = to_string(q.flag);
    j["confirmed"] = all && q.flag == L2Flag::Divergent;
    return j;
}

int cmd_decide(const Settings& st)
{
    auto cfg = load_config(st.manifest.config_path);
    Spin spin = parse_spin(st.manifest.spin);
    DecideOptions o;
    o.r_max = st.manifest.r_max;
    auto v = decide(cfg, spin, o);
    json r = base_report(st.manifest, cfg);
    r["verdict"] = verdict_to_json(v);
    r["theorems"] = v.theorem.empty() ? json::array() : json::array({v.theorem});
    if (v.status == VerdictStatus::ExistsFinite && v.multiplicity) r["multiplicity_check"] = check_multiplicity(cfg, v, st.manifest);
    emit(st, r.dump(2) + "\n");
    return verdict_exit(v);
}

int cmd_verify(const Settings& st)
{
    const RunManifest& m = st.manifest;
    auto cfg = load_config(m.config_path);
    Spin spin = parse_spin(m.spin);
    DecideOptions o;
    o.r_max = m.r_max;
    auto v = decide(cfg, spin, o);
    json r = base_report(m, cfg);
    r["verdict"] = verdict_to_json(v);
    r["theorems"] = v.theorem.empty() ? json::array() : json::array({v.theorem});
    int code = kOk;
    bool pass = true, inconclusive = false;
    if (exists(v.status)) {
        auto fam = build_zero_modes(cfg, v, m.count, build_options(m));
        json members = json::array();
        for (const auto& w : fam.members) {
            json e;
            e["label"] = w.label();
            auto q = l2_norm_squared(w, l2_options(m));
            e["l2"] = quadrature_to_json(q);
            auto region = choose_probe_region(w);
            e["probe_region"] = {{"centre", detail::to_json(region.centre)},
                                 {"r_inner", region.r_inner},
                                 {"r_outer", region.r_outer}};
            auto res = annihilation_residual(w, region, m.mesh_ladder);
            e["annihilation_residual"] = residual_to_json(res);
            e["laplacian_residual"] = residual_to_json(laplacian_residual(w.potential(), region, m.mesh_ladder));
            bool ok_order = res.exact || res.order >= 1.8;
            if (q.flag == L2Flag::Inconclusive) inconclusive = true;
            pass = pass && q.flag == L2Flag::Convergent && ok_order;
            members.push_back(e);
        }
        r["members"] = members;
        if (fam.alpha_range) r["alpha_range"] = {fam.alpha_range->lo, fam.alpha_range->hi};
        if (!fam.notice.empty()) r["family_notice"] = fam.notice;
    } else if (v.status == VerdictStatus::NotExists) {
        auto cand = build_candidate(cfg, spin, m.r_max);
        auto q = l2_norm_squared(cand, l2_options(m));
        r["candidate"] = {{"label", cand.label()}, {"l2", quadrature_to_json(q)}};
        if (q.flag == L2Flag::Inconclusive) inconclusive = true;
        pass = q.flag == L2Flag::Divergent;
    } else {
        inconclusive = true;
    }
    if (inconclusive)
        code = kUndecided;
    else if (!pass)
        code = kNegative;
    r["overall"] = inconclusive ? "INCONCLUSIVE" : (pass ? "PASS" : "FAIL");
    emit(st, r.dump(2) + "\n");
    return code;
}

int cmd_special(const Settings& st)
{
    const RunManifest& m = st.manifest;
    auto pair = [](const std::vector<double>& v) { return cplx(v.at(0), v.at(1)); };
    LatticeBasis b{pair(st.omega1), pair(st.omega2)};
    check_basis(b);
    WeierstrassLattice lat(b, m.special_tol);
    cplx z = pair(st.z);
    const auto& k = lat.constants();
    json r;
    r["manifest"] = manifest_to_json(m);
    r["function"] = st.function;
    r["basis"] = {detail::to_json(b.omega1), detail::to_json(b.omega2)};
    if (st.function == "constants") {
        cplx legendre = k.eta1 * b.omega2 - k.eta2 * b.omega1 - 2.0 * pi * I;
        r["value"] = {{"eta1", detail::to_json(k.eta1)}, {"eta2", detail::to_json(k.eta2)}, {"nu", detail::to_json(k.nu)},
                      {"mu", k.mu},                      {"area", k.area},                   {"type", k.type}};
        r["achieved_tolerance"] = std::abs(legendre);
        r["check"] = "Legendre relation residual";
    } else if (st.function == "sigma" || st.function == "sigma_tilde") {
        bool tilde = st.function == "sigma_tilde";
        cplx v = tilde ? lat.sigma_tilde(z) : lat.sigma(z);
        r["z"] = detail::to_json(z);
        r["value"] = detail::to_json(v);
        // quasi-periodicity sigma(z + w1) = -exp(eta1 (z + w1/2)) sigma(z)
        cplx lhs = lat.log_sigma(z + b.omega1) - lat.log_sigma(z);
        cplx rhs = k.eta1 * (z + 0.5 * b.omega1) + I * pi;
        cplx d = std::exp(lhs - rhs) - 1.0;
        r["achieved_tolerance"] = v == 0.0 ? 0.0 : std::abs(d);
        r["check"] = "quasi-periodicity along omega1";
    } else if (st.function == "zeta") {
        cplx v = lat.zeta(z);
        r["z"] = detail::to_json(z);
        r["value"] = detail::to_json(v);
        r["achieved_tolerance"] = std::abs(lat.zeta(z + b.omega1) - v - k.eta1);
        r["check"] = "zeta(z + omega1) - zeta(z) - eta1";
    } else if (st.function == "canonical_product") {
        CanonicalProductSpec spec;
        spec.zeros_within = [&lat](double rr) {
            std::vector<cplx> out;
            for (cplx p : lat.points_within(rr))
                if (p != 0.0) out.push_back(p);
            return out;
        };
        spec.genus = 2;
        spec.multiplicity_at_origin = 1;
        auto res = canonical_product(spec, z, m.special_tol);
        r["z"] = detail::to_json(z);
        r["value"] = detail::to_json(res.value);
        r["radius"] = res.radius;
        r["converged"] = res.converged;
        r["achieved_tolerance"] = res.last_increment;
        r["sigma"] = detail::to_json(lat.sigma(z));
        r["check"] = "last increment of the extrapolated log";
    } else if (st.function == "growth") {
        auto g = growth_estimate(LogModulus([&lat](cplx w) { return lat.log_sigma_tilde(w).real(); }),
                                 geometric_grid(st.r0, st.r1, st.radii));
        r["value"] = {{"order", g.order}, {"type", g.type}, {"low_confidence", g.low_confidence}, {"fit_rms", g.fit_rms}};
        r["expected"] = {{"order", 2.0}, {"type", k.mu}};
        r["achieved_tolerance"] = g.fit_rms;
        r["check"] = "rms of the order fit (sigma-tilde)";
        if (!g.notice.empty()) r["notice"] = g.notice;
    } else {
        throw config_error("unknown function " + st.function);
    }
    emit(st, r.dump(2) + "\n");
    return kOk;
}

int cmd_grid(const Settings& st)
{
    const RunManifest& m = st.manifest;
    auto cfg = load_config(m.config_path);
    Spin spin = parse_spin(m.spin);
    DecideOptions o;
    o.r_max = m.r_max;
    auto v = decide(cfg, spin, o);
    if (st.member < 0) throw config_error("member index must be non-negative");
    GridSpec g{st.bounds.at(0), st.bounds.at(1), st.bounds.at(2), st.bounds.at(3), st.resolution.at(0), st.resolution.at(1)};
    if (!exists(v.status)) {
        if (v.status != VerdictStatus::NotExists || st.member != 0) {
            std::cerr << "abzero: no zero mode to sample (" << to_string(v.status) << ")\n";
            return verdict_exit(v);
        }
        std::cerr << "abzero: no zero mode exists; sampling the canonical candidate\n";
        emit(st, grid_csv(build_candidate(cfg, spin, m.r_max), g));
        return kOk;
    }
    auto fam = build_zero_modes(cfg, v, st.member + 1, build_options(m));
    if (st.member >= static_cast<int>(fam.members.size()))
        throw domain_error("member " + std::to_string(st.member) + " does not exist (family has " +
                           std::to_string(fam.members.size()) + ")");
    emit(st, grid_csv(fam.members[static_cast<std::size_t>(st.member)], g));
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Zero modes of Pauli operators with Aharonov-Bohm fluxes"};
    app.require_subcommand(1);
    Settings st;
    RunManifest& m = st.manifest;

    auto common = [&](CLI::App* c, bool with_config) {
        if (with_config) c->add_option("config", m.config_path, "configuration JSON")->required()->check(CLI::ExistingFile);
        c->add_option("--tol-abs", m.abs_tol, "absolute tolerance")->check(CLI::PositiveNumber);
        c->add_option("--tol-rel", m.rel_tol, "relative tolerance")->check(CLI::PositiveNumber);
        c->add_option("--r-max", m.r_max, "radius for set statistics and truncation")->check(CLI::PositiveNumber);
        c->add_option("--threads", m.threads, "quadrature threads")->check(CLI::PositiveNumber);
        c->add_flag("--deterministic", m.deterministic, "single-threaded, bit-stable");
        c->add_option("--seed", m.seed, "recorded in the manifest");
        c->add_option("--out", st.out, "output file (default stdout)");
    };
    auto spin_opt = [&](CLI::App* c) { c->add_option("--spin", m.spin, "+ or -"); };

    auto* dec = app.add_subcommand("decide", "existence verdict for a configuration");
    common(dec, true);
    spin_opt(dec);

    auto* ver = app.add_subcommand("verify", "construct zero modes and check them numerically");
    common(ver, true);
    spin_opt(ver);
    ver->add_option("--count", m.count, "family members")->check(CLI::PositiveNumber);
    ver->add_option("--alpha", m.alpha, "largest alpha of the family grid");
    ver->add_option("--mesh-ladder", m.mesh_ladder, "finite-difference steps")->expected(2, 16);

    auto* spe = app.add_subcommand("special", "lattice special functions");
    common(spe, false);
    spe->add_option("function", st.function, "sigma, sigma_tilde, zeta, constants, canonical_product, growth")
        ->required()
        ->check(CLI::IsMember({"sigma", "sigma_tilde", "zeta", "constants", "canonical_product", "growth"}));
    spe->add_option("--omega1", st.omega1, "first period re im")->expected(2);
    spe->add_option("--omega2", st.omega2, "second period re im")->expected(2);
    spe->add_option("--z", st.z, "argument re im")->expected(2);
    spe->add_option("--tol", m.special_tol, "special-function tolerance")->check(CLI::PositiveNumber);
    spe->add_option("--r0", st.r0, "growth: smallest radius");
    spe->add_option("--r1", st.r1, "growth: largest radius");
    spe->add_option("--radii", st.radii, "growth: number of radii");

    auto* gri = app.add_subcommand("grid", "CSV samples of |psi| for one family member");
    common(gri, true);
    spin_opt(gri);
    gri->add_option("--member", st.member, "member index");
    gri->add_option("--alpha", m.alpha, "largest alpha of the family grid");
    gri->add_option("--bounds", st.bounds, "x0 x1 y0 y1")->expected(4);
    gri->add_option("--resolution", st.resolution, "nx ny")->expected(2);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kError;
    }

    try {
        m.validate();
        if (dec->parsed()) {
            m.command = "decide";
            return cmd_decide(st);
        }
        if (ver->parsed()) {
            m.command = "verify";
            return cmd_verify(st);
        }
        if (spe->parsed()) {
            m.command = "special";
            return cmd_special(st);
        }
        m.command = "grid";
        m.count = st.member + 1;
        return cmd_grid(st);
    } catch (const config_error& e) {
        std::cerr << "abzero: configuration error: " << e.what() << '\n';
        return kError;
    } catch (const domain_error& e) {
        std::cerr << "abzero: domain error: " << e.what() << '\n';
        return kDomain;
    } catch (const std::exception& e) {
        std::cerr << "abzero: " << e.what() << '\n';
        return kError;
    }
}
