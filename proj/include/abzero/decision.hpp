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
#ifndef ABZERO_DECISION_HPP_
#define ABZERO_DECISION_HPP_

// Existence of zero modes from the structure of a flux configuration.
//
// Rules are tried in a fixed order; the first one whose hypotheses hold
// produces the verdict. Each verdict names the construction that the
// ansatz module uses to exhibit (or refute) the zero modes.

#include <abzero/cafun.hpp>
#include <abzero/fluxcfg.hpp>
#include <abzero/growth.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace abzero {

enum class Spin { Plus, Minus };

inline const char* to_string(Spin s) { return s == Spin::Plus ? "+" : "-"; }

enum class VerdictStatus { ExistsInfinite, ExistsFinite, NotExists, Unknown };

inline const char* to_string(VerdictStatus s)
{
    switch (s) {
        case VerdictStatus::ExistsInfinite: return "ExistsInfinite";
        case VerdictStatus::ExistsFinite: return "ExistsFinite";
        case VerdictStatus::NotExists: return "NotExists";
        default: return "Unknown";
    }
}

inline bool exists(VerdictStatus s) { return s == VerdictStatus::ExistsInfinite || s == VerdictStatus::ExistsFinite; }

// Shape of the holomorphic factor used to build the zero modes.
enum class Recipe {
    None,
    Finite,           // polynomial times the finite product
    Chains,           // sin(a u)/u along the first chain
    CollinearSmall,   // collinear chains with total flux below one
    CollinearLarge,   // collinear chains, shortest period carries the decay
    Lattices,         // polynomial times lattice factors
    LatticesSmall,
    LatticesLarge,
    UniformLattice,   // Gaussian times lattice factors
    UniformGeneral,   // Gaussian times polynomial times all canonical factors
    ParallelChains,   // sin/(sin sqrt sin sqrt) along parallel chains with a scarce perturbation
    Irregular         // sin(a z^N)/z^N
};

inline const char* to_string(Recipe r)
{
    switch (r) {
        case Recipe::Finite: return "finite";
        case Recipe::Chains: return "chains";
        case Recipe::CollinearSmall: return "collinear-small-flux";
        case Recipe::CollinearLarge: return "collinear-large-flux";
        case Recipe::Lattices: return "lattices";
        case Recipe::LatticesSmall: return "lattices-small-flux";
        case Recipe::LatticesLarge: return "lattices-large-flux";
        case Recipe::UniformLattice: return "uniform-lattice";
        case Recipe::UniformGeneral: return "uniform-general";
        case Recipe::ParallelChains: return "parallel-chains";
        case Recipe::Irregular: return "irregular";
        default: return "none";
    }
}

struct ZeroModeVerdict {
    VerdictStatus status = VerdictStatus::Unknown;
    Spin spin = Spin::Plus;
    std::optional<int> multiplicity;  // set for ExistsFinite
    std::string rule = "none";        // "R1" ... "R9"
    std::string theorem;              // citation of the result applied
    Recipe recipe = Recipe::None;     // spin-up construction (of the dual configuration for spin down)
    bool perturbation_in_factor = false;  // added canonical products enter the holomorphic factor
    std::map<std::string, double> conditions;
    bool low_confidence = false;
    std::string note;
};

struct DecideOptions {
    double r_max = 100.0;  // radius for set statistics and discreteness checks
};

namespace detail {

inline constexpr double flux_eps = 1e-12;

inline bool field_present(const FluxConfiguration& c) { return std::abs(c.uniform_flux_density) > 1e-14; }

inline ZeroModeVerdict make_verdict(VerdictStatus st, Spin s, std::string rule, std::string thm, Recipe r)
{
    ZeroModeVerdict v;
    v.status = st;
    v.spin = s;
    v.rule = std::move(rule);
    v.theorem = std::move(thm);
    v.recipe = r;
    return v;
}

// Chains split into one-line sub-chains and grouped by common line.
inline std::vector<std::vector<ChainComponent>> line_groups(const std::vector<ChainComponent>& chains)
{
    std::vector<std::vector<ChainComponent>> groups;
    for (const auto& ch : chains)
        for (const auto& sub : split_by_line(ch)) {
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const std::vector<ChainComponent>& g) { return collinear(g.front(), sub); });
            if (it == groups.end())
                groups.push_back({sub});
            else
                it->push_back(sub);
        }
    return groups;
}

inline bool chains_uniformly_discrete(const std::vector<ChainComponent>& chains)
{
    for (const auto& g : line_groups(chains))
        if (!merge_collinear_chains(g).chain) return false;
    return true;
}

inline bool all_parallel(const std::vector<ChainComponent>& chains)
{
    for (const auto& c : chains)
        if (!parallel(c.omega0, chains.front().omega0)) return false;
    return true;
}

// Whether every lattice generated by `b` lies in the rational span of `ref`.
inline bool commensurate(const LatticeBasis& ref, const LatticeBasis& b)
{
    double s = cell_area(ref);
    for (cplx w : {b.omega1, b.omega2}) {
        double t1 = (std::conj(w) * ref.omega2).imag() / s;
        double t2 = (std::conj(ref.omega1) * w).imag() / s;
        if (!rationalize(t1, 1e-10, 1000) || !rationalize(t2, 1e-10, 1000)) return false;
    }
    return true;
}

// Same Bravais lattice: integer coordinates both ways.
inline bool same_lattice(const LatticeBasis& a, const LatticeBasis& b)
{
    auto integral = [](const LatticeBasis& ref, const LatticeBasis& x) {
        double s = cell_area(ref);
        for (cplx w : {x.omega1, x.omega2}) {
            double t1 = (std::conj(w) * ref.omega2).imag() / s;
            double t2 = (std::conj(ref.omega1) * w).imag() / s;
            if (std::abs(t1 - std::round(t1)) > 1e-9 || std::abs(t2 - std::round(t2)) > 1e-9) return false;
        }
        return true;
    };
    return integral(a, b) && integral(b, a);
}

struct Discreteness {
    bool uniform;
    bool heuristic;  // decided from sampled separations rather than commensurability
    double separation;
};

inline Discreteness lattices_uniformly_discrete(const std::vector<LatticeComponent>& ls, double r_max)
{
    bool comm = true;
    for (const auto& l : ls) comm = comm && commensurate(ls.front().basis, l.basis);
    auto collect = [&](double r) {
        std::vector<cplx> pts;
        for (const auto& l : ls)
            for (const auto& s : lattice_sites_within(l, r)) pts.push_back(s.position);
        return pts;
    };
    double sep = min_separation(collect(r_max));
    if (comm) return {true, false, sep};
    double sep_inner = min_separation(collect(r_max / 4));
    return {sep >= 0.5 * sep_inner && sep > 1e-9, true, sep};
}

inline double sum_theta(const std::vector<FluxSite>& v)
{
    double s = 0;
    for (const auto& k : v) s += k.theta;
    return s;
}

}  // namespace detail

// Effective perturbation: explicit perturbation plus, when periodic components
// are present, the finite sites (each an added singleton set).
inline Perturbation effective_perturbation(const FluxConfiguration& c)
{
    Perturbation p = c.perturbation;
    if (c.has_periodic())
        for (const auto& s : c.finite) p.added.push_back({PointSet{{s.position}, std::nullopt}, s.theta});
    return p;
}

// Points of the perturbation (removed and added) within r.
inline std::vector<cplx> perturbation_points(const Perturbation& p, double r)
{
    auto out = points_within(p.removed, r);
    for (const auto& a : p.added) {
        auto v = points_within(a.points, r);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Individual rules. Each returns nullopt when its hypotheses do not hold.
// The configuration is assumed normalised.

// Finitely many solenoids, no field.
inline std::optional<ZeroModeVerdict> rule_finite(const FluxConfiguration& c, Spin spin)
{
    if (c.has_periodic() || detail::field_present(c) || !c.perturbation.finite()) return std::nullopt;
    // a perturbation of a finite configuration is again finite
    std::vector<FluxSite> sites = enumerate_support(c, std::numeric_limits<double>::max());
    const double n = static_cast<double>(sites.size());
    const double st = detail::sum_theta(sites);
    // admissible polynomial degrees k: spin up k < sum - 1, spin down k < n - 1 - sum
    const double bound = spin == Spin::Plus ? st - 1.0 : n - 1.0 - st;
    int count = 0;
    while (static_cast<double>(count) < bound - detail::flux_eps) ++count;
    auto v = detail::make_verdict(count > 0 ? VerdictStatus::ExistsFinite : VerdictStatus::NotExists, spin, "R1",
                                  "Thm 6.1", Recipe::Finite);
    if (count > 0) v.multiplicity = count;
    v.conditions["sumTheta"] = st;
    v.conditions["n"] = n;
    return v;
}

// Union of chains forming a uniformly discrete set, no field.
inline std::optional<ZeroModeVerdict> rule_chains(const FluxConfiguration& c, Spin spin)
{
    if (c.chains.empty() || !c.lattices.empty() || c.irregular || !c.finite.empty() || !c.perturbation.empty() ||
        detail::field_present(c))
        return std::nullopt;
    if (!detail::chains_uniformly_discrete(c.chains)) return std::nullopt;
    auto v = detail::make_verdict(VerdictStatus::ExistsInfinite, spin, "R2", "Thm 6.3", Recipe::Chains);
    v.conditions["lines"] = static_cast<double>(detail::line_groups(c.chains).size());
    return v;
}

// One-atom chains on a single line (possibly incommensurate), no field.
inline std::optional<ZeroModeVerdict> rule_collinear(const FluxConfiguration& c, Spin spin)
{
    if (c.chains.empty() || !c.lattices.empty() || c.irregular || !c.finite.empty() || !c.perturbation.empty() ||
        detail::field_present(c))
        return std::nullopt;
    auto groups = detail::line_groups(c.chains);
    if (groups.size() != 1) return std::nullopt;
    // one-atom chains: every offset is its own chain
    std::vector<double> per, th;
    for (const auto& ch : groups.front())
        for (const auto& k : ch.offsets) {
            per.push_back(std::abs(ch.omega0));
            th.push_back(k.theta);
        }
    const std::size_t n = per.size();
    double wmin = *std::min_element(per.begin(), per.end());
    double st = 0, s_tw = 0, s_w = 0;
    for (std::size_t j = 0; j < n; ++j) {
        st += th[j];
        s_tw += th[j] / per[j];
        s_w += 1.0 / per[j];
    }
    bool small, large;
    if (spin == Spin::Plus) {
        small = st < 1.0 - detail::flux_eps;
        large = s_tw > s_w - 1.0 / wmin + detail::flux_eps;
    } else {
        small = st > static_cast<double>(n) - 1.0 + detail::flux_eps;
        large = s_tw < 1.0 / wmin - detail::flux_eps;
    }
    bool two = n == 2 && (small || large);
    if (!small && !large) return std::nullopt;
    std::string thm = two ? "Thm 6.4(iii)" : (small ? "Thm 6.4(i)" : "Thm 6.4(ii)");
    if (spin == Spin::Minus) thm = two ? "Thm 6.4a(iii)" : (small ? "Thm 6.4a(i)" : "Thm 6.4a(ii)");
    auto v = detail::make_verdict(VerdictStatus::ExistsInfinite, spin, "R3", thm,
                                  small ? Recipe::CollinearSmall : Recipe::CollinearLarge);
    v.conditions["n"] = static_cast<double>(n);
    v.conditions["sumTheta"] = st;
    v.conditions["sumThetaOverPeriod"] = s_tw;
    v.conditions["sumInversePeriod"] = s_w;
    v.conditions["minPeriod"] = wmin;
    return v;
}

// Union of lattices forming a uniformly discrete set, no field.
inline std::optional<ZeroModeVerdict> rule_lattices(const FluxConfiguration& c, Spin spin, const DecideOptions& o)
{
    if (c.lattices.empty() || !c.chains.empty() || c.irregular || !c.finite.empty() || !c.perturbation.empty() ||
        detail::field_present(c))
        return std::nullopt;
    auto d = detail::lattices_uniformly_discrete(c.lattices, o.r_max);
    if (!d.uniform) return std::nullopt;
    auto v = detail::make_verdict(VerdictStatus::ExistsInfinite, spin, "R4",
                                  c.lattices.size() == 1 ? "Thm 6.5" : "Thm 6.New", Recipe::Lattices);
    v.low_confidence = d.heuristic;
    v.conditions["minSeparation"] = d.separation;
    if (d.heuristic) v.note = "uniform discreteness judged from sampled separations";
    return v;
}

// Disjoint simple lattices without the discreteness requirement, no field.
inline std::optional<ZeroModeVerdict> rule_simple_lattices(const FluxConfiguration& c, Spin spin)
{
    if (c.lattices.empty() || !c.chains.empty() || c.irregular || !c.finite.empty() || !c.perturbation.empty() ||
        detail::field_present(c))
        return std::nullopt;
    for (const auto& l : c.lattices)
        if (l.offsets.size() != 1) return std::nullopt;
    const std::size_t n = c.lattices.size();
    std::vector<double> area, th;
    for (const auto& l : c.lattices) {
        area.push_back(cell_area(l.basis));
        th.push_back(l.offsets.front().theta);
    }
    double smin = *std::min_element(area.begin(), area.end());
    double st = 0, s_ta = 0, s_a = 0;
    for (std::size_t j = 0; j < n; ++j) {
        st += th[j];
        s_ta += th[j] / area[j];
        s_a += 1.0 / area[j];
    }
    bool small, large;
    if (spin == Spin::Plus) {
        small = st < 1.0 - detail::flux_eps;
        large = s_ta > s_a - 1.0 / smin + detail::flux_eps;
    } else {
        small = st > static_cast<double>(n) - 1.0 + detail::flux_eps;
        large = s_ta < 1.0 / smin - detail::flux_eps;
    }
    if (!small && !large) return std::nullopt;
    bool two = n == 2 && std::abs(area[0] - area[1]) > 1e-12 * smin;
    std::string thm = two ? "Thm 6.New lattice analog (iii)" : (small ? "Thm 6.New lattice analog (i)" : "Thm 6.New lattice analog (ii)");
    auto v = detail::make_verdict(VerdictStatus::ExistsInfinite, spin, "R5", thm,
                                  small ? Recipe::LatticesSmall : Recipe::LatticesLarge);
    v.conditions["n"] = static_cast<double>(n);
    v.conditions["sumTheta"] = st;
    v.conditions["sumThetaOverArea"] = s_ta;
    v.conditions["sumInverseArea"] = s_a;
    v.conditions["minArea"] = smin;
    return v;
}

// Lattice components of one Bravais lattice merged into a single component.
inline std::optional<LatticeComponent> single_bravais(const std::vector<LatticeComponent>& ls)
{
    if (ls.empty()) return std::nullopt;
    LatticeComponent out{ls.front().basis, {}};
    for (const auto& l : ls) {
        if (!detail::same_lattice(out.basis, l.basis)) return std::nullopt;
        out.offsets.insert(out.offsets.end(), l.offsets.begin(), l.offsets.end());
    }
    return out;
}

inline ZeroModeVerdict decide(const FluxConfiguration& config, Spin spin, const DecideOptions& opts = {});

// Uniform field on top of one lattice.
inline std::optional<ZeroModeVerdict> rule_uniform_lattice(const FluxConfiguration& c, Spin spin, const DecideOptions& o)
{
    if (!detail::field_present(c) || c.lattices.empty() || !c.chains.empty() || c.irregular) return std::nullopt;
    auto lat = single_bravais(c.lattices);
    if (!lat) return std::nullopt;
    const double xi0 = c.uniform_flux_density;
    const double area = cell_area(lat->basis);
    const double eta0 = xi0 * area;
    const double n = static_cast<double>(lat->offsets.size());
    const double st = detail::sum_theta(lat->offsets);
    bool ok;
    if (spin == Spin::Plus)
        ok = xi0 > 0 || std::abs(eta0) < st - detail::flux_eps;
    else
        ok = xi0 < 0 || eta0 + st < n - detail::flux_eps;
    auto v = detail::make_verdict(ok ? VerdictStatus::ExistsInfinite : VerdictStatus::NotExists, spin, "R6", "Thm 6.8",
                                  Recipe::UniformLattice);
    v.conditions["eta0"] = eta0;
    v.conditions["b0"] = 2 * pi * xi0;
    v.conditions["n"] = n;
    v.conditions["sumTheta"] = st;
    Perturbation p = effective_perturbation(c);
    if (!p.empty()) {
        // moving or adding finitely many solenoids keeps existing zero modes
        if (!p.finite() || !ok) {
            v = detail::make_verdict(VerdictStatus::Unknown, spin, "R6", "Thm 6.8", Recipe::UniformLattice);
            v.note = "perturbation of a lattice in a uniform field not covered";
            return v;
        }
        v.theorem = "Thm 6.8 + Thm 7.1";
    }
    (void)o;
    return v;
}

// Uniform field with a general discrete set.
inline std::optional<ZeroModeVerdict> rule_uniform_general(const FluxConfiguration& c, Spin spin, const DecideOptions& o)
{
    if (!detail::field_present(c) || c.irregular) return std::nullopt;
    std::vector<cplx> pts;
    for (const auto& s : enumerate_support(c, o.r_max)) pts.push_back(s.position);
    SetStats st(pts, o.r_max);
    const double xi0 = c.uniform_flux_density;
    const Spin aligned = xi0 > 0 ? Spin::Plus : Spin::Minus;
    const double b0 = 2 * pi * xi0;
    auto v = detail::make_verdict(spin == aligned ? VerdictStatus::ExistsInfinite : VerdictStatus::NotExists, spin, "R7",
                                  "Thm 6.7", Recipe::UniformGeneral);
    v.conditions["b0"] = b0;
    v.conditions["convergenceExponent"] = st.convergence_exponent();
    if (pts.size() < 2 || !st.diverges(2.0)) {
        v.conditions["T2bounded"] = 1;
        return v;
    }
    v.conditions["T2bounded"] = 0;
    // large-field variant: T(alpha) bounded for alpha > 2, n(r) = O(r^2), S(2, r) bounded
    bool a = !st.diverges(2.5);
    bool b = st.convergence_exponent() <= 2.1;
    double m_prev = 0, m_last = 0;
    for (int i = 0; i <= 40; ++i) {
        double s = std::abs(st.S(2.0, o.r_max * std::pow(10.0, -2.0 + i / 20.0)));
        if (i <= 20)
            m_prev = std::max(m_prev, s);
        else
            m_last = std::max(m_last, s);
    }
    bool cc = m_last <= 1.5 * m_prev + 1e-9;
    v.conditions["S2lastDecadeMax"] = m_last;
    v.conditions["S2previousDecadeMax"] = m_prev;
    if (!(a && b && cc)) {
        auto u = detail::make_verdict(VerdictStatus::Unknown, spin, "R7", "Thm 6.7", Recipe::UniformGeneral);
        u.conditions = v.conditions;
        u.note = "growth conditions of the support not met at r_max";
        return u;
    }
    // threshold b0 / 4 > sum c_j (1 - theta_j) with c_j the type of each order-two factor
    double threshold = 0;
    bool unknown_type = false;
    for (const auto& l : c.lattices) {
        WeierstrassLattice wl(l.basis);
        double scale = std::sqrt(wl.constants().area);
        auto g = growth_estimate([&](cplx z) { return wl.log_sigma_tilde(z).real(); }, geometric_grid(5 * scale, 40 * scale, 16));
        for (const auto& k : l.offsets) threshold += 4.0 * g.type * (1.0 - k.theta);
    }
    for (const auto& a2 : effective_perturbation(c).added)
        if (!a2.points.finite()) {
            SetStats ps(points_within(a2.points, o.r_max), o.r_max);
            if (ps.convergence_exponent() > 1.9) unknown_type = true;
        }
    v.conditions["b0ThresholdEstimate"] = threshold;
    v.low_confidence = true;
    v.note = "sufficiently large field required; threshold estimated numerically";
    if (unknown_type || std::abs(b0) <= threshold) {
        v.status = VerdictStatus::Unknown;
        if (unknown_type) v.note = "type of an order-two perturbation product not estimated";
    }
    return v;
}

// Perturbed chains or lattices, no field.
inline std::optional<ZeroModeVerdict> rule_perturbed(const FluxConfiguration& c, Spin spin, const DecideOptions& o)
{
    if (detail::field_present(c) || !c.has_periodic()) return std::nullopt;
    Perturbation p = effective_perturbation(c);
    if (p.empty()) return std::nullopt;
    FluxConfiguration base = c;
    base.finite.clear();
    base.perturbation = {};

    auto pts = perturbation_points(p, o.r_max);
    SetStats st(pts, o.r_max);
    const bool finite = p.finite();
    const double tau = finite ? 0.0 : st.convergence_exponent();
    const std::optional<int> genus = finite ? std::nullopt : st.genus();
    auto annotate = [&](ZeroModeVerdict& v) {
        v.conditions["perturbationConvergenceExponent"] = tau;
        v.conditions["perturbationGenus"] = genus ? *genus : -1.0;
        v.conditions["perturbationFinite"] = finite ? 1.0 : 0.0;
        if (!finite && st.low_confidence()) v.low_confidence = true;
    };

    if (!base.chains.empty() && base.lattices.empty() && !base.irregular) {
        if (!detail::chains_uniformly_discrete(base.chains)) return std::nullopt;
        if (detail::all_parallel(base.chains)) {
            bool ok = finite || tau < 0.45;
            bool marginal = !finite && std::abs(tau - 0.5) <= 0.05;
            if (marginal) {
                // n'(r) = o(r^(1/2)): the ratio must keep shrinking over the top decade
                double q1 = st.count(o.r_max / 10) / std::sqrt(o.r_max / 10), q2 = st.count(o.r_max) / std::sqrt(o.r_max);
                ok = q2 < 0.8 * q1;
            }
            if (!ok && !marginal) return std::nullopt;
            auto v = detail::make_verdict(ok ? VerdictStatus::ExistsInfinite : VerdictStatus::Unknown, spin, "R8",
                                          "Thm 7.4", Recipe::ParallelChains);
            v.perturbation_in_factor = true;
            annotate(v);
            if (marginal) {
                v.low_confidence = true;
                v.note = "convergence exponent of the perturbation close to 1/2";
            }
            return v;
        }
        bool ok = finite || (genus && *genus == 0);
        if (!ok) return std::nullopt;
        auto v = detail::make_verdict(VerdictStatus::ExistsInfinite, spin, "R8", "Thm 7.3", Recipe::Chains);
        v.perturbation_in_factor = true;
        annotate(v);
        if (!finite && std::abs(tau - 1.0) < 0.1) {
            v.low_confidence = true;
            v.note = "convergence exponent of the perturbation close to 1";
        }
        return v;
    }
    if (!base.lattices.empty() && base.chains.empty() && !base.irregular && single_bravais(base.lattices)) {
        bool ok = finite || (genus && *genus <= 1);
        if (ok) {
            auto v = detail::make_verdict(VerdictStatus::ExistsInfinite, spin, "R8", "Lattice perturbation theorem",
                                          Recipe::Lattices);
            v.perturbation_in_factor = true;
            annotate(v);
            if (!finite && std::abs(tau - 2.0) < 0.1) v.low_confidence = true;
            return v;
        }
    }
    if (finite) {
        // moved or added solenoids keep a mode only while the ratio to the base mode stays
        // bounded at infinity: removed flux must not exceed added flux (both read in the dual for spin down)
        double removed = 0, added = 0, reach = 0;
        for (cplx q : p.removed.points) reach = std::max(reach, std::abs(q));
        if (!p.removed.points.empty())
            for (const auto& s : regular_sites_within(base, reach + 1.0))
                for (cplx q : p.removed.points)
                    if (std::abs(s.position - q) < 1e-9 * std::max(1.0, std::abs(q)))
                        removed += spin == Spin::Plus ? s.theta : 1.0 - s.theta;
        for (const auto& a : p.added)
            for (std::size_t i = 0; i < a.points.points.size(); ++i) added += spin == Spin::Plus ? a.theta : 1.0 - a.theta;
        if (removed > added + detail::flux_eps) return std::nullopt;
        auto b = decide(base, spin, o);
        if (b.status == VerdictStatus::ExistsInfinite) {
            b.rule = "R8";
            b.theorem += " + Thm 7.1";
            annotate(b);
            b.perturbation_in_factor = false;
            return b;
        }
    }
    return std::nullopt;
}

// The irregular family with a single flux, no field.
inline std::optional<ZeroModeVerdict> rule_irregular(const FluxConfiguration& c, Spin spin)
{
    if (!c.irregular || !c.chains.empty() || !c.lattices.empty() || !c.finite.empty() || !c.perturbation.empty() ||
        detail::field_present(c))
        return std::nullopt;
    auto v = detail::make_verdict(VerdictStatus::ExistsInfinite, spin, "R9", "Irregular family example", Recipe::Irregular);
    v.conditions["order"] = c.irregular->order;
    v.conditions["convergenceExponent"] = c.irregular->order;
    return v;
}

namespace detail {

// Rejects overlapping components. A lone one-offset component cannot overlap
// itself, so its (possibly huge) site list is not enumerated.
inline void check_overlaps(const FluxConfiguration& c, double r)
{
    std::size_t parts = (c.finite.empty() ? 0 : 1) + c.chains.size() + c.lattices.size() + (c.irregular ? 1 : 0);
    bool multi_offset = std::any_of(c.chains.begin(), c.chains.end(), [](const auto& ch) { return ch.offsets.size() > 1; }) ||
                        std::any_of(c.lattices.begin(), c.lattices.end(), [](const auto& l) { return l.offsets.size() > 1; });
    if (parts > 1 || multi_offset || !c.perturbation.empty()) enumerate_support(c, r);
}

}  // namespace detail

// Every rule whose hypotheses hold, in evaluation order (used for auditing).
inline std::vector<ZeroModeVerdict> evaluate_rules(const FluxConfiguration& config, Spin spin, const DecideOptions& o = {})
{
    FluxConfiguration c = normalize_fluxes(config).config;
    detail::check_overlaps(c, o.r_max);
    std::vector<ZeroModeVerdict> out;
    auto push = [&](std::optional<ZeroModeVerdict> v) {
        if (v) out.push_back(std::move(*v));
    };
    push(rule_finite(c, spin));
    // collinear chains with unequal periods: the dedicated conditions are tried first
    push(rule_collinear(c, spin));
    push(rule_chains(c, spin));
    push(rule_lattices(c, spin, o));
    push(rule_simple_lattices(c, spin));
    push(rule_uniform_lattice(c, spin, o));
    push(rule_uniform_general(c, spin, o));
    push(rule_perturbed(c, spin, o));
    push(rule_irregular(c, spin));
    return out;
}

inline ZeroModeVerdict decide(const FluxConfiguration& config, Spin spin, const DecideOptions& opts)
{
    FluxConfiguration c = normalize_fluxes(config).config;
    detail::check_overlaps(c, opts.r_max);
    if (auto v = rule_finite(c, spin)) return *v;
    bool unequal_periods = false;
    for (const auto& g : detail::line_groups(c.chains))
        for (const auto& ch : g)
            if (std::abs(std::abs(ch.omega0) - std::abs(g.front().omega0)) > 1e-12 * std::abs(ch.omega0))
                unequal_periods = true;
    if (unequal_periods)
        if (auto v = rule_collinear(c, spin)) return *v;
    if (auto v = rule_chains(c, spin)) return *v;
    if (auto v = rule_lattices(c, spin, opts)) return *v;
    if (auto v = rule_simple_lattices(c, spin)) return *v;
    if (auto v = rule_uniform_lattice(c, spin, opts)) return *v;
    if (auto v = rule_uniform_general(c, spin, opts)) return *v;
    if (auto v = rule_perturbed(c, spin, opts)) return *v;
    if (auto v = rule_irregular(c, spin)) return *v;
    auto v = detail::make_verdict(VerdictStatus::Unknown, spin, "none", "", Recipe::None);
    v.low_confidence = true;
    v.note = "no rule applies to this configuration";
    return v;
}

}  // namespace abzero

#endif
