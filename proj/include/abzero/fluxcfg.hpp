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
#ifndef ABZERO_FLUXCFG_HPP_
#define ABZERO_FLUXCFG_HPP_

// Flux configurations: components, flux normalisation, collinear-chain
// merging, point-set statistics and support enumeration.

#include <abzero/cafun.hpp>
#include <abzero/common.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace abzero {

struct FluxSite {
    cplx position;
    double theta;
};

// kappa + Z omega0 for every offset kappa.
struct ChainComponent {
    cplx omega0;
    std::vector<FluxSite> offsets;
};

// kappa + Z omega1 + Z omega2 for every offset kappa.
struct LatticeComponent {
    LatticeBasis basis;
    std::vector<FluxSite> offsets;
};

// {exp(i pi k / N) m^(1/N)} together with the origin, all with one flux.
struct IrregularComponent {
    int order = 1;
    double theta = 0.5;
};

// origin + direction * scale * m^power for m = first, first + 1, ...
struct PointSequence {
    cplx origin = 0.0;
    cplx direction = 1.0;
    double scale = 1.0;
    double power = 1.0;
    std::int64_t first = 1;
};

struct PointSet {
    std::vector<cplx> points;
    std::optional<PointSequence> sequence;

    bool empty() const { return points.empty() && !sequence; }
    bool finite() const { return !sequence; }
};

struct AddedSet {
    PointSet points;
    double theta = 0.5;
};

struct Perturbation {
    PointSet removed;  // subset of the regular components
    std::vector<AddedSet> added;

    bool empty() const
    {
        return removed.empty() &&
               std::all_of(added.begin(), added.end(), [](const AddedSet& a) { return a.points.empty(); });
    }
    bool finite() const
    {
        return removed.finite() &&
               std::all_of(added.begin(), added.end(), [](const AddedSet& a) { return a.points.finite(); });
    }
};

struct FluxConfiguration {
    double uniform_flux_density = 0.0;  // xi0; the field is b0 = 2 pi xi0
    std::vector<FluxSite> finite;
    std::vector<ChainComponent> chains;
    std::vector<LatticeComponent> lattices;
    std::optional<IrregularComponent> irregular;
    Perturbation perturbation;

    bool has_periodic() const { return !chains.empty() || !lattices.empty() || irregular.has_value(); }
};

// ---------------------------------------------------------------------------
// Point enumeration

inline std::vector<cplx> points_within(const PointSequence& s, double r)
{
    std::vector<cplx> out;
    if (!(s.power > 0) || !(s.scale > 0) || std::abs(s.direction) == 0.0)
        throw config_error("point sequence needs positive scale, power and a direction");
    cplx d = s.direction / std::abs(s.direction);
    // |origin + d scale m^p| <= r implies scale m^p <= r + |origin|
    double bound = std::pow((r + std::abs(s.origin)) / s.scale, 1.0 / s.power);
    for (std::int64_t m = std::max<std::int64_t>(s.first, 0); static_cast<double>(m) <= bound + 1.0; ++m) {
        cplx p = s.origin + d * s.scale * std::pow(static_cast<double>(m), s.power);
        if (std::abs(p) <= r) out.push_back(p);
    }
    return out;
}

inline std::vector<cplx> points_within(const PointSet& set, double r)
{
    std::vector<cplx> out;
    for (cplx p : set.points)
        if (std::abs(p) <= r) out.push_back(p);
    if (set.sequence) {
        auto s = points_within(*set.sequence, r);
        out.insert(out.end(), s.begin(), s.end());
    }
    std::sort(out.begin(), out.end(), modulus_arg_less);
    return out;
}

inline std::vector<FluxSite> chain_sites_within(const ChainComponent& c, double r)
{
    std::vector<FluxSite> out;
    double w = std::abs(c.omega0);
    for (const auto& k : c.offsets) {
        // |kappa + t omega0| <= r is a quadratic condition in t
        double t0 = -(std::conj(c.omega0) * k.position).real() / (w * w);
        double d = std::abs(k.position + t0 * c.omega0);
        if (d > r) continue;
        double half = std::sqrt(r * r - d * d) / w;
        auto lo = static_cast<std::int64_t>(std::floor(t0 - half)) - 1;
        auto hi = static_cast<std::int64_t>(std::ceil(t0 + half)) + 1;
        for (std::int64_t n = lo; n <= hi; ++n) {
            cplx p = k.position + static_cast<double>(n) * c.omega0;
            if (std::abs(p) <= r) out.push_back({p, k.theta});
        }
    }
    return out;
}

inline std::vector<FluxSite> lattice_sites_within(const LatticeComponent& l, double r)
{
    std::vector<FluxSite> out;
    const cplx w1 = l.basis.omega1, w2 = l.basis.omega2;
    double s = cell_area(l.basis);
    for (const auto& k : l.offsets) {
        // coordinates of p - kappa are bounded through the dual basis
        double t1c = (std::conj(-k.position) * w2).imag() / s;
        double t2c = (std::conj(w1) * -k.position).imag() / s;
        double e1 = r * std::abs(w2) / s, e2 = r * std::abs(w1) / s;
        auto m0 = static_cast<std::int64_t>(std::floor(t1c - e1)) - 1;
        auto m1 = static_cast<std::int64_t>(std::ceil(t1c + e1)) + 1;
        auto n0 = static_cast<std::int64_t>(std::floor(t2c - e2)) - 1;
        auto n1 = static_cast<std::int64_t>(std::ceil(t2c + e2)) + 1;
        for (std::int64_t m = m0; m <= m1; ++m)
            for (std::int64_t n = n0; n <= n1; ++n) {
                cplx p = k.position + static_cast<double>(m) * w1 + static_cast<double>(n) * w2;
                if (std::abs(p) <= r) out.push_back({p, k.theta});
            }
    }
    return out;
}

inline std::vector<FluxSite> irregular_sites_within(const IrregularComponent& c, double r)
{
    if (c.order < 1) throw config_error("irregular component needs order >= 1");
    std::vector<FluxSite> out{{0.0, c.theta}};
    const int n = c.order;
    auto mmax = static_cast<std::int64_t>(std::floor(std::pow(r, n) + 1e-9));
    for (std::int64_t m = 1; m <= mmax; ++m) {
        double rad = std::pow(static_cast<double>(m), 1.0 / n);
        if (rad > r) break;
        for (int k = 0; k < 2 * n; ++k) out.push_back({std::polar(rad, pi * k / n), c.theta});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coincidence detection

namespace detail {

struct PointIndex {
    explicit PointIndex(double cell) : cell_(cell) {}

    std::pair<std::int64_t, std::int64_t> key(cplx p) const
    {
        return {static_cast<std::int64_t>(std::floor(p.real() / cell_)),
                static_cast<std::int64_t>(std::floor(p.imag() / cell_))};
    }

    // Index of a stored point within tol of p, or -1.
    long find(cplx p, double tol) const
    {
        auto [kx, ky] = key(p);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = map_.find({kx + dx, ky + dy});
                if (it == map_.end()) continue;
                for (auto idx : it->second)
                    if (std::abs(pts_[idx] - p) <= tol) return static_cast<long>(idx);
            }
        return -1;
    }

    std::size_t insert(cplx p)
    {
        pts_.push_back(p);
        map_[key(p)].push_back(pts_.size() - 1);
        return pts_.size() - 1;
    }

    double cell_;
    std::vector<cplx> pts_;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> map_;
};

inline double coincidence_tol(cplx p) { return 1e-9 * std::max(1.0, std::abs(p)); }

}  // namespace detail

// Smallest pairwise distance (plane sweep); infinity for fewer than two points.
inline double min_separation(std::vector<cplx> pts)
{
    double best = std::numeric_limits<double>::infinity();
    if (pts.size() < 2) return best;
    std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    std::set<std::pair<double, std::size_t>> active;
    std::size_t left = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (left < i && pts[i].real() - pts[left].real() > best) {
            active.erase({pts[left].imag(), left});
            ++left;
        }
        auto lo = active.lower_bound({pts[i].imag() - best, 0});
        for (auto it = lo; it != active.end() && it->first <= pts[i].imag() + best; ++it)
            best = std::min(best, std::abs(pts[i] - pts[it->second]));
        active.insert({pts[i].imag(), i});
    }
    return best;
}

// ---------------------------------------------------------------------------
// Validation and flux normalisation

inline void validate(const FluxConfiguration& c)
{
    auto check_theta = [](double t, const char* where) {
        if (!std::isfinite(t)) throw config_error(std::string("non-finite flux in ") + where);
    };
    if (!std::isfinite(c.uniform_flux_density)) throw config_error("non-finite uniform flux density");
    for (const auto& s : c.finite) {
        check_theta(s.theta, "finite site");
        if (!is_finite(s.position)) throw config_error("non-finite site position");
    }
    for (const auto& ch : c.chains) {
        if (!is_finite(ch.omega0) || std::abs(ch.omega0) == 0.0) throw config_error("chain period must be nonzero");
        if (ch.offsets.empty()) throw config_error("chain without offsets");
        for (const auto& k : ch.offsets) check_theta(k.theta, "chain offset");
    }
    for (const auto& l : c.lattices) {
        try {
            check_basis(l.basis);
        } catch (const domain_error& e) {
            throw config_error(e.what());
        }
        if (l.offsets.empty()) throw config_error("lattice without offsets");
        for (const auto& k : l.offsets) check_theta(k.theta, "lattice offset");
    }
    if (c.irregular) {
        if (c.irregular->order < 1) throw config_error("irregular component needs order >= 1");
        check_theta(c.irregular->theta, "irregular component");
    }
    for (const auto& a : c.perturbation.added) check_theta(a.theta, "added set");
    // a finite site may not coincide with another site of a different component
    auto near_int = [](double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); };
    detail::PointIndex seen(1.0);
    for (std::size_t i = 0; i < c.finite.size(); ++i) {
        cplx p = c.finite[i].position;
        if (seen.find(p, detail::coincidence_tol(p)) >= 0)
            throw config_error("finite[" + std::to_string(i) + "] duplicates another finite site");
        seen.insert(p);
        for (const auto& ch : c.chains)
            for (const auto& k : ch.offsets) {
                cplx t = (p - k.position) / ch.omega0;
                if (std::abs(t.imag()) <= 1e-9 * std::max(1.0, std::abs(t)) && near_int(t.real()))
                    throw config_error("finite[" + std::to_string(i) + "] lies on a chain site");
            }
        for (const auto& l : c.lattices)
            for (const auto& k : l.offsets) {
                cplx d = p - k.position;
                double det = cell_area(l.basis);
                double a = (std::conj(d) * l.basis.omega2).imag() / det;
                double b = (std::conj(l.basis.omega1) * d).imag() / det;
                if (near_int(a) && near_int(b)) throw config_error("finite[" + std::to_string(i) + "] lies on a lattice site");
            }
    }
}

struct GaugeShift {
    std::string component;  // e.g. "finite[0]", "chains[1].offsets[0]"
    double original_theta;
    double theta;            // in [0, 1); zero means the site was dropped
    std::int64_t shift;      // original = theta + shift
};

struct GaugeLog {
    std::vector<GaugeShift> shifts;
};

struct NormalizationResult {
    FluxConfiguration config;
    GaugeLog gauge;
};

namespace detail {

// Fractional part with values within 1e-12 of an integer snapped to zero.
inline std::pair<double, std::int64_t> split_flux(double t)
{
    double m = std::floor(t);
    double f = t - m;
    if (f < 1e-12) f = 0.0;
    if (f > 1.0 - 1e-12) {
        f = 0.0;
        m += 1.0;
    }
    return {f, static_cast<std::int64_t>(m)};
}

inline cplx chain_canonical_offset(cplx kappa, cplx omega0)
{
    double t = (std::conj(omega0) * kappa).real() / std::norm(omega0);
    return kappa - std::floor(t + 1e-13) * omega0;
}

inline cplx lattice_canonical_offset(cplx kappa, const LatticeBasis& b)
{
    double s = cell_area(b);
    double t1 = (std::conj(kappa) * b.omega2).imag() / s;
    double t2 = (std::conj(b.omega1) * kappa).imag() / s;
    return kappa - std::floor(t1 + 1e-13) * b.omega1 - std::floor(t2 + 1e-13) * b.omega2;
}

}  // namespace detail

// Offsets of chains and lattices moved into the elementary strip / cell and sorted.
inline void canonicalize_geometry(FluxConfiguration& c)
{
    for (auto& ch : c.chains) {
        for (auto& k : ch.offsets) k.position = detail::chain_canonical_offset(k.position, ch.omega0);
        std::sort(ch.offsets.begin(), ch.offsets.end(), [&](const FluxSite& a, const FluxSite& b) {
            double ta = (std::conj(ch.omega0) * a.position).real(), tb = (std::conj(ch.omega0) * b.position).real();
            if (ta != tb) return ta < tb;
            return (std::conj(ch.omega0) * a.position).imag() < (std::conj(ch.omega0) * b.position).imag();
        });
    }
    for (auto& l : c.lattices) {
        for (auto& k : l.offsets) k.position = detail::lattice_canonical_offset(k.position, l.basis);
        std::sort(l.offsets.begin(), l.offsets.end(),
                  [](const FluxSite& a, const FluxSite& b) { return modulus_arg_less(a.position, b.position); });
    }
}

// theta -> theta - floor(theta); sites whose flux becomes an integer are removed.
// The integer parts are singular gauge transformations and are only logged.
inline NormalizationResult normalize_fluxes(const FluxConfiguration& in)
{
    validate(in);
    NormalizationResult out;
    FluxConfiguration& c = out.config;
    c.uniform_flux_density = in.uniform_flux_density;
    auto log = [&](std::string where, double orig, double f, std::int64_t m) {
        if (m != 0 || f == 0.0) out.gauge.shifts.push_back({std::move(where), orig, f, m});
    };
    for (std::size_t i = 0; i < in.finite.size(); ++i) {
        auto [f, m] = detail::split_flux(in.finite[i].theta);
        log("finite[" + std::to_string(i) + "]", in.finite[i].theta, f, m);
        if (f > 0) c.finite.push_back({in.finite[i].position, f});
    }
    for (std::size_t i = 0; i < in.chains.size(); ++i) {
        ChainComponent ch{in.chains[i].omega0, {}};
        for (std::size_t j = 0; j < in.chains[i].offsets.size(); ++j) {
            const auto& k = in.chains[i].offsets[j];
            auto [f, m] = detail::split_flux(k.theta);
            log("chains[" + std::to_string(i) + "].offsets[" + std::to_string(j) + "]", k.theta, f, m);
            if (f > 0) ch.offsets.push_back({k.position, f});
        }
        if (!ch.offsets.empty()) c.chains.push_back(std::move(ch));
    }
    for (std::size_t i = 0; i < in.lattices.size(); ++i) {
        LatticeComponent l{in.lattices[i].basis, {}};
        for (std::size_t j = 0; j < in.lattices[i].offsets.size(); ++j) {
            const auto& k = in.lattices[i].offsets[j];
            auto [f, m] = detail::split_flux(k.theta);
            log("lattices[" + std::to_string(i) + "].offsets[" + std::to_string(j) + "]", k.theta, f, m);
            if (f > 0) l.offsets.push_back({k.position, f});
        }
        if (!l.offsets.empty()) c.lattices.push_back(std::move(l));
    }
    if (in.irregular) {
        auto [f, m] = detail::split_flux(in.irregular->theta);
        log("irregular", in.irregular->theta, f, m);
        if (f > 0) c.irregular = IrregularComponent{in.irregular->order, f};
    }
    c.perturbation.removed = in.perturbation.removed;
    for (std::size_t i = 0; i < in.perturbation.added.size(); ++i) {
        const auto& a = in.perturbation.added[i];
        auto [f, m] = detail::split_flux(a.theta);
        log("perturbation.added[" + std::to_string(i) + "]", a.theta, f, m);
        if (f > 0) c.perturbation.added.push_back({a.points, f});
    }
    canonicalize_geometry(c);
    return out;
}

// Mirror image with fluxes 1 - theta and reversed field; maps one spin
// component onto the other.
inline FluxConfiguration spin_dual(const FluxConfiguration& in)
{
    FluxConfiguration c = normalize_fluxes(in).config;
    c.uniform_flux_density = -c.uniform_flux_density;
    for (auto& s : c.finite) s = {std::conj(s.position), 1.0 - s.theta};
    for (auto& ch : c.chains) {
        ch.omega0 = std::conj(ch.omega0);
        for (auto& k : ch.offsets) k = {std::conj(k.position), 1.0 - k.theta};
    }
    for (auto& l : c.lattices) {
        // conjugation flips orientation; swap to keep Im(conj(w1) w2) > 0
        l.basis = {std::conj(l.basis.omega2), std::conj(l.basis.omega1)};
        for (auto& k : l.offsets) k = {std::conj(k.position), 1.0 - k.theta};
    }
    if (c.irregular) c.irregular->theta = 1.0 - c.irregular->theta;
    auto conj_set = [](PointSet& s) {
        for (auto& p : s.points) p = std::conj(p);
        if (s.sequence) {
            s.sequence->origin = std::conj(s.sequence->origin);
            s.sequence->direction = std::conj(s.sequence->direction);
        }
    };
    conj_set(c.perturbation.removed);
    for (auto& a : c.perturbation.added) {
        conj_set(a.points);
        a.theta = 1.0 - a.theta;
    }
    canonicalize_geometry(c);
    return c;
}

// ---------------------------------------------------------------------------
// Collinear chains

namespace detail {

// Best rational approximation p/q with q <= qmax; nullopt if none within tol.
inline std::optional<std::pair<std::int64_t, std::int64_t>> rationalize(double x, double tol, std::int64_t qmax)
{
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(r);
        auto ai = static_cast<std::int64_t>(a);
        std::int64_t h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > qmax) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol * std::max(1.0, std::abs(x)))
            return std::make_pair(h1, k1);
        double frac = r - a;
        if (frac < 1e-15) break;
        r = 1.0 / frac;
    }
    return std::nullopt;
}

inline bool parallel(cplx a, cplx b) { return std::abs((std::conj(a) * b).imag()) <= 1e-10 * std::abs(a) * std::abs(b); }

// Signed distance of p from the line through the origin with direction d.
inline double line_offset(cplx p, cplx d) { return (std::conj(d / std::abs(d)) * p).imag(); }

}  // namespace detail

// Split a chain into sub-chains whose offsets lie on one line each.
inline std::vector<ChainComponent> split_by_line(const ChainComponent& c)
{
    std::vector<ChainComponent> out;
    for (const auto& k : c.offsets) {
        double off = detail::line_offset(k.position, c.omega0);
        auto it = std::find_if(out.begin(), out.end(), [&](const ChainComponent& g) {
            return std::abs(detail::line_offset(g.offsets.front().position, c.omega0) - off) <=
                   1e-10 * std::max(1.0, std::abs(off));
        });
        if (it == out.end())
            out.push_back({c.omega0, {k}});
        else
            it->offsets.push_back(k);
    }
    return out;
}

inline bool collinear(const ChainComponent& a, const ChainComponent& b)
{
    if (!detail::parallel(a.omega0, b.omega0)) return false;
    for (const auto& ka : a.offsets)
        for (const auto& kb : b.offsets) {
            double da = detail::line_offset(ka.position, a.omega0), db = detail::line_offset(kb.position, a.omega0);
            if (std::abs(da - db) > 1e-10 * std::max(1.0, std::abs(da))) return false;
        }
    return true;
}

struct MergeResult {
    std::optional<ChainComponent> chain;
    std::string rejection;  // set when the periods are not commensurate
};

// Union of chains lying on one line. The common period is the least common
// multiple of the periods; points that coincide have their fluxes added.
inline MergeResult merge_collinear_chains(const std::vector<ChainComponent>& chains, std::int64_t max_denominator = 1000)
{
    if (chains.empty()) throw precondition_error("merge_collinear_chains: no chains");
    for (const auto& c : chains)
        for (const auto& s : split_by_line(c))
            if (!collinear(s, split_by_line(chains.front()).front()))
                throw precondition_error("merge_collinear_chains: chains do not share a line");
    const cplx dir = chains.front().omega0 / std::abs(chains.front().omega0);
    const double p1 = std::abs(chains.front().omega0);
    std::vector<std::int64_t> num, den;
    for (const auto& c : chains) {
        double ratio = std::abs(c.omega0) / p1;
        auto pq = detail::rationalize(ratio, 1e-11, max_denominator);
        if (!pq) {
            std::ostringstream os;
            os.precision(17);
            os << "period ratio " << ratio << " is not rational with denominator <= " << max_denominator;
            return {std::nullopt, os.str()};
        }
        num.push_back(pq->first);
        den.push_back(pq->second);
    }
    // periods are p1 * num/den; write them as integer multiples of unit = p1 / lcm(den)
    std::int64_t l = 1;
    for (auto d : den) l = std::lcm(l, d);
    std::int64_t common = 1;
    for (std::size_t i = 0; i < num.size(); ++i) common = std::lcm(common, num[i] * (l / den[i]));
    const double unit = p1 / static_cast<double>(l);
    const double period = unit * static_cast<double>(common);
    const cplx omega = dir * period;

    ChainComponent merged{omega, {}};
    detail::PointIndex index(1e-6 * period);
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const auto& c = chains[i];
        cplx step = dir * std::abs(c.omega0);
        auto copies = static_cast<std::int64_t>(std::llround(period / std::abs(c.omega0)));
        for (const auto& k : c.offsets)
            for (std::int64_t j = 0; j < copies; ++j) {
                cplx p = detail::chain_canonical_offset(k.position + static_cast<double>(j) * step, omega);
                // a point near the strip's far edge is the same site as one near its near edge
                double t = (std::conj(omega) * p).real() / std::norm(omega);
                if (t > 1.0 - 1e-10) p -= omega;
                long hit = index.find(p, 1e-9 * period);
                if (hit >= 0) {
                    merged.offsets[static_cast<std::size_t>(hit)].theta += k.theta;
                } else {
                    index.insert(p);
                    merged.offsets.push_back({p, k.theta});
                }
            }
    }
    FluxConfiguration tmp;
    tmp.chains.push_back(merged);
    canonicalize_geometry(tmp);
    return {tmp.chains.front(), ""};
}

// ---------------------------------------------------------------------------
// Point-set statistics

class SetStats {
  public:
    SetStats(std::vector<cplx> pts, double r_max) : r_max_(r_max)
    {
        pts_.reserve(pts.size());
        for (cplx p : pts)
            if (std::abs(p) <= r_max) pts_.push_back(p);
        std::sort(pts_.begin(), pts_.end(), modulus_arg_less);
        for (cplx p : pts_) mod_.push_back(std::abs(p));
    }

    double r_max() const { return r_max_; }
    const std::vector<cplx>& points() const { return pts_; }

    std::size_t count(double r) const
    {
        return static_cast<std::size_t>(std::upper_bound(mod_.begin(), mod_.end(), r) - mod_.begin());
    }

    // sum over 0 < |w| <= r of |w|^-alpha
    double T(double alpha, double r) const
    {
        const auto& pre = real_prefix(alpha);
        return pre[count(r)];
    }

    // sum over 0 < |w| <= r of w^-alpha (principal power)
    cplx S(double alpha, double r) const
    {
        const auto& pre = complex_prefix(alpha);
        return pre[count(r)];
    }

    // Slope of ln n(r) against ln r over the top decade of [0, r_max].
    double convergence_exponent() const
    {
        std::vector<double> x, y;
        for (int i = 0; i <= 40; ++i) {
            double r = r_max_ * std::pow(10.0, -1.0 + i / 40.0);
            std::size_t n = count(r);
            if (n == 0) continue;
            x.push_back(std::log(r));
            y.push_back(std::log(static_cast<double>(n)));
        }
        if (x.size() < 2) return 0.0;
        return slope(x, y);
    }

    // True when the data span fewer than two decades of radii.
    bool low_confidence() const
    {
        double first = 0;
        for (double m : mod_)
            if (m > 0) {
                first = m;
                break;
            }
        if (first == 0) return true;
        return r_max_ / first < 100.0;
    }

    // Whether T(alpha, r) grows without bound. Away from the convergence
    // exponent tau the answer is alpha < tau; within 0.1 of it the sum must
    // grow log-linearly over the top decade (correlation with ln r above 0.99
    // and the last half-decade increment at least half the previous one).
    bool diverges(double alpha) const
    {
        double tau = convergence_exponent();
        if (alpha < tau - 0.1) return true;
        if (alpha > tau + 0.1) return false;
        std::vector<double> x, y;
        for (int i = 0; i <= 40; ++i) {
            double r = r_max_ * std::pow(10.0, -1.0 + i / 40.0);
            x.push_back(std::log(r));
            y.push_back(T(alpha, r));
        }
        double c = correlation(x, y);
        double a = T(alpha, r_max_ / 10.0), b = T(alpha, r_max_ / std::sqrt(10.0)), d = T(alpha, r_max_);
        double inc_prev = b - a, inc_last = d - b;
        if (!(inc_prev > 0)) return false;
        return c > 0.99 && inc_last >= 0.5 * inc_prev;
    }

    // Largest integer n >= 0 with divergent T(n, .); nullopt for finite sets
    // (genus minus infinity).
    std::optional<int> genus(int max_genus = 12) const
    {
        std::size_t nonzero = 0;
        for (double m : mod_)
            if (m > 0) ++nonzero;
        if (nonzero == 0) return std::nullopt;
        if (!diverges(0.0)) return std::nullopt;  // finitely many points
        int p = 0;
        for (int n = 1; n <= max_genus; ++n)
            if (diverges(n)) p = n;
        return p;
    }

  private:
    static double slope(const std::vector<double>& x, const std::vector<double>& y)
    {
        double n = static_cast<double>(x.size());
        double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        return sxy / sxx;
    }

    static double correlation(const std::vector<double>& x, const std::vector<double>& y)
    {
        double n = static_cast<double>(x.size());
        double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
        if (sxx == 0 || syy == 0) return 0.0;
        return sxy / std::sqrt(sxx * syy);
    }

    const std::vector<double>& real_prefix(double alpha) const
    {
        auto it = rcache_.find(alpha);
        if (it != rcache_.end()) return it->second;
        std::vector<double> pre(pts_.size() + 1, 0.0);
        for (std::size_t i = 0; i < pts_.size(); ++i)
            pre[i + 1] = pre[i] + (mod_[i] > 0 ? std::pow(mod_[i], -alpha) : 0.0);
        return rcache_.emplace(alpha, std::move(pre)).first->second;
    }

    const std::vector<cplx>& complex_prefix(double alpha) const
    {
        auto it = ccache_.find(alpha);
        if (it != ccache_.end()) return it->second;
        std::vector<cplx> pre(pts_.size() + 1, 0.0);
        for (std::size_t i = 0; i < pts_.size(); ++i)
            pre[i + 1] = pre[i] + (mod_[i] > 0 ? std::pow(pts_[i], -alpha) : cplx(0.0));
        return ccache_.emplace(alpha, std::move(pre)).first->second;
    }

    double r_max_;
    std::vector<cplx> pts_;
    std::vector<double> mod_;
    mutable std::map<double, std::vector<double>> rcache_;
    mutable std::map<double, std::vector<cplx>> ccache_;
};

inline SetStats set_stats(const std::vector<cplx>& pts, double r_max) { return SetStats(pts, r_max); }

inline SetStats set_stats(const PointSet& set, double r_max) { return SetStats(points_within(set, r_max), r_max); }

// ---------------------------------------------------------------------------
// Support

// Sites of the regular components (finite, chains, lattices, irregular), unsorted.
inline std::vector<FluxSite> regular_sites_within(const FluxConfiguration& c, double r)
{
    std::vector<FluxSite> out;
    for (const auto& s : c.finite)
        if (std::abs(s.position) <= r) out.push_back(s);
    for (const auto& ch : c.chains) {
        auto v = chain_sites_within(ch, r);
        out.insert(out.end(), v.begin(), v.end());
    }
    for (const auto& l : c.lattices) {
        auto v = lattice_sites_within(l, r);
        out.insert(out.end(), v.begin(), v.end());
    }
    if (c.irregular) {
        auto v = irregular_sites_within(*c.irregular, r);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

// Every flux site with |w| <= r after the perturbation is applied, sorted by
// modulus then argument. Coincident sites from different components, removed
// points that are not sites and added points on existing sites are errors.
inline std::vector<FluxSite> enumerate_support(const FluxConfiguration& c, double r)
{
    validate(c);
    // a margin so that removed points just inside r still find their site
    auto regular = regular_sites_within(c, r * (1 + 1e-12) + 1e-12);
    detail::PointIndex index(1e-3);
    std::vector<FluxSite> sites;
    std::vector<char> alive;
    for (const auto& s : regular) {
        if (index.find(s.position, detail::coincidence_tol(s.position)) >= 0)
            throw config_error("two components share a site");
        index.insert(s.position);
        sites.push_back(s);
        alive.push_back(1);
    }
    for (cplx p : points_within(c.perturbation.removed, r)) {
        long hit = index.find(p, detail::coincidence_tol(p));
        if (hit < 0 || !alive[static_cast<std::size_t>(hit)]) throw config_error("removed point is not a flux site");
        alive[static_cast<std::size_t>(hit)] = 0;
    }
    for (const auto& a : c.perturbation.added)
        for (cplx p : points_within(a.points, r)) {
            if (index.find(p, detail::coincidence_tol(p)) >= 0) throw config_error("added point coincides with a site");
            index.insert(p);
            sites.push_back({p, a.theta});
            alive.push_back(1);
        }
    std::vector<FluxSite> out;
    for (std::size_t i = 0; i < sites.size(); ++i)
        if (alive[i] && std::abs(sites[i].position) <= r) out.push_back(sites[i]);
    std::sort(out.begin(), out.end(),
              [](const FluxSite& a, const FluxSite& b) { return modulus_arg_less(a.position, b.position); });
    return out;
}

}  // namespace abzero

#endif
