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
#ifndef ABZERO_VERIFY_HPP_
#define ABZERO_VERIFY_HPP_

// Numerical checks of zero modes: L2 norms, residuals of the annihilation
// operator and of the potential equation, Laurent coefficients and loop
// fluxes. Growth estimates are re-exported from growth.hpp.

#include <abzero/ansatz.hpp>
#include <abzero/growth.hpp>
#include <abzero/quadrature.hpp>

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace abzero {

// ---------------------------------------------------------------------------
// L2 norms

enum class L2Flag { Convergent, Divergent, Inconclusive };

inline const char* to_string(L2Flag f)
{
    switch (f) {
        case L2Flag::Convergent: return "Convergent";
        case L2Flag::Divergent: return "Divergent";
        default: return "Inconclusive";
    }
}

struct L2Options {
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    double max_radius = 1024.0;     // outer radius cap of the doubling sequence
    double divergence_ratio = 1.5;  // annulus mass growth that counts as divergence
    int threads = 1;
    std::size_t max_evals = 50'000'000;
};

struct QuadratureResult {
    double value = 0;  // integral including the tail estimate
    double error = 0;  // quadrature error plus tail uncertainty
    double tail = 0;   // extrapolated mass beyond the last radius
    L2Flag flag = L2Flag::Inconclusive;
    std::vector<std::pair<double, double>> radii_trace;  // (outer radius, partial integral)
    std::size_t evals = 0;
    std::string notice;
};

// Singular points of the integrand within a radius, as (point, exponent of the integrand).
using SingularList = std::function<std::vector<std::pair<cplx, double>>(double)>;

// Integral of a non-negative g over the plane: a disc of the core radius,
// then annuli of doubling radius. Beyond the core the annulus masses are
// extrapolated geometrically, with the ratio from the hint when known.
inline QuadratureResult plane_integral(const quad::Integrand& g, const SingularList& singular, const DecayHint& hint,
                                       const L2Options& o = {})
{
    QuadratureResult res;
    const double core = std::max(1.0, hint.core_radius);
    quad::Options qo;
    qo.threads = o.threads;
    qo.max_evals = o.max_evals;
    std::vector<double> incr;
    double total = 0, qerr = 0;
    int grow = 0;
    double r0 = 0, r1 = core;
    while (true) {
        qo.abs_tol = 0.1 * std::max(o.abs_tol, o.rel_tol * total);
        qo.rel_tol = 0.1 * o.rel_tol;
        auto all = singular(r1 + 0.5 * (r1 - r0) + 1.0);
        std::vector<std::pair<cplx, double>> near;
        for (const auto& s : all)
            if (std::abs(s.first) >= r0 - 0.5 * (r1 - r0) - 1.0) near.push_back(s);
        auto q = quad::integrate_annulus(g, 0.0, r0, r1, near, qo);
        res.evals += q.evals;
        if (q.nonfinite || !std::isfinite(q.value)) {
            res.flag = r0 > 0 ? L2Flag::Divergent : L2Flag::Inconclusive;
            res.notice = "non-finite integrand between r = " + detail::fmt(r0) + " and " + detail::fmt(r1);
            res.value = total;
            return res;
        }
        if (!q.converged) res.notice = "annulus quadrature hit its evaluation budget at r = " + detail::fmt(r1);
        total += q.value;
        qerr += q.error;
        res.radii_trace.emplace_back(r1, total);
        if (r0 > 0) {
            incr.push_back(q.value);
            std::size_t k = incr.size();
            if (k >= 2 && incr[k - 2] > 0) {
                double ratio = incr[k - 1] / incr[k - 2];
                grow = ratio >= o.divergence_ratio ? grow + 1 : 0;
                if (grow >= 2 && r0 >= core) {
                    res.flag = L2Flag::Divergent;
                    res.value = total;
                    res.error = qerr;
                    res.notice = "annulus mass grows by " + detail::fmt(ratio) + " per doubling";
                    return res;
                }
                // convergence test, needs two annuli beyond the core
                bool known = hint.kind == DecayHint::Kind::PowerLaw && hint.ratio > 0 && hint.ratio < 1;
                double q_use = known ? hint.ratio : ratio;
                if (q_use < 0.9) {
                    double tail = incr[k - 1] * q_use / (1 - q_use);
                    double unc = known ? std::abs(incr[k - 1] - q_use * incr[k - 2]) / (1 - q_use) : tail;
                    double target = std::max(o.abs_tol, o.rel_tol * (total + tail));
                    if (unc + qerr <= target) {
                        res.flag = L2Flag::Convergent;
                        res.tail = tail;
                        res.value = total + tail;
                        res.error = unc + qerr;
                        return res;
                    }
                }
            } else if (k >= 2 && incr[k - 1] == 0 && incr[k - 2] == 0) {
                res.flag = L2Flag::Convergent;
                res.value = total;
                res.error = qerr;
                return res;
            }
        }
        if (r1 >= o.max_radius) break;
        r0 = r1;
        r1 = 2 * r1;
    }
    res.flag = L2Flag::Inconclusive;
    res.value = total;
    res.error = qerr;
    if (res.notice.empty()) res.notice = "radius cap " + detail::fmt(o.max_radius) + " reached";
    return res;
}

inline QuadratureResult l2_norm_squared(const WaveFunction& psi, const L2Options& o = {})
{
    for (const auto& s : psi.singular_within(std::max(1.0, psi.decay_hint().core_radius)))
        if (s.exponent <= -1.0)
            throw precondition_error("l2_norm_squared: |psi|^2 is not locally integrable at " + detail::fmt(s.point));
    auto g = [&psi](cplx z) { return std::exp(2.0 * psi.log_abs(z)); };
    auto sing = [&psi](double r) {
        std::vector<std::pair<cplx, double>> out;
        for (const auto& s : psi.singular_within(r)) out.emplace_back(s.point, 2.0 * s.exponent);
        return out;
    };
    return plane_integral(g, sing, psi.decay_hint(), o);
}

// Integral of g over the disc |z - centre| < r with the given singular points.
inline quad::Result disc_integral(const quad::Integrand& g, cplx centre, double r,
                                  const std::vector<std::pair<cplx, double>>& singular, double abs_tol = 1e-12,
                                  double rel_tol = 1e-10)
{
    quad::Options qo;
    qo.abs_tol = abs_tol;
    qo.rel_tol = rel_tol;
    return quad::integrate_annulus(g, centre, 0.0, r, singular, qo);
}

// ---------------------------------------------------------------------------
// Residuals on a probe annulus

struct ProbeRegion {
    cplx centre = 0.0;
    double r_inner = 0.5;
    double r_outer = 1.0;
    int radial = 6;
    int angular = 24;
};

inline std::vector<cplx> probe_points(const ProbeRegion& p)
{
    std::vector<cplx> out;
    for (int i = 0; i < p.radial; ++i) {
        double r = p.r_inner + (p.r_outer - p.r_inner) * (i + 0.5) / p.radial;
        for (int j = 0; j < p.angular; ++j) out.push_back(p.centre + std::polar(r, 2 * pi * (j + 0.5) / p.angular));
    }
    return out;
}

struct ResidualReport {
    std::vector<double> meshes;
    std::vector<double> residuals;  // sup over the probe points, per mesh
    double order = 0;               // least-squares slope of ln residual against ln h
    bool exact = false;             // residuals at rounding level, order meaningless
    std::string notice;
};

namespace detail {

inline void require_clear(const ScalarPotential& phi, const ProbeRegion& p, double pad)
{
    if (!(p.r_outer > p.r_inner && p.r_inner >= 0)) throw precondition_error("probe region: need r_outer > r_inner >= 0");
    for (const auto& s : phi.sites_within(std::abs(p.centre) + p.r_outer + pad)) {
        double d = std::abs(s.position - p.centre);
        if (d > p.r_inner - pad && d < p.r_outer + pad)
            throw precondition_error("probe region is within " + fmt(pad) + " of the flux site " + fmt(s.position));
    }
}

inline double slope(const std::vector<double>& h, const std::vector<double>& r)
{
    double n = 0, mx = 0, my = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        mx += std::log(h[i]);
        my += std::log(r[i]);
        n += 1;
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        double dx = std::log(h[i]) - mx;
        sxy += dx * (std::log(r[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

inline void finish(ResidualReport& rep, double rounding)
{
    double worst = *std::max_element(rep.residuals.begin(), rep.residuals.end());
    if (worst <= rounding) {
        rep.exact = true;
        rep.order = std::numeric_limits<double>::quiet_NaN();
        rep.notice = "residual at rounding level";
        return;
    }
    for (double r : rep.residuals)
        if (!(r > 0)) {
            rep.notice = "zero residual on some mesh";
            rep.order = std::numeric_limits<double>::quiet_NaN();
            return;
        }
    rep.order = slope(rep.meshes, rep.residuals);
}

}  // namespace detail

// A probe annulus near the origin as far as possible from every flux site
// and from the zeros of the factors (where the relative residual is
// ill-conditioned).
inline ProbeRegion choose_probe_region(const WaveFunction& psi, double search = 3.0)
{
    std::vector<cplx> avoid;
    for (const auto& s : psi.potential().sites_within(2 * search + 2)) avoid.push_back(s.position);
    for (const auto& f : psi.factors())
        for (const auto& [p, m] : f.term->zeros_within(2 * search + 2)) avoid.push_back(p);
    ProbeRegion best;
    double best_d = -1;
    const int n = 24;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            // offset grid so that symmetric configurations do not tie on lattice points
            cplx c(-search + 2 * search * (i + 0.137) / n, -search + 2 * search * (j + 0.291) / n);
            double d = std::numeric_limits<double>::infinity();
            for (cplx p : avoid) d = std::min(d, std::abs(p - c));
            d = std::min(d, 2.0);
            // prefer clear regions close to the origin
            double score = d - 0.05 * std::abs(c);
            if (score > best_d) {
                best_d = score;
                best.centre = c;
                best.r_inner = 0.2 * d;
                best.r_outer = 0.5 * d;
            }
        }
    return best;
}

// sup |D psi| / sup |psi| with centred differences, D = (-i d_x - a_x) +- i (-i d_y - a_y).
inline ResidualReport annihilation_residual(const WaveFunction& psi, const VectorPotential& a, const ProbeRegion& region,
                                            std::vector<double> meshes = {1e-2, 5e-3, 2.5e-3})
{
    if (meshes.size() < 2) throw precondition_error("annihilation_residual: need at least two meshes");
    double hmax = *std::max_element(meshes.begin(), meshes.end());
    detail::require_clear(a.potential(), region, 10 * hmax);
    detail::require_clear(psi.potential(), region, 10 * hmax);
    auto pts = probe_points(region);
    double scale = 0;
    std::vector<cplx> vals, avec;
    for (cplx z : pts) {
        cplx v = psi.value(z);
        auto av = a(z);
        vals.push_back(v);
        avec.emplace_back(av[0], av[1]);
        scale = std::max(scale, std::abs(v));
    }
    if (!(scale > 0) || !std::isfinite(scale)) throw domain_error("annihilation_residual: psi vanishes or overflows on the probe region");
    const double s = psi.spin() == Spin::Plus ? 1.0 : -1.0;
    ResidualReport rep;
    rep.meshes = meshes;
    for (double h : meshes) {
        double worst = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cplx z = pts[i];
            cplx px = (psi.value(z + h) - psi.value(z - h)) / (2 * h);
            cplx py = (psi.value(z + I * h) - psi.value(z - I * h)) / (2 * h);
            cplx r = -I * px + s * py - (avec[i].real() + s * I * avec[i].imag()) * vals[i];
            worst = std::max(worst, std::abs(r));
        }
        rep.residuals.push_back(worst / scale);
    }
    double hmin = *std::min_element(meshes.begin(), meshes.end());
    detail::finish(rep, 1e3 * std::numeric_limits<double>::epsilon() / hmin);
    return rep;
}

inline ResidualReport annihilation_residual(const WaveFunction& psi, const ProbeRegion& region,
                                            std::vector<double> meshes = {1e-2, 5e-3, 2.5e-3})
{
    return annihilation_residual(psi, VectorPotential(psi.potential_ptr()), region, std::move(meshes));
}

// sup |Laplacian_h phi - 2 pi xi0| with the five-point stencil.
inline ResidualReport laplacian_residual(const ScalarPotential& phi, const ProbeRegion& region,
                                         std::vector<double> meshes = {1e-2, 5e-3, 2.5e-3})
{
    if (meshes.size() < 2) throw precondition_error("laplacian_residual: need at least two meshes");
    double hmax = *std::max_element(meshes.begin(), meshes.end());
    detail::require_clear(phi, region, 10 * hmax);
    auto pts = probe_points(region);
    double mag = 0;
    for (cplx z : pts) mag = std::max(mag, std::abs(phi.value(z)));
    ResidualReport rep;
    rep.meshes = meshes;
    for (double h : meshes) {
        double worst = 0;
        for (cplx z : pts) {
            double lap = (phi.value(z + h) + phi.value(z - h) + phi.value(z + I * h) + phi.value(z - I * h) - 4 * phi.value(z)) / (h * h);
            worst = std::max(worst, std::abs(lap - phi.source_density()));
        }
        rep.residuals.push_back(worst);
    }
    double hmin = *std::min_element(meshes.begin(), meshes.end());
    detail::finish(rep, 1e2 * std::numeric_limits<double>::epsilon() * std::max(1.0, mag) / (hmin * hmin));
    return rep;
}

// ---------------------------------------------------------------------------
// Laurent coefficients

struct LaurentReport {
    cplx coefficient;
    double circle_integral = 0;  // integral of |f| |dz| over the circle
    double cauchy_bound = 0;     // 2 pi |a_n| r^(n+1)
    bool bound_holds = false;
};

// a_n of f around centre from the trapezoid rule on |z - centre| = r.
inline LaurentReport laurent_coefficient(const std::function<cplx(cplx)>& f, cplx centre, double r, int n, int samples = 512)
{
    if (!(r > 0) || samples < 8) throw precondition_error("laurent_coefficient: need r > 0 and at least 8 samples");
    LaurentReport rep;
    cplx sum = 0.0;
    double absum = 0;
    for (int k = 0; k < samples; ++k) {
        double t = 2 * pi * k / samples;
        cplx v = f(centre + std::polar(r, t));
        if (!is_finite(v)) throw domain_error("laurent_coefficient: f is singular on the circle");
        sum += v * std::polar(std::pow(r, -n), -n * t);
        absum += std::abs(v);
    }
    rep.coefficient = sum / static_cast<double>(samples);
    rep.circle_integral = absum * 2 * pi * r / samples;
    rep.cauchy_bound = 2 * pi * std::abs(rep.coefficient) * std::pow(r, n + 1);
    rep.bound_holds = rep.circle_integral >= rep.cauchy_bound * (1 - 1e-12);
    return rep;
}

// ---------------------------------------------------------------------------
// Loop fluxes

struct Rectangle {
    double x0, x1, y0, y1;
};

struct LoopFluxReport {
    double circulation = 0;  // line integral of a around the boundary
    double expected = 0;     // 2 pi (enclosed site flux) + b0 * area
    double error = 0;        // quadrature error estimate
};

namespace detail {

// adaptive Gauss-Legendre on [0, 1] for a smooth function
inline double adaptive_line(const std::function<double(double)>& f, double a, double b, double tol, int depth, double& err)
{
    const auto& rule = quad::legendre_rule(10);
    auto gl = [&](double lo, double hi) {
        double s = 0;
        for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(lo + (hi - lo) * rule.x[i]);
        return s * (hi - lo);
    };
    double m = 0.5 * (a + b);
    double whole = gl(a, b), halves = gl(a, m) + gl(m, b);
    if (std::abs(whole - halves) <= tol || depth > 40) {
        err += std::abs(whole - halves);
        return halves;
    }
    return adaptive_line(f, a, m, 0.5 * tol, depth + 1, err) + adaptive_line(f, m, b, 0.5 * tol, depth + 1, err);
}

}  // namespace detail

inline LoopFluxReport loop_flux(const VectorPotential& a, const Rectangle& rect, int panels_per_side = 8)
{
    if (!(rect.x1 > rect.x0 && rect.y1 > rect.y0) || panels_per_side < 1)
        throw precondition_error("loop_flux: degenerate rectangle");
    const ScalarPotential& phi = a.potential();
    cplx corners[4] = {{rect.x0, rect.y0}, {rect.x1, rect.y0}, {rect.x1, rect.y1}, {rect.x0, rect.y1}};
    double reach = 0;
    for (cplx c : corners) reach = std::max(reach, std::abs(c));
    LoopFluxReport rep;
    double enclosed = 0;
    for (const auto& s : phi.sites_within(reach + 1)) {
        double x = s.position.real(), y = s.position.imag();
        bool on_x = (std::abs(x - rect.x0) < 1e-12 || std::abs(x - rect.x1) < 1e-12) && y >= rect.y0 && y <= rect.y1;
        bool on_y = (std::abs(y - rect.y0) < 1e-12 || std::abs(y - rect.y1) < 1e-12) && x >= rect.x0 && x <= rect.x1;
        if (on_x || on_y) throw precondition_error("loop_flux: a flux site lies on the loop");
        if (x > rect.x0 && x < rect.x1 && y > rect.y0 && y < rect.y1) enclosed += s.theta;
    }
    rep.expected = 2 * pi * enclosed + phi.source_density() * (rect.x1 - rect.x0) * (rect.y1 - rect.y0);
    for (int side = 0; side < 4; ++side) {
        cplx p = corners[side], q = corners[(side + 1) % 4], d = q - p;
        auto f = [&](double t) {
            auto av = a(p + t * d);
            return av[0] * d.real() + av[1] * d.imag();
        };
        for (int k = 0; k < panels_per_side; ++k)
            rep.circulation += detail::adaptive_line(f, static_cast<double>(k) / panels_per_side,
                                                     static_cast<double>(k + 1) / panels_per_side, 1e-13, 0, rep.error);
    }
    return rep;
}

}  // namespace abzero

#endif
