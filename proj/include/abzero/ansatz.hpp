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
#ifndef ABZERO_ANSATZ_HPP_
#define ABZERO_ANSATZ_HPP_

// Scalar potentials, vector potentials and explicit zero modes.
//
// A configuration is described by a list of holomorphic functions F_t that
// vanish exactly on its flux sites, with real coefficients c_t:
//
//     phi = pi xi0 |z|^2 / 2 + sum_t c_t ln|F_t|,     a = sgrad phi.
//
// Spin-up zero modes are psi = exp(-phi) G and spin-down ones are
// psi = exp(phi) conj(G), with G holomorphic off the sites. For spin down
// G is built from the spin-up construction of the complementary
// configuration (theta -> 1 - theta, xi0 -> -xi0).

#include <abzero/cafun.hpp>
#include <abzero/decision.hpp>
#include <abzero/fluxcfg.hpp>

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace abzero {

// ---------------------------------------------------------------------------
// Holomorphic building blocks

class HolomorphicTerm {
  public:
    virtual ~HolomorphicTerm() = default;
    // log F(z); only the real part is meaningful across branch cuts
    virtual cplx log_value(cplx z) const = 0;
    // F'(z) / F(z)
    virtual cplx log_derivative(cplx z) const = 0;
    // zeros with |z| <= r and their multiplicities
    virtual std::vector<std::pair<cplx, int>> zeros_within(double r) const = 0;
    virtual std::string describe() const = 0;
};

using TermPtr = std::shared_ptr<const HolomorphicTerm>;

namespace detail {

inline std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(cplx z) { return "(" + fmt(z.real()) + "," + fmt(z.imag()) + ")"; }

// log(sin(w) / w), smooth through w = 0
inline cplx log_sinc(cplx w)
{
    if (std::abs(w) < 1e-3) {
        cplx w2 = w * w;
        return std::log(1.0 - w2 / 6.0 + w2 * w2 / 120.0);
    }
    return log_sin(w) - std::log(w);
}

// d/dw log(sin(w) / w)
inline cplx log_sinc_derivative(cplx w)
{
    if (std::abs(w) < 1e-3) return -w / 3.0 - w * w * w / 45.0;
    return cot(w) - 1.0 / w;
}

// sin(x) / x for real or complex x
inline cplx sinc(cplx x)
{
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

}  // namespace detail

// z - w
class LinearTerm final : public HolomorphicTerm {
  public:
    explicit LinearTerm(cplx w) : w_(w) {}
    cplx log_value(cplx z) const override { return std::log(z - w_); }
    cplx log_derivative(cplx z) const override { return 1.0 / (z - w_); }
    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        if (std::abs(w_) <= r) return {{w_, 1}};
        return {};
    }
    std::string describe() const override { return "z-" + detail::fmt(w_); }

  private:
    cplx w_;
};

// sin(pi (z - kappa) / omega0)
class ChainTerm final : public HolomorphicTerm {
  public:
    ChainTerm(cplx omega0, cplx kappa) : omega0_(omega0), kappa_(kappa)
    {
        if (omega0 == 0.0) throw precondition_error("chain term: zero period");
    }
    cplx log_value(cplx z) const override { return log_chain_function(z, omega0_, kappa_); }
    cplx log_derivative(cplx z) const override { return (pi / omega0_) * cot(pi * (z - kappa_) / omega0_); }
    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        std::vector<std::pair<cplx, int>> out;
        for (const auto& s : chain_sites_within({omega0_, {{kappa_, 1.0}}}, r)) out.emplace_back(s.position, 1);
        return out;
    }
    std::string describe() const override { return "sin(pi(z-" + detail::fmt(kappa_) + ")/" + detail::fmt(omega0_) + ")"; }

  private:
    cplx omega0_, kappa_;
};

// modified sigma function sigma~(z - kappa) of a lattice
class LatticeTerm final : public HolomorphicTerm {
  public:
    LatticeTerm(std::shared_ptr<const WeierstrassLattice> lat, cplx kappa) : lat_(std::move(lat)), kappa_(kappa) {}
    cplx log_value(cplx z) const override { return lat_->log_sigma_tilde(z - kappa_); }
    cplx log_derivative(cplx z) const override { return lat_->log_sigma_tilde_derivative(z - kappa_); }
    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        std::vector<std::pair<cplx, int>> out;
        for (const auto& s : lattice_sites_within({lat_->basis(), {{kappa_, 1.0}}}, r)) out.emplace_back(s.position, 1);
        return out;
    }
    std::string describe() const override { return "sigma~(z-" + detail::fmt(kappa_) + ")"; }

  private:
    std::shared_ptr<const WeierstrassLattice> lat_;
    cplx kappa_;
};

// sin(pi z^N) / z^(N-1): zeros at the origin and at the 2N-th roots of m^(1/N)
class IrregularTerm final : public HolomorphicTerm {
  public:
    explicit IrregularTerm(int order) : n_(order)
    {
        if (order < 1) throw precondition_error("irregular term: order must be positive");
    }
    cplx log_value(cplx z) const override
    {
        cplx zn = std::pow(z, n_);
        if (std::abs(zn) < 1e-3) return std::log(pi * z) + detail::log_sinc(pi * zn);
        return log_sin(pi * zn) - static_cast<double>(n_ - 1) * std::log(z);
    }
    cplx log_derivative(cplx z) const override
    {
        cplx zn = std::pow(z, n_);
        if (std::abs(zn) < 1e-3)
            return 1.0 / z + pi * static_cast<double>(n_) * std::pow(z, n_ - 1) * detail::log_sinc_derivative(pi * zn);
        return pi * static_cast<double>(n_) * std::pow(z, n_ - 1) * cot(pi * zn) - static_cast<double>(n_ - 1) / z;
    }
    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        std::vector<std::pair<cplx, int>> out;
        for (const auto& s : irregular_sites_within({n_, 0.5}, r)) out.emplace_back(s.position, 1);
        return out;
    }
    std::string describe() const override { return "sin(pi z^" + std::to_string(n_) + ")/z^" + std::to_string(n_ - 1); }

  private:
    int n_;
};

// Canonical product prod E(z / w, genus) over a finite point list (the
// truncation of an infinite set at the enumeration radius).
class ProductTerm final : public HolomorphicTerm {
  public:
    ProductTerm(std::vector<cplx> zeros, unsigned genus) : zeros_(std::move(zeros)), genus_(genus)
    {
        for (cplx w : zeros_)
            if (w == 0.0) has_origin_ = true;
    }
    cplx log_value(cplx z) const override
    {
        cplx s = 0.0;
        for (cplx w : zeros_) s += w == 0.0 ? std::log(z) : log_primary_factor(z / w, genus_);
        return s;
    }
    cplx log_derivative(cplx z) const override
    {
        cplx s = 0.0;
        for (cplx w : zeros_) {
            if (w == 0.0) {
                s += 1.0 / z;
                continue;
            }
            cplx u = z / w;
            s += -std::pow(u, static_cast<int>(genus_)) / (w * (1.0 - u));
        }
        return s;
    }
    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        std::vector<std::pair<cplx, int>> out;
        for (cplx w : zeros_)
            if (std::abs(w) <= r) out.emplace_back(w, 1);
        return out;
    }
    std::string describe() const override
    {
        return "canonical product over " + std::to_string(zeros_.size()) + " points, genus " + std::to_string(genus_);
    }

  private:
    std::vector<cplx> zeros_;
    unsigned genus_;
    bool has_origin_ = false;
};

// sin(alpha u) / u with u = (z - kappa) conj(d), |d| = 1
class SincTerm final : public HolomorphicTerm {
  public:
    SincTerm(double alpha, cplx kappa, cplx direction) : alpha_(alpha), kappa_(kappa), d_(direction / std::abs(direction))
    {
        if (!(alpha > 0)) throw precondition_error("sinc term: alpha must be positive");
    }
    cplx log_value(cplx z) const override
    {
        cplx u = (z - kappa_) * std::conj(d_);
        return std::log(alpha_) + detail::log_sinc(alpha_ * u);
    }
    cplx log_derivative(cplx z) const override
    {
        cplx u = (z - kappa_) * std::conj(d_);
        return std::conj(d_) * alpha_ * detail::log_sinc_derivative(alpha_ * u);
    }
    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        std::vector<std::pair<cplx, int>> out;
        double step = pi / alpha_;
        double t0 = (std::conj(d_) * -kappa_).real();
        double half = r + std::abs(kappa_);
        auto lo = static_cast<std::int64_t>(std::floor((t0 - half) / step));
        auto hi = static_cast<std::int64_t>(std::ceil((t0 + half) / step));
        for (std::int64_t k = lo; k <= hi; ++k) {
            if (k == 0) continue;
            cplx z = kappa_ + d_ * (step * static_cast<double>(k));
            if (std::abs(z) <= r) out.emplace_back(z, 1);
        }
        return out;
    }
    std::string describe() const override
    {
        return "sin(a u)/u, a=" + detail::fmt(alpha_) + ", u=(z-" + detail::fmt(kappa_) + ")conj" + detail::fmt(d_);
    }

  private:
    double alpha_;
    cplx kappa_, d_;
};

// sin(alpha z^N) / z^N
class PowerSincTerm final : public HolomorphicTerm {
  public:
    PowerSincTerm(double alpha, int order) : alpha_(alpha), n_(order)
    {
        if (!(alpha > 0) || order < 1) throw precondition_error("power sinc term: need alpha > 0, order >= 1");
    }
    cplx log_value(cplx z) const override { return std::log(alpha_) + detail::log_sinc(alpha_ * std::pow(z, n_)); }
    cplx log_derivative(cplx z) const override
    {
        return alpha_ * static_cast<double>(n_) * std::pow(z, n_ - 1) * detail::log_sinc_derivative(alpha_ * std::pow(z, n_));
    }
    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        std::vector<std::pair<cplx, int>> out;
        double rn = std::pow(r, n_);
        for (std::int64_t k = 1; k * pi / alpha_ <= rn * (1 + 1e-12); ++k) {
            double rad = std::pow(k * pi / alpha_, 1.0 / n_);
            for (int j = 0; j < 2 * n_; ++j) out.emplace_back(std::polar(rad, pi * j / n_), 1);
        }
        return out;
    }
    std::string describe() const override
    {
        return "sin(a z^" + std::to_string(n_) + ")/z^" + std::to_string(n_) + ", a=" + detail::fmt(alpha_);
    }

  private:
    double alpha_;
    int n_;
};

// The entire function
//     (i/pi) (sin t / t) / (s(pi t) s(-pi t)),   s(w) = sin(sqrt w)/sqrt w,
// with t = alpha u and u = (z - c) conj(d). It equals
// sin(t) / (sin sqrt(pi t) sin sqrt(-pi t)) where Im t > 0, decays like
// exp(-sqrt(pi |t|)) along the real t axis and grows at most like exp(|Im t|).
class ExoticTerm final : public HolomorphicTerm {
  public:
    ExoticTerm(double alpha, cplx c, cplx direction) : alpha_(alpha), c_(c), d_(direction / std::abs(direction))
    {
        if (!(alpha > 0)) throw precondition_error("exotic term: alpha must be positive");
    }

    cplx log_value(cplx z) const override { return log_f(alpha_ * (z - c_) * std::conj(d_)); }

    cplx log_derivative(cplx z) const override
    {
        // derivative of a smooth log by a small complex step pair; only needed for diagnostics
        const double h = 1e-5 * std::max(1.0, std::abs(z));
        return (log_value(z + h) - log_value(z - h)) / (2.0 * h);
    }

    std::vector<std::pair<cplx, int>> zeros_within(double r) const override
    {
        // zeros of sin t that are not cancelled: t = m pi with m != 0, +-k^2
        std::vector<std::pair<cplx, int>> out;
        double step = pi / alpha_;
        double t0 = (std::conj(d_) * -c_).real();
        double half = r + std::abs(c_);
        auto lo = static_cast<std::int64_t>(std::floor((t0 - half) / step));
        auto hi = static_cast<std::int64_t>(std::ceil((t0 + half) / step));
        for (std::int64_t m = lo; m <= hi; ++m) {
            if (m == 0) continue;
            auto root = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(std::llabs(m)))));
            if (root * root == std::llabs(m)) continue;
            cplx z = c_ + d_ * (step * static_cast<double>(m));
            if (std::abs(z) <= r) out.emplace_back(z, 1);
        }
        return out;
    }

    std::string describe() const override
    {
        return "sin t/(sin sqrt(pi t) sin sqrt(-pi t)), t=a(z-" + detail::fmt(c_) + ")conj" + detail::fmt(d_) +
               ", a=" + detail::fmt(alpha_);
    }

    // log s(w), s(w) = sin(sqrt w)/sqrt w (even in sqrt w, so branch free)
    static cplx log_s(cplx w)
    {
        if (std::abs(w) < 1.0) {
            cplx sum = 1.0, term = 1.0;
            for (int n = 1; n < 30; ++n) {
                term *= -w / (static_cast<double>(2 * n) * (2 * n + 1));
                sum += term;
                if (std::abs(term) < 1e-18) break;
            }
            return std::log(sum);
        }
        cplx v = std::sqrt(w);
        return log_sin(v) - std::log(v);
    }

    // log of f as a function of t
    static cplx log_f(cplx t)
    {
        const cplx pref = std::log(I / pi);
        // near t = +-pi k^2 the zero of sin t cancels a zero of s(+-pi t)
        for (int sgn : {1, -1}) {
            cplx v = std::sqrt(sgn * pi * t);
            double k = std::round(v.real() / pi);
            if (k >= 1 && std::abs(v - k * pi) < 0.5) {
                // sin(v^2/pi) / sin(v) with v = k pi + e
                cplx e = v - k * pi;
                cplx a = e * (2.0 * k + e / pi);
                cplx ratio = (2.0 * k + e / pi) * detail::sinc(a) / detail::sinc(e);
                // sin t / s(sgn pi t) = sgn * v * ratio
                cplx lead = std::log(static_cast<double>(sgn) * v * ratio);
                return pref - std::log(t) + lead - log_s(-sgn * pi * t);
            }
        }
        return pref + detail::log_sinc(t) - log_s(pi * t) - log_s(-pi * t);
    }

  private:
    double alpha_;
    cplx c_, d_;
};

// ---------------------------------------------------------------------------
// Potentials

struct PotentialTerm {
    TermPtr term;
    double coeff;  // flux carried by every zero of the term
    int unit;      // +1 for present solenoids, -1 for removed ones
};

class ScalarPotential {
  public:
    ScalarPotential(double xi0, std::vector<PotentialTerm> terms) : xi0_(xi0), terms_(std::move(terms)) {}

    double uniform_flux_density() const { return xi0_; }
    const std::vector<PotentialTerm>& terms() const { return terms_; }

    // -inf or +inf at a site
    double value(cplx z) const
    {
        double v = 0.5 * pi * xi0_ * std::norm(z);
        for (const auto& t : terms_) v += t.coeff * t.term->log_value(z).real();
        return v;
    }

    // (phi_x, phi_y)
    std::array<double, 2> gradient(cplx z) const
    {
        double gx = pi * xi0_ * z.real(), gy = pi * xi0_ * z.imag();
        for (const auto& t : terms_) {
            cplx l = t.term->log_derivative(z);
            if (!is_finite(l)) throw domain_error("scalar potential: gradient at a flux site");
            gx += t.coeff * l.real();
            gy -= t.coeff * l.imag();
        }
        return {gx, gy};
    }

    // Laplacian off the sites
    double source_density() const { return 2.0 * pi * xi0_; }

    // Sites with |z| <= r and the total flux at each.
    std::vector<FluxSite> sites_within(double r) const;

  private:
    double xi0_;
    std::vector<PotentialTerm> terms_;
};

// a = sgrad phi = (-phi_y, phi_x)
class VectorPotential {
  public:
    explicit VectorPotential(std::shared_ptr<const ScalarPotential> phi) : phi_(std::move(phi)) {}
    std::array<double, 2> operator()(cplx z) const
    {
        auto g = phi_->gradient(z);
        return {-g[1], g[0]};
    }
    const ScalarPotential& potential() const { return *phi_; }

  private:
    std::shared_ptr<const ScalarPotential> phi_;
};

namespace detail {

// Points clustered within a relative tolerance, with summed weights.
inline std::vector<std::pair<cplx, double>> accumulate_points(const std::vector<std::pair<cplx, double>>& in)
{
    PointIndex index(1e-3);
    std::vector<std::pair<cplx, double>> out;
    for (const auto& [p, w] : in) {
        long hit = index.find(p, coincidence_tol(p));
        if (hit >= 0) {
            out[static_cast<std::size_t>(hit)].second += w;
        } else {
            index.insert(p);
            out.emplace_back(p, w);
        }
    }
    return out;
}

}  // namespace detail

inline std::vector<FluxSite> ScalarPotential::sites_within(double r) const
{
    std::vector<std::pair<cplx, double>> raw;
    for (const auto& t : terms_)
        for (const auto& [p, m] : t.term->zeros_within(r)) raw.emplace_back(p, t.coeff * m);
    std::vector<FluxSite> out;
    for (const auto& [p, w] : detail::accumulate_points(raw))
        if (std::abs(w) > 1e-14) out.push_back({p, w});
    std::sort(out.begin(), out.end(), [](const FluxSite& a, const FluxSite& b) { return modulus_arg_less(a.position, b.position); });
    return out;
}

// ---------------------------------------------------------------------------
// Wave functions

struct DecayHint {
    enum class Kind { PowerLaw, Gaussian, Fast } kind = Kind::Fast;
    // expected ratio of |psi|^2 mass in [2R, 4R] to that in [R, 2R]; 0 when only observed ratios can be used
    double ratio = 0.0;
    double core_radius = 2.0;  // asymptotic regime starts beyond this radius
};

inline const char* to_string(DecayHint::Kind k)
{
    switch (k) {
        case DecayHint::Kind::PowerLaw: return "power-law";
        case DecayHint::Kind::Gaussian: return "gaussian";
        default: return "fast";
    }
}

struct Factor {
    TermPtr term;
    int power;
};

// Local behaviour |psi| ~ |z - point|^exponent.
struct LocalExponent {
    cplx point;
    double exponent;
};

class WaveFunction {
  public:
    WaveFunction(Spin spin, std::shared_ptr<const ScalarPotential> phi, std::vector<Factor> factors, DecayHint hint,
                 std::string label)
        : spin_(spin), phi_(std::move(phi)), factors_(std::move(factors)), hint_(hint), label_(std::move(label))
    {
    }

    Spin spin() const { return spin_; }
    const ScalarPotential& potential() const { return *phi_; }
    std::shared_ptr<const ScalarPotential> potential_ptr() const { return phi_; }
    const std::vector<Factor>& factors() const { return factors_; }
    const DecayHint& decay_hint() const { return hint_; }
    const std::string& label() const { return label_; }

    // ln|psi|
    double log_abs(cplx z) const
    {
        double v = (spin_ == Spin::Plus ? -1.0 : 1.0) * phi_->value(z);
        for (const auto& f : factors_) v += f.power * f.term->log_value(z).real();
        return v;
    }

    double abs(cplx z) const { return std::exp(log_abs(z)); }

    // psi itself; continuous off the sites because every factor power is an integer
    cplx value(cplx z) const
    {
        cplx lg = 0.0;
        for (const auto& f : factors_) lg += static_cast<double>(f.power) * f.term->log_value(z);
        double ph = phi_->value(z);
        if (spin_ == Spin::Plus) return std::exp(-ph + lg);
        return std::exp(ph + std::conj(lg));
    }

    // Points with |z| <= r where |psi| behaves like a non-integer power of the distance.
    std::vector<LocalExponent> singular_within(double r) const
    {
        std::vector<std::pair<cplx, double>> raw;
        double s = spin_ == Spin::Plus ? -1.0 : 1.0;
        for (const auto& t : phi_->terms())
            for (const auto& [p, m] : t.term->zeros_within(r)) raw.emplace_back(p, s * t.coeff * m);
        for (const auto& f : factors_)
            for (const auto& [p, m] : f.term->zeros_within(r)) raw.emplace_back(p, static_cast<double>(f.power * m));
        std::vector<LocalExponent> out;
        for (const auto& [p, e] : detail::accumulate_points(raw))
            if (std::abs(e - std::round(e)) > 1e-12) out.push_back({p, e});
        return out;
    }

    // The exponent at a given point (0 when regular there).
    double exponent_at(cplx p) const
    {
        for (const auto& le : singular_within(std::abs(p) + 1e-9))
            if (std::abs(le.point - p) <= detail::coincidence_tol(p)) return le.exponent;
        return 0.0;
    }

  private:
    Spin spin_;
    std::shared_ptr<const ScalarPotential> phi_;
    std::vector<Factor> factors_;
    DecayHint hint_;
    std::string label_;
};

struct AlphaRange {
    double lo;
    double hi;
};

// Midpoint of an open interval.
inline double alpha_default(const AlphaRange& r)
{
    if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw precondition_error("alpha_default: empty interval");
    return 0.5 * (r.lo + r.hi);
}

struct ZeroModeFamily {
    Spin spin = Spin::Plus;
    Recipe recipe = Recipe::None;
    std::string theorem;
    std::optional<AlphaRange> alpha_range;  // for families indexed by alpha
    std::vector<double> alphas;             // alpha of each member (empty for polynomial families)
    std::vector<WaveFunction> members;
    std::string notice;
};

struct BuildOptions {
    std::optional<double> alpha;  // largest alpha of the grid; must lie in the admissible range
    double r_max = 100.0;         // truncation radius for infinite perturbation sets
};

// ---------------------------------------------------------------------------
// Potentials from a configuration

namespace detail {

// theta of the regular site at p, if any
inline std::optional<double> regular_theta_at(const FluxConfiguration& c, cplx p)
{
    for (const auto& s : regular_sites_within(c, std::abs(p) + 1.0))
        if (std::abs(s.position - p) <= coincidence_tol(p)) return s.theta;
    return std::nullopt;
}

inline unsigned genus_of(const std::vector<cplx>& pts, double r_max)
{
    SetStats st(pts, r_max);
    auto g = st.genus();
    return g ? static_cast<unsigned>(std::max(0, *g)) : 0u;
}

}  // namespace detail

inline std::vector<PotentialTerm> potential_terms(const FluxConfiguration& c, double r_max = 100.0)
{
    std::vector<PotentialTerm> out;
    const Perturbation& pert = c.perturbation;
    if (!c.has_periodic()) {
        // finite configurations: the perturbation only reshapes the site list
        for (const auto& s : enumerate_support(c, std::numeric_limits<double>::max()))
            out.push_back({std::make_shared<LinearTerm>(s.position), s.theta, 1});
        return out;
    }
    for (const auto& s : c.finite) out.push_back({std::make_shared<LinearTerm>(s.position), s.theta, 1});
    for (const auto& ch : c.chains)
        for (const auto& k : ch.offsets) out.push_back({std::make_shared<ChainTerm>(ch.omega0, k.position), k.theta, 1});
    for (const auto& l : c.lattices) {
        auto lat = std::make_shared<const WeierstrassLattice>(l.basis);
        for (const auto& k : l.offsets) out.push_back({std::make_shared<LatticeTerm>(lat, k.position), k.theta, 1});
    }
    if (c.irregular) out.push_back({std::make_shared<IrregularTerm>(c.irregular->order), c.irregular->theta, 1});
    // removed solenoids, grouped by their flux
    {
        auto pts = points_within(pert.removed, pert.removed.finite() ? std::numeric_limits<double>::max() : r_max);
        std::vector<std::pair<double, std::vector<cplx>>> groups;
        for (cplx p : pts) {
            auto th = detail::regular_theta_at(c, p);
            if (!th) throw config_error("removed point is not a flux site");
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return std::abs(g.first - *th) < 1e-14; });
            if (it == groups.end())
                groups.push_back({*th, {p}});
            else
                it->second.push_back(p);
        }
        for (auto& [th, g] : groups) {
            if (pert.removed.finite())
                for (cplx p : g) out.push_back({std::make_shared<LinearTerm>(p), -th, -1});
            else
                out.push_back({std::make_shared<ProductTerm>(g, detail::genus_of(pts, r_max)), -th, -1});
        }
    }
    for (const auto& a : pert.added) {
        if (a.points.finite()) {
            for (cplx p : a.points.points) out.push_back({std::make_shared<LinearTerm>(p), a.theta, 1});
        } else {
            auto pts = points_within(a.points, r_max);
            out.push_back({std::make_shared<ProductTerm>(pts, detail::genus_of(pts, r_max)), a.theta, 1});
        }
    }
    return out;
}

inline std::shared_ptr<const ScalarPotential> build_scalar_potential(const FluxConfiguration& c, double r_max = 100.0)
{
    return std::make_shared<const ScalarPotential>(c.uniform_flux_density, potential_terms(c, r_max));
}

inline VectorPotential build_vector_potential(std::shared_ptr<const ScalarPotential> phi)
{
    return VectorPotential(std::move(phi));
}

// theta -> 1 - theta everywhere and xi0 -> -xi0, geometry unchanged.
inline FluxConfiguration flux_complement(const FluxConfiguration& in)
{
    FluxConfiguration c = in;
    c.uniform_flux_density = -c.uniform_flux_density;
    for (auto& s : c.finite) s.theta = 1.0 - s.theta;
    for (auto& ch : c.chains)
        for (auto& k : ch.offsets) k.theta = 1.0 - k.theta;
    for (auto& l : c.lattices)
        for (auto& k : l.offsets) k.theta = 1.0 - k.theta;
    if (c.irregular) c.irregular->theta = 1.0 - c.irregular->theta;
    for (auto& a : c.perturbation.added) a.theta = 1.0 - a.theta;
    return c;
}

// ---------------------------------------------------------------------------
// Recipes: holomorphic factors of spin-up zero modes

namespace detail {

struct RecipeMember {
    std::vector<Factor> factors;
    std::optional<double> alpha;
    std::string label;
};

struct RecipePlan {
    bool polynomial = true;              // members indexed by degree
    std::optional<int> max_members;      // finite multiplicity
    std::optional<AlphaRange> range;     // members indexed by alpha
    std::vector<Factor> common;          // factors shared by all members
    std::function<std::vector<Factor>(double)> alpha_factors;
    DecayHint hint;
};

inline double support_extent(const FluxConfiguration& c)
{
    double r = 0;
    for (const auto& s : c.finite) r = std::max(r, std::abs(s.position));
    for (cplx p : c.perturbation.removed.points) r = std::max(r, std::abs(p));
    for (const auto& a : c.perturbation.added)
        for (cplx p : a.points.points) r = std::max(r, std::abs(p));
    for (const auto& ch : c.chains)
        for (const auto& k : ch.offsets) r = std::max(r, std::abs(k.position));
    for (const auto& l : c.lattices)
        for (const auto& k : l.offsets) r = std::max(r, std::abs(k.position));
    return r;
}

// canonical factors of the added sets (finite sites next to periodic parts included)
inline std::vector<Factor> added_factors(const FluxConfiguration& c, double r_max)
{
    std::vector<Factor> out;
    for (const auto& a : effective_perturbation(c).added) {
        if (a.points.finite()) {
            for (cplx p : a.points.points) out.push_back({std::make_shared<LinearTerm>(p), 1});
        } else {
            auto pts = points_within(a.points, r_max);
            out.push_back({std::make_shared<ProductTerm>(pts, genus_of(pts, r_max)), 1});
        }
    }
    return out;
}

struct OneAtomChain {
    cplx kappa;
    cplx omega;
    double theta;
};

inline RecipePlan plan_recipe(const FluxConfiguration& c, Recipe recipe, bool perturbation_in_factor, double r_max)
{
    RecipePlan plan;
    const double core = 2.0 * support_extent(c) + 2.0;
    plan.hint.core_radius = core;
    auto with_added = [&](std::vector<Factor> f) {
        if (perturbation_in_factor) {
            auto a = added_factors(c, r_max);
            f.insert(f.end(), a.begin(), a.end());
        }
        return f;
    };
    switch (recipe) {
        case Recipe::Finite: {
            auto sites = enumerate_support(c, std::numeric_limits<double>::max());
            double st = sum_theta(sites);
            int count = 0;
            while (static_cast<double>(count) < st - 1.0 - flux_eps) ++count;
            plan.max_members = count;
            plan.hint.kind = DecayHint::Kind::PowerLaw;
            plan.hint.ratio = -1.0;  // degree dependent, filled per member
            plan.common = {};
            break;
        }
        case Recipe::Lattices:
        case Recipe::LatticesSmall:
        case Recipe::UniformLattice:
            plan.common = with_added({});
            plan.hint.kind = DecayHint::Kind::Gaussian;
            break;
        case Recipe::LatticesLarge: {
            // the lattice with the smallest cell carries the decay; the others enter to the power one
            std::size_t best = 0;
            for (std::size_t j = 1; j < c.lattices.size(); ++j)
                if (cell_area(c.lattices[j].basis) < cell_area(c.lattices[best].basis)) best = j;
            for (std::size_t j = 0; j < c.lattices.size(); ++j) {
                if (j == best) continue;
                auto lat = std::make_shared<const WeierstrassLattice>(c.lattices[j].basis);
                for (const auto& k : c.lattices[j].offsets) plan.common.push_back({std::make_shared<LatticeTerm>(lat, k.position), 1});
            }
            plan.common = with_added(plan.common);
            plan.hint.kind = DecayHint::Kind::Gaussian;
            break;
        }
        case Recipe::UniformGeneral: {
            for (const auto& t : potential_terms(c, r_max))
                if (t.unit > 0) plan.common.push_back({t.term, 1});
            plan.hint.kind = DecayHint::Kind::Gaussian;
            break;
        }
        case Recipe::Chains: {
            auto groups = line_groups(c.chains);
            if (groups.empty()) throw precondition_error("chain recipe without chains");
            auto merged = merge_collinear_chains(groups.front()).chain;
            if (!merged) throw precondition_error("chain recipe: first line is not a chain");
            double st = sum_theta(merged->offsets);
            double w = std::abs(merged->omega0);
            cplx kappa = merged->offsets.front().position, d = merged->omega0 / w;
            plan.polynomial = false;
            plan.range = AlphaRange{0.0, pi / w * st};
            plan.common = with_added({});
            plan.alpha_factors = [kappa, d](double a) { return std::vector<Factor>{{std::make_shared<SincTerm>(a, kappa, d), 1}}; };
            plan.hint.kind = DecayHint::Kind::PowerLaw;
            plan.hint.ratio = 0.5;
            break;
        }
        case Recipe::CollinearSmall:
        case Recipe::CollinearLarge: {
            auto groups = line_groups(c.chains);
            if (groups.size() != 1) throw precondition_error("collinear recipe needs chains on one line");
            std::vector<OneAtomChain> one;
            for (const auto& ch : groups.front())
                for (const auto& k : ch.offsets) one.push_back({k.position, ch.omega0, k.theta});
            cplx d = one.front().omega / std::abs(one.front().omega);
            plan.polynomial = false;
            plan.hint.kind = DecayHint::Kind::PowerLaw;
            plan.hint.ratio = 0.5;
            if (recipe == Recipe::CollinearSmall) {
                double hi = std::numeric_limits<double>::infinity();
                for (const auto& o : one) hi = std::min(hi, pi * o.theta / std::abs(o.omega));
                plan.range = AlphaRange{0.0, hi};
                plan.alpha_factors = [one, d](double a) {
                    std::vector<Factor> f;
                    for (const auto& o : one) f.push_back({std::make_shared<SincTerm>(a, o.kappa, d), 1});
                    return f;
                };
            } else {
                std::size_t best = 0;
                for (std::size_t j = 1; j < one.size(); ++j)
                    if (std::abs(one[j].omega) < std::abs(one[best].omega)) best = j;
                double hi = pi / std::abs(one[best].omega);
                for (const auto& o : one) hi -= pi * (1.0 - o.theta) / std::abs(o.omega);
                plan.range = AlphaRange{0.0, hi};
                for (std::size_t j = 0; j < one.size(); ++j)
                    if (j != best) plan.common.push_back({std::make_shared<ChainTerm>(one[j].omega, one[j].kappa), 1});
                cplx k1 = one[best].kappa;
                plan.alpha_factors = [k1, d](double a) { return std::vector<Factor>{{std::make_shared<SincTerm>(a, k1, d), 1}}; };
            }
            plan.common = with_added(plan.common);
            break;
        }
        case Recipe::ParallelChains: {
            if (c.chains.empty()) throw precondition_error("parallel-chain recipe without chains");
            cplx d = c.chains.front().omega0 / std::abs(c.chains.front().omega0);
            double hi = 0, lowest = std::numeric_limits<double>::infinity();
            for (const auto& ch : c.chains)
                for (const auto& k : ch.offsets) {
                    hi += pi * k.theta / std::abs(ch.omega0);
                    lowest = std::min(lowest, line_offset(k.position, d));
                }
            // shift so that every chain line satisfies Im u >= 1
            cplx shift = I * d * (lowest - 1.0);
            plan.polynomial = false;
            plan.range = AlphaRange{0.0, hi};
            plan.common = with_added({});
            plan.alpha_factors = [shift, d](double a) { return std::vector<Factor>{{std::make_shared<ExoticTerm>(a, shift, d), 1}}; };
            plan.hint.kind = DecayHint::Kind::Fast;
            break;
        }
        case Recipe::Irregular: {
            if (!c.irregular) throw precondition_error("irregular recipe without the irregular family");
            int n = c.irregular->order;
            double th = c.irregular->theta;
            plan.polynomial = false;
            plan.range = AlphaRange{0.0, pi * th};
            plan.alpha_factors = [n](double a) { return std::vector<Factor>{{std::make_shared<PowerSincTerm>(a, n), 1}}; };
            double beta = 4.0 - 2.0 * th - 2.0 * (1.0 - th) / n;
            plan.hint.kind = DecayHint::Kind::PowerLaw;
            plan.hint.ratio = std::pow(2.0, n * (1.0 - beta));
            plan.hint.core_radius = 2.0;
            break;
        }
        default: throw precondition_error("no construction for this verdict");
    }
    return plan;
}

// |psi|^2 ~ r^-p with p = 2 sum theta - 2k for a finite set and f = z^k
inline DecayHint finite_hint(double sum_theta_eff, int degree, double core)
{
    DecayHint h;
    h.kind = DecayHint::Kind::PowerLaw;
    double p = 2.0 * sum_theta_eff - 2.0 * degree;
    h.ratio = std::pow(2.0, 2.0 - p);
    h.core_radius = core;
    return h;
}

// Wave function from the spin-up factors `f_up` of the effective configuration.
inline WaveFunction assemble(Spin spin, const std::shared_ptr<const ScalarPotential>& phi, std::vector<Factor> f_up,
                             DecayHint hint, std::string label)
{
    if (spin == Spin::Minus)
        for (const auto& t : phi->terms()) f_up.push_back({t.term, -t.unit});
    return WaveFunction(spin, phi, std::move(f_up), hint, std::move(label));
}

}  // namespace detail

// Zero modes for an existence verdict: `count` linearly independent members.
inline ZeroModeFamily build_zero_modes(const FluxConfiguration& config, const ZeroModeVerdict& verdict, int count,
                                       const BuildOptions& opts = {})
{
    if (!exists(verdict.status)) throw precondition_error("build_zero_modes: the verdict does not assert existence");
    if (count < 1) throw precondition_error("build_zero_modes: count must be positive");
    FluxConfiguration c = normalize_fluxes(config).config;
    auto phi = build_scalar_potential(c, opts.r_max);
    FluxConfiguration eff = verdict.spin == Spin::Plus ? c : flux_complement(c);
    auto plan = detail::plan_recipe(eff, verdict.recipe, verdict.perturbation_in_factor, opts.r_max);

    ZeroModeFamily fam;
    fam.spin = verdict.spin;
    fam.recipe = verdict.recipe;
    fam.theorem = verdict.theorem;
    int n = count;
    if (plan.max_members && *plan.max_members < n) {
        n = *plan.max_members;
        fam.notice = "family truncated to the multiplicity " + std::to_string(n);
    }
    if (plan.polynomial) {
        double st_eff = 0;
        if (verdict.recipe == Recipe::Finite)
            st_eff = detail::sum_theta(enumerate_support(eff, std::numeric_limits<double>::max()));
        for (int k = 0; k < n; ++k) {
            auto f = plan.common;
            if (k > 0) f.push_back({std::make_shared<LinearTerm>(0.0), k});
            DecayHint h = plan.hint;
            if (verdict.recipe == Recipe::Finite) h = detail::finite_hint(st_eff, k, plan.hint.core_radius);
            fam.members.push_back(detail::assemble(verdict.spin, phi, std::move(f), h,
                                                   std::string(to_string(verdict.recipe)) + " degree " + std::to_string(k)));
        }
        return fam;
    }
    fam.alpha_range = plan.range;
    double top = plan.range->hi;
    if (opts.alpha) {
        if (!(*opts.alpha > plan.range->lo && *opts.alpha < plan.range->hi))
            throw domain_error("alpha outside the admissible interval (" + detail::fmt(plan.range->lo) + ", " +
                               detail::fmt(plan.range->hi) + ")");
    }
    for (int i = 1; i <= n; ++i) {
        // grid top * i / (count + 1); with an explicit alpha the grid ends at it
        double a = opts.alpha ? *opts.alpha * i / n : top * i / (n + 1);
        auto f = plan.common;
        auto extra = plan.alpha_factors(a);
        f.insert(f.end(), extra.begin(), extra.end());
        fam.alphas.push_back(a);
        fam.members.push_back(detail::assemble(verdict.spin, phi, std::move(f), plan.hint,
                                               std::string(to_string(verdict.recipe)) + " alpha " + detail::fmt(a)));
    }
    return fam;
}

// The constant-factor candidate exp(-+phi) * (correction) used to refute
// existence numerically: for spin up psi = exp(-phi), for spin down
// psi = exp(phi) prod |F_t|^-1.
inline WaveFunction build_candidate(const FluxConfiguration& config, Spin spin, double r_max = 100.0)
{
    FluxConfiguration c = normalize_fluxes(config).config;
    auto phi = build_scalar_potential(c, r_max);
    FluxConfiguration eff = spin == Spin::Plus ? c : flux_complement(c);
    DecayHint h;
    h.core_radius = 2.0 * detail::support_extent(c) + 2.0;
    if (!c.has_periodic() && std::abs(c.uniform_flux_density) < 1e-14)
        h = detail::finite_hint(detail::sum_theta(enumerate_support(eff, std::numeric_limits<double>::max())), 0, h.core_radius);
    else
        h.kind = DecayHint::Kind::Gaussian;
    return detail::assemble(spin, phi, {}, h, "candidate f = 1");
}

}  // namespace abzero

#endif
