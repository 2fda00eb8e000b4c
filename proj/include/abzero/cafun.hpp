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
#ifndef ABZERO_CAFUN_HPP_
#define ABZERO_CAFUN_HPP_

// Entire-function kernel: primary factors, Weierstrass sigma/zeta with
// the normalised sigma-tilde, canonical products and chain functions.

#include <abzero/common.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace abzero {

// ---------------------------------------------------------------------------
// Primary factors

// log E(u, p) with E(u, p) = (1 - u) exp(u + u^2/2 + ... + u^p/p).
inline cplx log_primary_factor(cplx u, unsigned p)
{
    double au = std::abs(u);
    if (au < 0.5) {
        // -sum_{k>p} u^k / k, free of the cancellation in log(1-u) + poly
        cplx sum = 0.0, uk = std::pow(u, static_cast<int>(p) + 1);
        for (unsigned k = p + 1; k < p + 200; ++k) {
            cplx t = uk / static_cast<double>(k);
            sum -= t;
            if (std::abs(t) <= 1e-18 * std::max(1e-300, std::abs(sum))) break;
            uk *= u;
        }
        return sum;
    }
    cplx sum = std::log(1.0 - u), uk = u;
    for (unsigned k = 1; k <= p; ++k) {
        sum += uk / static_cast<double>(k);
        uk *= u;
    }
    return sum;
}

inline cplx primary_factor(cplx u, unsigned p)
{
    if (!is_finite(u)) throw domain_error("primary_factor: non-finite argument");
    if (u == 1.0) return 0.0;
    cplx poly = 0.0, uk = u;
    for (unsigned k = 1; k <= p; ++k) {
        poly += uk / static_cast<double>(k);
        uk *= u;
    }
    if (std::abs(u) < 0.5) return std::exp(log_primary_factor(u, p));
    return (1.0 - u) * std::exp(poly);
}

// ---------------------------------------------------------------------------
// Lattices

struct LatticeBasis {
    cplx omega1;
    cplx omega2;
};

// Oriented cell area Im(conj(omega1) omega2); positive for admissible bases.
inline double cell_area(const LatticeBasis& b) { return (std::conj(b.omega1) * b.omega2).imag(); }

inline void check_basis(const LatticeBasis& b)
{
    if (!is_finite(b.omega1) || !is_finite(b.omega2))
        throw domain_error("lattice basis has non-finite periods");
    double s = cell_area(b);
    double scale = std::abs(b.omega1) * std::abs(b.omega2);
    if (!(s > 1e-12 * scale) || scale == 0.0)
        throw domain_error("lattice basis is degenerate or negatively oriented");
}

struct LatticeConstants {
    cplx eta1;    // 2 zeta(omega1 / 2)
    cplx eta2;    // 2 zeta(omega2 / 2)
    cplx nu;      // Gaussian correction making |sigma-tilde|^2 exp(-2 mu |z|^2) periodic
    double mu;    // pi / (2 area)
    double type;  // |nu| + mu, growth type of sigma
    double area;
};

// Weierstrass functions of a fixed lattice.
//
// The basis is Gauss-reduced so that tau = w2 / w1 has Im tau >= sqrt(3)/2,
// and sigma, zeta are evaluated through the theta_1 q-series after reducing
// the argument into the central cell with the quasi-periodicity law
//   sigma(z + w) = eps(w) sigma(z) exp(eta(w) (z + w/2)).
class WeierstrassLattice {
  public:
    explicit WeierstrassLattice(LatticeBasis basis, double tol = 1e-16) : orig_(basis), tol_(tol)
    {
        check_basis(basis);
        reduce_basis();
        tau_ = red_.omega2 / red_.omega1;
        compute_constants();
    }

    const LatticeBasis& basis() const { return orig_; }
    const LatticeBasis& reduced_basis() const { return red_; }
    const LatticeConstants& constants() const { return consts_; }

    // eta(m omega1 + n omega2) in the caller's basis.
    cplx eta(std::int64_t m, std::int64_t n) const
    {
        return static_cast<double>(m) * consts_.eta1 + static_cast<double>(n) * consts_.eta2;
    }

    cplx sigma(cplx z) const
    {
        check_argument(z);
        Reduced r = reduce(z);
        if (r.z0 == 0.0) return 0.0;
        cplx v = pi * r.z0 / red_.omega1;
        cplx th = theta1(v);
        cplx val = (red_.omega1 / pi) * std::exp(eta1r_ * r.z0 * r.z0 / (2.0 * red_.omega1)) * th / theta1_prime0_;
        if (r.odd) val = -val;
        return val * std::exp(r.eta * (r.z0 + r.w / 2.0));
    }

    // Complex logarithm of sigma (real part is ln|sigma|), finite for large |z|.
    cplx log_sigma(cplx z) const
    {
        check_argument(z);
        Reduced r = reduce(z);
        cplx v = pi * r.z0 / red_.omega1;
        cplx l = std::log(red_.omega1 / pi) + eta1r_ * r.z0 * r.z0 / (2.0 * red_.omega1) +
                 std::log(theta1(v)) - std::log(theta1_prime0_);
        if (r.odd) l += I * pi;
        return l + r.eta * (r.z0 + r.w / 2.0);
    }

    cplx zeta(cplx z) const
    {
        check_argument(z);
        Reduced r = reduce(z);
        if (r.z0 == 0.0) throw domain_error("zeta: pole at a lattice point");
        return zeta_cell(r.z0) + r.eta;
    }

    cplx sigma_tilde(cplx z) const { return std::exp(-consts_.nu * z * z) * sigma(z); }
    cplx log_sigma_tilde(cplx z) const { return log_sigma(z) - consts_.nu * z * z; }

    // d/dz log sigma-tilde.
    cplx log_sigma_tilde_derivative(cplx z) const { return zeta(z) - 2.0 * consts_.nu * z; }

    // Lattice points with |w - centre| <= r, sorted by modulus then argument about the origin.
    std::vector<cplx> points_within(double r, cplx offset = 0.0) const
    {
        std::vector<cplx> out;
        const cplx w1 = orig_.omega1, w2 = orig_.omega2;
        double s = consts_.area;
        double rr = r + std::abs(offset);
        auto m_max = static_cast<std::int64_t>(std::ceil(rr * std::abs(w2) / s)) + 1;
        auto n_max = static_cast<std::int64_t>(std::ceil(rr * std::abs(w1) / s)) + 1;
        for (std::int64_t m = -m_max; m <= m_max; ++m)
            for (std::int64_t n = -n_max; n <= n_max; ++n) {
                cplx p = offset + static_cast<double>(m) * w1 + static_cast<double>(n) * w2;
                if (std::abs(p) <= r) out.push_back(p);
            }
        std::sort(out.begin(), out.end(), modulus_arg_less);
        return out;
    }

  private:
    struct Reduced {
        cplx z0;
        cplx w;
        cplx eta;
        bool odd;
    };

    void check_argument(cplx z) const
    {
        if (!is_finite(z)) throw domain_error("non-finite argument");
    }

    // Lagrange-Gauss reduction, tracking w_red = M * omega (integer M).
    void reduce_basis()
    {
        cplx u = orig_.omega1, v = orig_.omega2;
        std::array<std::int64_t, 4> mu{1, 0, 0, 1};  // u = mu0 w1 + mu1 w2, v = mu2 w1 + mu3 w2
        for (int it = 0; it < 200; ++it) {
            if (std::abs(v) < std::abs(u)) {
                std::swap(u, v);
                std::swap(mu[0], mu[2]);
                std::swap(mu[1], mu[3]);
            }
            double t = (v / u).real();
            auto k = static_cast<std::int64_t>(std::llround(t));
            if (k == 0) break;
            v -= static_cast<double>(k) * u;
            mu[2] -= k * mu[0];
            mu[3] -= k * mu[1];
        }
        if ((v / u).imag() < 0) {
            v = -v;
            mu[2] = -mu[2];
            mu[3] = -mu[3];
        }
        red_ = {u, v};
        // invert M (det +-1) to express the original periods in the reduced basis
        std::int64_t det = mu[0] * mu[3] - mu[1] * mu[2];
        inv_ = {mu[3] * det, -mu[1] * det, -mu[2] * det, mu[0] * det};
    }

    // theta_1(v | tau) and derivatives by direct q-series.
    cplx theta1(cplx v) const
    {
        cplx sum = 0.0;
        for (int n = 0; n < 60; ++n) {
            double h = n + 0.5;
            cplx t = std::exp(I * pi * tau_ * h * h) * std::sin((2.0 * n + 1.0) * v);
            sum += (n % 2 ? -t : t);
            if (n > 0 && std::abs(t) <= tol_ * std::abs(sum)) break;
        }
        return 2.0 * sum;
    }

    cplx theta1_prime(cplx v) const
    {
        cplx sum = 0.0;
        for (int n = 0; n < 60; ++n) {
            double h = n + 0.5;
            cplx t = (2.0 * n + 1.0) * std::exp(I * pi * tau_ * h * h) * std::cos((2.0 * n + 1.0) * v);
            sum += (n % 2 ? -t : t);
            if (n > 0 && std::abs(t) <= tol_ * std::abs(sum)) break;
        }
        return 2.0 * sum;
    }

    cplx zeta_cell(cplx z0) const
    {
        cplx v = pi * z0 / red_.omega1;
        return eta1r_ * z0 / red_.omega1 + (pi / red_.omega1) * theta1_prime(v) / theta1(v);
    }

    void compute_constants()
    {
        cplx d1 = 0.0, d3 = 0.0;
        for (int n = 0; n < 60; ++n) {
            double h = n + 0.5, k = 2.0 * n + 1.0;
            cplx qn = std::exp(I * pi * tau_ * h * h);
            cplx t1 = k * qn, t3 = k * k * k * qn;
            d1 += (n % 2 ? -t1 : t1);
            d3 += (n % 2 ? -t3 : t3);
            if (n > 0 && std::abs(t1) <= tol_ * std::abs(d1) && std::abs(t3) <= tol_ * std::abs(d3)) break;
        }
        theta1_prime0_ = 2.0 * d1;
        cplx theta1_third0 = -2.0 * d3;
        eta1r_ = -pi * pi * theta1_third0 / (3.0 * red_.omega1 * theta1_prime0_);
        // the second quasi-period comes from zeta itself, so the Legendre relation is a genuine check
        eta2r_ = 2.0 * zeta_cell(red_.omega2 / 2.0);

        LatticeConstants c{};
        c.eta1 = static_cast<double>(inv_[0]) * eta1r_ + static_cast<double>(inv_[1]) * eta2r_;
        c.eta2 = static_cast<double>(inv_[2]) * eta1r_ + static_cast<double>(inv_[3]) * eta2r_;
        c.area = cell_area(red_);
        c.nu = I / (4.0 * c.area) * (eta1r_ * std::conj(red_.omega2) - eta2r_ * std::conj(red_.omega1));
        c.mu = pi / (2.0 * c.area);
        c.type = std::abs(c.nu) + c.mu;
        consts_ = c;
    }

    Reduced reduce(cplx z) const
    {
        const cplx w1 = red_.omega1, w2 = red_.omega2;
        double s = consts_.area;
        double t1 = (std::conj(z) * w2).imag() / s;
        double t2 = (std::conj(w1) * z).imag() / s;
        auto m = static_cast<std::int64_t>(std::llround(t1));
        auto n = static_cast<std::int64_t>(std::llround(t2));
        cplx w = static_cast<double>(m) * w1 + static_cast<double>(n) * w2;
        Reduced r;
        r.z0 = z - w;
        r.w = w;
        r.eta = static_cast<double>(m) * eta1r_ + static_cast<double>(n) * eta2r_;
        r.odd = ((m + n + m * n) % 2) != 0;
        return r;
    }

    LatticeBasis orig_;
    LatticeBasis red_{};
    std::array<std::int64_t, 4> inv_{1, 0, 0, 1};
    double tol_;
    cplx tau_;
    cplx theta1_prime0_;
    cplx eta1r_, eta2r_;
    LatticeConstants consts_{};
};

inline cplx weierstrass_sigma(cplx z, const LatticeBasis& b, double tol = 1e-16)
{
    return WeierstrassLattice(b, tol).sigma(z);
}

inline cplx weierstrass_zeta(cplx z, const LatticeBasis& b, double tol = 1e-16)
{
    return WeierstrassLattice(b, tol).zeta(z);
}

inline LatticeConstants lattice_constants(const LatticeBasis& b, double tol = 1e-16)
{
    return WeierstrassLattice(b, tol).constants();
}

inline cplx sigma_tilde(cplx z, const LatticeBasis& b, double tol = 1e-16)
{
    return WeierstrassLattice(b, tol).sigma_tilde(z);
}

// ---------------------------------------------------------------------------
// Canonical products W(z) = z^chi prod E(z / w, p)

struct CanonicalProductSpec {
    // All nonzero zeros with |w| <= r (duplicates allowed for multiplicity).
    std::function<std::vector<cplx>(double)> zeros_within;
    bool finite = false;  // zeros_within(infinity) is the whole set
    unsigned genus = 0;
    int multiplicity_at_origin = 0;
    double start_radius = 8.0;
    double max_radius = 1 << 22;
    int richardson_levels = 3;
};

struct CanonicalProductResult {
    cplx value;
    cplx log_value;
    double radius = 0;         // truncation radius of the last partial product
    int doublings = 0;
    double last_increment = 0;  // |change| of the accelerated log over the last doubling
    bool converged = false;
};

// Partial products over |w| <= R for R doubling. The logarithms are Richardson
// extrapolated in 1/R and accepted once they stagnate over three doublings.
inline CanonicalProductResult canonical_product(const CanonicalProductSpec& spec, cplx z, double tol = 1e-10)
{
    if (!spec.zeros_within) throw precondition_error("canonical_product: no zero set");
    if (!is_finite(z)) throw domain_error("canonical_product: non-finite argument");
    auto log_partial = [&](double r) {
        auto zs = spec.zeros_within(r);
        std::sort(zs.begin(), zs.end(), modulus_arg_less);
        cplx acc = 0.0;
        for (cplx w : zs) {
            if (w == 0.0) continue;
            cplx u = z / w;
            if (u == 1.0) return cplx(-std::numeric_limits<double>::infinity(), 0.0);
            acc += log_primary_factor(u, spec.genus);
        }
        return acc;
    };
    cplx log_z = spec.multiplicity_at_origin ? static_cast<double>(spec.multiplicity_at_origin) * std::log(z) : 0.0;
    CanonicalProductResult res;
    if (spec.multiplicity_at_origin > 0 && z == 0.0) {
        res.value = 0.0;
        res.log_value = cplx(-std::numeric_limits<double>::infinity(), 0.0);
        res.converged = true;
        return res;
    }
    if (spec.finite) {
        cplx l = log_partial(std::numeric_limits<double>::infinity());
        res.log_value = l + log_z;
        res.value = std::isinf(l.real()) ? 0.0 : std::exp(res.log_value);
        res.converged = true;
        return res;
    }
    double r = spec.start_radius;
    while (r < 2.0 * std::abs(z) + 1.0) r *= 2.0;
    std::vector<std::vector<cplx>> table;  // table[j][k]: level-k Richardson at doubling j
    int stagnant = 0;
    cplx best = 0.0;
    for (int j = 0; r <= spec.max_radius; ++j, r *= 2.0) {
        cplx l = log_partial(r);
        if (std::isinf(l.real())) {
            res.value = 0.0;
            res.log_value = l;
            res.converged = true;
            return res;
        }
        std::vector<cplx> row{l};
        int levels = std::min<int>(j, spec.richardson_levels);
        for (int k = 1; k <= levels; ++k) {
            double f = std::ldexp(1.0, k);
            row.push_back((f * row[k - 1] - table[j - 1][k - 1]) / (f - 1.0));
        }
        table.push_back(row);
        // regular sets gain from the extrapolation, irregular shells only pick up noise;
        // keep whichever level moved least
        cplx cur = row[0];
        if (j > 0) {
            double inc = std::abs(row[0] - table[j - 1][0]);
            for (int k = 1; k < static_cast<int>(row.size()) && k < static_cast<int>(table[j - 1].size()); ++k) {
                double d = std::abs(row[k] - table[j - 1][k]);
                if (d < inc) {
                    inc = d;
                    cur = row[k];
                }
            }
            res.last_increment = inc;
            stagnant = inc <= tol ? stagnant + 1 : 0;
        }
        best = cur;
        res.radius = r;
        res.doublings = j;
        if (stagnant >= 3) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged) throw convergence_error("canonical_product: tolerance not reached at maximum radius");
    res.log_value = best + log_z;
    res.value = std::exp(res.log_value);
    return res;
}

// ---------------------------------------------------------------------------
// Chains

// sin(pi (z - kappa) / omega0): entire, simple zeros exactly on kappa + Z omega0.
inline cplx chain_function(cplx z, cplx omega0, cplx kappa)
{
    if (omega0 == 0.0) throw domain_error("chain_function: zero period");
    return std::sin(pi * (z - kappa) / omega0);
}

inline cplx log_chain_function(cplx z, cplx omega0, cplx kappa)
{
    if (omega0 == 0.0) throw domain_error("chain_function: zero period");
    return log_sin(pi * (z - kappa) / omega0);
}

}  // namespace abzero

#endif
