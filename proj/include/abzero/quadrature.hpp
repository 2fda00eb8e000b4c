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
#ifndef ABZERO_QUADRATURE_HPP_
#define ABZERO_QUADRATURE_HPP_

// Globally adaptive cubature for integrands with isolated algebraic
// singularities |z - p|^power (power > -2).
//
// The domain is a rectangle in a parameter plane (Cartesian, or polar about
// a centre). Cells free of singular points use tensor Gauss-Legendre rules.
// A cell with exactly one singular point nearby is split into the triangles
// joining that point to its edges (signed when the point lies outside); each
// triangle is integrated in (angle, radial fraction) coordinates with a
// Gauss-Jacobi rule carrying the singular weight. Regions with the largest
// error estimate are refined first.

#include <abzero/common.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <queue>
#include <thread>
#include <utility>
#include <vector>

namespace abzero::quad {

struct Rule {
    std::vector<double> x;  // nodes in (0, 1)
    std::vector<double> w;
};

// n-point Gauss-Jacobi rule for int_0^1 s^gamma f(s) ds (Golub-Welsch).
inline Rule make_jacobi_rule(int n, double gamma)
{
    if (n < 1 || !(gamma > -1)) throw precondition_error("jacobi rule: need n >= 1 and gamma > -1");
    const double a = 0.0, b = gamma;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        double s = 2.0 * k + a + b;
        J(k, k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
        if (k > 0) {
            double kk = k;
            double num = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b);
            double den = s * s * (s + 1.0) * (s - 1.0);
            J(k, k - 1) = J(k - 1, k) = std::sqrt(num / den);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    double mu0 = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                          std::lgamma(a + b + 2.0));
    Rule r;
    double scale = std::pow(2.0, -b - 1.0);
    for (int i = 0; i < n; ++i) {
        double v0 = es.eigenvectors()(0, i);
        r.x.push_back((1.0 + es.eigenvalues()(i)) / 2.0);
        r.w.push_back(scale * mu0 * v0 * v0);
    }
    return r;
}

inline const Rule& jacobi_rule(int n, double gamma)
{
    static std::mutex m;
    static std::map<std::pair<int, double>, Rule> cache;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_pair(n, gamma);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache.emplace(key, make_jacobi_rule(n, gamma)).first->second;
}

inline const Rule& legendre_rule(int n) { return jacobi_rule(n, 0.0); }

enum class MapKind { Cartesian, Polar };

// Parameter plane -> physical plane. Polar: z = centre + u e^{iv}.
struct ParamMap {
    MapKind kind = MapKind::Cartesian;
    cplx center = 0.0;

    cplx point(double u, double v) const
    {
        return kind == MapKind::Cartesian ? cplx(u, v) : center + std::polar(u, v);
    }
    double jacobian(double u, double) const { return kind == MapKind::Cartesian ? 1.0 : u; }
};

// Singular point in parameter coordinates; the integrand behaves like dist^power.
struct Anchor {
    double u;
    double v;
    double power;
};

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_evals = 20'000'000;
    int threads = 1;
    std::size_t batch = 32;  // regions refined per step, independent of the thread count
    int low_order = 5;
    int high_order = 8;
};

struct Result {
    double value = 0;
    double error = 0;
    std::size_t evals = 0;
    std::size_t regions = 0;
    bool converged = false;
    bool nonfinite = false;  // the integrand returned inf or nan somewhere
};

using Integrand = std::function<double(cplx)>;

namespace detail {

struct Region {
    enum Kind { Plain, Edge, Sector } kind = Plain;
    // rectangle (Plain, Edge)
    double u0 = 0, u1 = 0, v0 = 0, v1 = 0;
    // sector: apex, angular range, radial fractions and the far edge n.x = c
    // geometry is in (u, v * vs) so that polar sectors are not stretched
    double au = 0, av = 0, power = 0, phi0 = 0, phi1 = 0, s0 = 0, s1 = 1, nx = 0, ny = 0, c = 0, vs = 1;
    int depth = 0;
    double value = 0, error = 0;
    std::size_t id = 0;
};

struct ByError {
    bool operator()(const Region& a, const Region& b) const
    {
        if (a.error != b.error) return a.error < b.error;
        return a.id > b.id;
    }
};

class Engine {
  public:
    Engine(const Integrand& g, const ParamMap& map, std::vector<Anchor> anchors, double center_power, const Options& o)
        : g_(g), map_(map), anchors_(std::move(anchors)), center_power_(center_power), opt_(o)
    {
        std::sort(anchors_.begin(), anchors_.end(), [](const Anchor& a, const Anchor& b) { return a.u < b.u; });
    }

    Result run(double u0, double u1, double v0, double v1, int nu, int nv)
    {
        std::vector<Region> todo, ready;
        for (int i = 0; i < nu; ++i)
            for (int j = 0; j < nv; ++j) {
                Region r;
                r.u0 = u0 + (u1 - u0) * i / nu;
                r.u1 = u0 + (u1 - u0) * (i + 1) / nu;
                r.v0 = v0 + (v1 - v0) * j / nv;
                r.v1 = v0 + (v1 - v0) * (j + 1) / nv;
                r.kind = (map_.kind == MapKind::Polar && r.u0 == 0.0) ? Region::Edge : Region::Plain;
                todo.push_back(r);
            }
        for (auto& r : todo) classify(r, ready);
        evaluate_all(ready);
        std::priority_queue<Region, std::vector<Region>, ByError> heap;
        for (auto& r : ready) heap.push(r);
        Result res;
        auto totals = [&]() {
            // fixed summation order keeps results independent of threading
            std::vector<Region> all;
            auto copy = heap;
            while (!copy.empty()) {
                all.push_back(copy.top());
                copy.pop();
            }
            std::sort(all.begin(), all.end(), [](const Region& a, const Region& b) { return a.id < b.id; });
            double v = 0, e = 0, cv = 0;
            for (const auto& r : all) {
                double y = r.value - cv;
                double t = v + y;
                cv = (t - v) - y;
                v = t;
                e += r.error;
            }
            return std::make_pair(v, e);
        };
        double total = 0, err = 0;
        for (auto& r : ready) {
            total += r.value;
            err += r.error;
        }
        int since_exact = 0;
        while (true) {
            if (nonfinite_) break;
            if (++since_exact >= 64) {
                std::tie(total, err) = totals();
                since_exact = 0;
            }
            double tol = std::max(opt_.abs_tol, opt_.rel_tol * std::abs(total));
            if (err <= tol) {
                std::tie(total, err) = totals();
                if (err <= std::max(opt_.abs_tol, opt_.rel_tol * std::abs(total))) {
                    res.converged = true;
                    break;
                }
            }
            if (evals_ >= opt_.max_evals || heap.empty()) break;
            std::vector<Region> children;
            for (std::size_t b = 0; b < opt_.batch && !heap.empty(); ++b) {
                Region r = heap.top();
                if (r.error <= 0.0 && b > 0) break;
                heap.pop();
                total -= r.value;
                err -= r.error;
                auto kids = split(r);
                children.insert(children.end(), kids.begin(), kids.end());
            }
            evaluate_all(children);
            for (auto& k : children) {
                total += k.value;
                err += k.error;
                heap.push(k);
            }
        }
        std::tie(total, err) = totals();
        res.value = total;
        res.error = err;
        res.evals = evals_;
        res.regions = heap.size();
        res.nonfinite = nonfinite_;
        if (nonfinite_) res.converged = false;
        return res;
    }

  private:
    double physical_distance(const Anchor& a, double u, double v) const
    {
        if (map_.kind == MapKind::Cartesian) return std::hypot(a.u - u, a.v - v);
        return std::abs(std::polar(a.u, a.v) - std::polar(u, v));
    }

    // Anchors within half the physical diagonal of the rectangle. Polar copies
    // of one point (angles differing by 2 pi) are reported once.
    std::vector<Anchor> nearby(double u0, double u1, double v0, double v1) const
    {
        const double vs = map_.kind == MapKind::Polar ? u1 : 1.0;
        double d = 0.5 * std::hypot(u1 - u0, (v1 - v0) * vs);
        std::vector<Anchor> out;
        std::vector<double> gap;
        auto lo = std::lower_bound(anchors_.begin(), anchors_.end(), u0 - d,
                                   [](const Anchor& a, double x) { return a.u < x; });
        for (auto it = lo; it != anchors_.end() && it->u <= u1 + d; ++it) {
            double uc = std::clamp(it->u, u0, u1), vc = std::clamp(it->v, v0, v1);
            if (physical_distance(*it, uc, vc) > d) continue;
            double g = std::abs(it->v - vc);
            bool dup = false;
            if (map_.kind == MapKind::Polar)
                for (std::size_t k = 0; k < out.size(); ++k)
                    if (out[k].u == it->u && std::abs(std::remainder(out[k].v - it->v, 2 * pi)) < 1e-12) {
                        dup = true;
                        if (g < gap[k]) {
                            out[k] = *it;
                            gap[k] = g;
                        }
                    }
            if (!dup) {
                out.push_back(*it);
                gap.push_back(g);
            }
        }
        return out;
    }

    static bool inside(const Anchor& a, const Region& r)
    {
        double eu = 1e-12 * std::max(1.0, std::abs(r.u1)), ev = 1e-12 * std::max(1.0, std::abs(r.v1));
        return a.u >= r.u0 - eu && a.u <= r.u1 + eu && a.v >= r.v0 - ev && a.v <= r.v1 + ev;
    }

    void classify(Region r, std::vector<Region>& out)
    {
        auto near = nearby(r.u0, r.u1, r.v0, r.v1);
        if (near.empty()) {
            r.id = next_id_++;
            out.push_back(r);
            return;
        }
        if (r.depth < 96 && (near.size() > 1 || r.kind == Region::Edge || !inside(near.front(), r))) {
            for (auto& k : quarter(r)) classify(k, out);
            return;
        }
        // one anchor (or a cluster that cannot be separated): signed triangles from it
        const Anchor& a = near.front();
        const double vs = map_.kind == MapKind::Polar ? a.u : 1.0;
        double pu[5] = {r.u0, r.u1, r.u1, r.u0, r.u0};
        double pv[5] = {r.v0 * vs, r.v0 * vs, r.v1 * vs, r.v1 * vs, r.v0 * vs};
        const double avs = a.v * vs;
        for (int e = 0; e < 4; ++e) {
            double ax = pu[e] - a.u, ay = pv[e] - avs, bx = pu[e + 1] - a.u, by = pv[e + 1] - avs;
            double cross = ax * by - ay * bx;
            double scale = std::hypot(ax, ay) * std::hypot(bx, by);
            if (std::abs(cross) <= 1e-14 * scale || scale == 0.0) continue;
            Region s;
            s.kind = Region::Sector;
            s.au = a.u;
            s.av = avs;
            s.vs = vs;
            s.power = a.power;
            s.phi0 = std::atan2(ay, ax);
            s.phi1 = s.phi0 + std::atan2(cross, ax * bx + ay * by);  // signed sweep in (-pi, pi)
            s.s0 = 0;
            s.s1 = 1;
            // edge line through the two vertices
            double ex = pu[e + 1] - pu[e], ey = pv[e + 1] - pv[e];
            s.nx = -ey;
            s.ny = ex;
            s.c = s.nx * pu[e] + s.ny * pv[e];
            s.depth = r.depth;
            s.id = next_id_++;
            out.push_back(s);
        }
    }

    // Children of a rectangle: halves along the long side when the physical
    // aspect ratio exceeds two, quarters otherwise.
    std::vector<Region> quarter(const Region& r) const
    {
        std::vector<Region> out;
        double lu = r.u1 - r.u0, lv = (r.v1 - r.v0) * (map_.kind == MapKind::Polar ? r.u1 : 1.0);
        int nu = lv > 2 * lu ? 1 : 2, nv = lu > 2 * lv ? 1 : 2;
        for (int i = 0; i < nu; ++i)
            for (int j = 0; j < nv; ++j) {
                Region k = r;
                k.u0 = r.u0 + lu * i / nu;
                k.u1 = i + 1 == nu ? r.u1 : r.u0 + lu * (i + 1) / nu;
                k.v0 = r.v0 + (r.v1 - r.v0) * j / nv;
                k.v1 = j + 1 == nv ? r.v1 : r.v0 + (r.v1 - r.v0) * (j + 1) / nv;
                k.depth = r.depth + 1;
                k.kind = (r.kind == Region::Edge && i == 0) ? Region::Edge : Region::Plain;
                out.push_back(k);
            }
        return out;
    }

    std::vector<Region> split(const Region& r)
    {
        std::vector<Region> out;
        if (r.kind != Region::Sector) {
            for (auto& k : quarter(r)) classify(k, out);
            return out;
        }
        double pm = 0.5 * (r.phi0 + r.phi1), sm = 0.5 * (r.s0 + r.s1);
        double ps[3] = {r.phi0, pm, r.phi1}, ss[3] = {r.s0, sm, r.s1};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Region k = r;
                k.phi0 = ps[i];
                k.phi1 = ps[i + 1];
                k.s0 = ss[j];
                k.s1 = ss[j + 1];
                k.depth = r.depth + 1;
                k.id = next_id_++;
                out.push_back(k);
            }
        return out;
    }

    double f(double u, double v, std::size_t& count, bool& bad) const
    {
        ++count;
        double val = g_(map_.point(u, v)) * map_.jacobian(u, v);
        if (!std::isfinite(val)) bad = true;
        return val;
    }

    // (value, error) of one region
    std::pair<double, double> estimate(const Region& r, std::size_t& count, bool& bad) const
    {
        double q[2];
        int orders[2] = {opt_.low_order, opt_.high_order};
        for (int o = 0; o < 2; ++o) {
            int n = orders[o];
            double sum = 0;
            if (r.kind == Region::Plain) {
                const Rule& gl = legendre_rule(n);
                double du = r.u1 - r.u0, dv = r.v1 - r.v0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        sum += gl.w[i] * gl.w[j] * f(r.u0 + du * gl.x[i], r.v0 + dv * gl.x[j], count, bad);
                sum *= du * dv;
            } else if (r.kind == Region::Edge) {
                // weight u^(1 + centre power) on [0, u1]
                double gam = 1.0 + center_power_;
                const Rule& gj = jacobi_rule(n, gam);
                const Rule& gl = legendre_rule(n);
                double du = r.u1, dv = r.v1 - r.v0;
                for (int i = 0; i < n; ++i) {
                    double s = gj.x[i];
                    double u = du * s;
                    for (int j = 0; j < n; ++j)
                        sum += gj.w[i] * gl.w[j] * f(u, r.v0 + dv * gl.x[j], count, bad) / std::pow(s, gam);
                }
                sum *= du * dv;
            } else {
                const Rule& gl = legendre_rule(n);
                bool apex = r.s0 == 0.0;
                double gam = 1.0 + r.power;
                const Rule& rs = apex ? jacobi_rule(n, gam) : gl;
                double dphi = r.phi1 - r.phi0, ds = r.s1 - r.s0;
                for (int j = 0; j < n; ++j) {
                    double phi = r.phi0 + dphi * gl.x[j];
                    double cx = std::cos(phi), cy = std::sin(phi);
                    double denom = r.nx * cx + r.ny * cy;
                    double R = (r.c - r.nx * r.au - r.ny * r.av) / denom;
                    for (int i = 0; i < n; ++i) {
                        double s = r.s0 + ds * rs.x[i];
                        double val = f(r.au + s * R * cx, (r.av + s * R * cy) / r.vs, count, bad) * s * R * R / r.vs;
                        if (apex) val /= std::pow(rs.x[i], gam) * std::pow(ds, gam);
                        sum += gl.w[j] * rs.w[i] * val;
                    }
                }
                sum *= dphi * ds * (apex ? std::pow(ds, gam) : 1.0);
            }
            q[o] = sum;
        }
        return {q[1], std::abs(q[1] - q[0])};
    }

    void evaluate_all(std::vector<Region>& regs)
    {
        auto work = [&](std::size_t lo, std::size_t hi, std::size_t& cnt, bool& bad) {
            for (std::size_t i = lo; i < hi; ++i) {
                auto [v, e] = estimate(regs[i], cnt, bad);
                regs[i].value = v;
                regs[i].error = std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
            }
        };
        int nt = std::max(1, opt_.threads);
        if (nt == 1 || regs.size() < 2) {
            std::size_t cnt = 0;
            bool bad = false;
            work(0, regs.size(), cnt, bad);
            evals_ += cnt;
            nonfinite_ = nonfinite_ || bad;
            return;
        }
        std::vector<std::size_t> cnts(nt, 0);
        std::vector<char> bads(nt, 0);
        std::vector<std::thread> pool;
        std::size_t chunk = (regs.size() + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            std::size_t lo = t * chunk, hi = std::min(regs.size(), lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, t, lo, hi] {
                bool b = false;
                work(lo, hi, cnts[t], b);
                bads[t] = b;
            });
        }
        for (auto& th : pool) th.join();
        for (int t = 0; t < nt; ++t) {
            evals_ += cnts[t];
            nonfinite_ = nonfinite_ || bads[t];
        }
    }

    const Integrand& g_;
    ParamMap map_;
    std::vector<Anchor> anchors_;
    double center_power_;
    Options opt_;
    std::size_t evals_ = 0;
    std::size_t next_id_ = 0;
    bool nonfinite_ = false;
};

}  // namespace detail

// Integral of g over the parameter rectangle [u0,u1] x [v0,v1] (nu x nv initial cells).
// For a polar map, `center_power` is the exponent of g at the centre when u0 = 0.
inline Result integrate(const Integrand& g, const ParamMap& map, double u0, double u1, double v0, double v1,
                        const std::vector<Anchor>& anchors, const Options& opt, int nu = 1, int nv = 1,
                        double center_power = 0.0)
{
    if (!(u1 > u0) || !(v1 > v0)) throw precondition_error("integrate: empty parameter rectangle");
    if (map.kind == MapKind::Polar && u0 < 0) throw precondition_error("integrate: negative radius");
    for (const auto& a : anchors)
        if (!(a.power > -2.0)) throw precondition_error("integrate: non-integrable singularity");
    if (!(center_power > -2.0)) throw precondition_error("integrate: non-integrable singularity at the centre");
    detail::Engine e(g, map, anchors, center_power, opt);
    return e.run(u0, u1, v0, v1, std::max(1, nu), std::max(1, nv));
}

// Integral over the annulus r0 < |z - centre| < r1 (r0 may be zero) given the
// singular points of g and their exponents. Points near the angular seam are
// registered on both sides of it.
inline Result integrate_annulus(const Integrand& g, cplx centre, double r0, double r1,
                                const std::vector<std::pair<cplx, double>>& singular, const Options& opt)
{
    // seam at the middle of the largest angular gap between singular points
    std::vector<double> angles;
    double center_power = 0.0;
    for (const auto& [p, e] : singular) {
        double d = std::abs(p - centre);
        if (d < 1e-12 * std::max(1.0, r1))
            center_power += e;
        else
            angles.push_back(arg_2pi(p - centre));
    }
    double seam = 0.0;
    if (!angles.empty()) {
        std::sort(angles.begin(), angles.end());
        double best = angles.front() + 2 * pi - angles.back();
        seam = angles.back() + 0.5 * best;
        for (std::size_t i = 1; i < angles.size(); ++i)
            if (angles[i] - angles[i - 1] > best) {
                best = angles[i] - angles[i - 1];
                seam = 0.5 * (angles[i] + angles[i - 1]);
            }
    }
    std::vector<Anchor> anchors;
    for (const auto& [p, e] : singular) {
        double d = std::abs(p - centre);
        if (d < 1e-12 * std::max(1.0, r1)) continue;
        double v = arg_2pi(p - centre) - arg_2pi(cplx(std::cos(seam), std::sin(seam)));
        while (v < 0) v += 2 * pi;
        while (v >= 2 * pi) v -= 2 * pi;
        double theta0 = arg_2pi(cplx(std::cos(seam), std::sin(seam)));
        for (int k = -1; k <= 1; ++k) anchors.push_back({d, theta0 + v + 2 * pi * k, e});
    }
    double theta0 = arg_2pi(cplx(std::cos(seam), std::sin(seam)));
    ParamMap map{MapKind::Polar, centre};
    double width = r1 - r0;
    int nv = static_cast<int>(std::ceil(2 * pi * 0.5 * (r0 + r1) / width));
    nv = std::clamp(nv, 8, 4096);
    return integrate(g, map, r0, r1, theta0, theta0 + 2 * pi, anchors, opt, 1, nv, center_power);
}

}  // namespace abzero::quad

#endif
