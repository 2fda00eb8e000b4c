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
#ifndef ABZERO_GROWTH_HPP_
#define ABZERO_GROWTH_HPP_

// Order and type of an entire function from its maximum modulus on circles.

#include <abzero/common.hpp>

#include <functional>
#include <string>
#include <vector>

namespace abzero {

// z -> ln|f(z)|
using LogModulus = std::function<double(cplx)>;

struct GrowthReport {
    double order = 0;
    double type = 0;
    bool low_confidence = false;
    double fit_rms = 0;          // rms residual of the ln ln M against ln r fit
    std::size_t radii_used = 0;  // grid points kept after truncation
    std::string notice;
};

// ln M(r) sampled on each circle of r_grid (samples equally spaced angles);
// order = least-squares slope of ln ln M(r) against ln r over the top half of
// the grid, type = max of ln M(r) / r^order over the same radii.
inline GrowthReport growth_estimate(const LogModulus& log_abs, const std::vector<double>& r_grid, int samples = 256)
{
    if (r_grid.size() < 4) throw precondition_error("growth_estimate: need at least four radii");
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        if (!(r_grid[i] > r_grid[i - 1] && r_grid[i - 1] > 0))
            throw precondition_error("growth_estimate: radii must be positive and increasing");
    GrowthReport rep;
    std::vector<double> rs, lm;
    for (double r : r_grid) {
        double m = -std::numeric_limits<double>::infinity();
        bool bad = false;
        for (int k = 0; k < samples; ++k) {
            double v = log_abs(std::polar(r, 2 * pi * (k + 0.5) / samples));
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
                bad = true;
                break;
            }
            m = std::max(m, v);
        }
        if (bad) {
            rep.notice = "grid truncated at r = " + std::to_string(r) + " (non-finite modulus)";
            break;
        }
        rs.push_back(r);
        lm.push_back(m);
    }
    std::vector<double> x, y, rr, ll;
    for (std::size_t i = rs.size() / 2; i < rs.size(); ++i) {
        if (!(lm[i] > 0)) continue;
        x.push_back(std::log(rs[i]));
        y.push_back(std::log(lm[i]));
        rr.push_back(rs[i]);
        ll.push_back(lm[i]);
    }
    rep.radii_used = rs.size();
    if (x.size() < 2) {
        rep.low_confidence = true;
        rep.notice += rep.notice.empty() ? "" : "; ";
        rep.notice += "too few radii with ln M(r) > 0";
        return rep;
    }
    double n = static_cast<double>(x.size()), mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    rep.order = sxy / sxx;
    double res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (my + rep.order * (x[i] - mx));
        res += e * e / n;
    }
    rep.fit_rms = std::sqrt(res);
    rep.type = 0;
    for (std::size_t i = 0; i < rr.size(); ++i) rep.type = std::max(rep.type, ll[i] / std::pow(rr[i], rep.order));
    rep.low_confidence = x.size() < 4 || rep.fit_rms > 0.02;
    return rep;
}

inline GrowthReport growth_estimate_of(const std::function<cplx(cplx)>& f, const std::vector<double>& r_grid,
                                       int samples = 256)
{
    return growth_estimate(LogModulus([&](cplx z) { return std::log(std::abs(f(z))); }), r_grid, samples);
}

// n radii spaced geometrically over [r0, r1].
inline std::vector<double> geometric_grid(double r0, double r1, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(r0 * std::pow(r1 / r0, static_cast<double>(i) / (n - 1)));
    return g;
}

}  // namespace abzero

#endif
