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
#ifndef ABZERO_REPORT_HPP_
#define ABZERO_REPORT_HPP_

// Structured records for run reports and locale-independent CSV output.

#include <abzero/config_io.hpp>
#include <abzero/decision.hpp>
#include <abzero/verify.hpp>

#include <charconv>
#include <string>
#include <vector>

namespace abzero {

struct RunManifest {
    std::string config_path;
    std::string command;
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    double special_tol = 1e-12;
    std::int64_t seed = 0;
    std::string output_dir = ".";
    std::string spin = "+";
    int count = 1;
    std::optional<double> alpha;
    double r_max = 100.0;
    std::vector<double> mesh_ladder = {1e-2, 5e-3, 2.5e-3};
    int threads = 1;
    bool deterministic = false;

    void validate() const
    {
        if (!(abs_tol > 0) || !(rel_tol > 0) || !(special_tol > 0)) throw precondition_error("tolerances must be positive");
        if (mesh_ladder.size() < 2) throw precondition_error("the mesh ladder needs at least two steps");
        for (double h : mesh_ladder)
            if (!(h > 0)) throw precondition_error("mesh steps must be positive");
    }
};

inline json manifest_to_json(const RunManifest& m)
{
    json j = {{"config_path", m.config_path},
              {"command", m.command},
              {"tolerances", {{"abs", m.abs_tol}, {"rel", m.rel_tol}, {"special", m.special_tol}}},
              {"seed", m.seed},
              {"output_dir", m.output_dir},
              {"spin", m.spin},
              {"count", m.count},
              {"r_max", m.r_max},
              {"mesh_ladder", m.mesh_ladder},
              {"threads", m.threads},
              {"deterministic", m.deterministic}};
    j["alpha"] = m.alpha ? json(*m.alpha) : json(nullptr);
    return j;
}

inline json verdict_to_json(const ZeroModeVerdict& v)
{
    json j = {{"status", to_string(v.status)},
              {"spin", to_string(v.spin)},
              {"rule", v.rule},
              {"theorem", v.theorem},
              {"recipe", to_string(v.recipe)},
              {"low_confidence", v.low_confidence},
              {"conditions", v.conditions}};
    j["multiplicity"] = v.multiplicity ? json(*v.multiplicity) : json(nullptr);
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

inline json quadrature_to_json(const QuadratureResult& q)
{
    json trace = json::array();
    for (const auto& [r, v] : q.radii_trace) trace.push_back({r, v});
    json j = {{"flag", to_string(q.flag)}, {"value", q.value}, {"error", q.error}, {"tail", q.tail},
              {"evals", q.evals},          {"radii_trace", trace}};
    if (!q.notice.empty()) j["notice"] = q.notice;
    return j;
}

inline json residual_to_json(const ResidualReport& r)
{
    json j = {{"meshes", r.meshes}, {"residuals", r.residuals}, {"exact", r.exact}};
    j["order"] = std::isfinite(r.order) ? json(r.order) : json(nullptr);
    if (!r.notice.empty()) j["notice"] = r.notice;
    return j;
}

// Shortest round-trip decimal representation, independent of the locale.
inline std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string trace_csv(const QuadratureResult& q)
{
    std::string out = "radius,partial_integral\n";
    for (const auto& [r, v] : q.radii_trace) out += format_double(r) + "," + format_double(v) + "\n";
    return out;
}

struct GridSpec {
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    int nx = 3, ny = 3;  // sample points per axis, endpoints included
};

// Row-major samples of |psi|; flux sites where |psi| blows up read "inf".
inline std::string grid_csv(const WaveFunction& psi, const GridSpec& g)
{
    if (g.nx < 1 || g.ny < 1 || !(g.x1 >= g.x0) || !(g.y1 >= g.y0)) throw precondition_error("grid: empty bounds or resolution");
    double reach = std::max({std::abs(g.x0), std::abs(g.x1)}) + std::max({std::abs(g.y0), std::abs(g.y1)}) + 1.0;
    std::vector<std::pair<cplx, double>> special;
    for (const auto& s : psi.singular_within(reach)) special.emplace_back(s.point, s.exponent);
    for (const auto& s : psi.potential().sites_within(reach)) special.emplace_back(s.position, 0.0);
    std::string out = "x,y,abs_psi\n";
    for (int j = 0; j < g.ny; ++j) {
        double y = g.ny == 1 ? g.y0 : g.y0 + (g.y1 - g.y0) * j / (g.ny - 1);
        for (int i = 0; i < g.nx; ++i) {
            double x = g.nx == 1 ? g.x0 : g.x0 + (g.x1 - g.x0) * i / (g.nx - 1);
            cplx z(x, y);
            std::string cell;
            cplx at = z;
            for (const auto& [p, e] : special) {
                if (std::abs(p - z) > detail::coincidence_tol(p)) continue;
                double ex = psi.exponent_at(p);
                if (ex < 0) cell = "inf";
                else if (ex > 0) cell = "0";
                else at = z + 1e-9 * std::max(1.0, std::abs(z));  // removable: sample next to the site
                break;
            }
            if (cell.empty()) {
                double v = psi.abs(at);
                cell = std::isfinite(v) ? format_double(v) : "inf";
            }
            out += format_double(x) + "," + format_double(y) + "," + cell + "\n";
        }
    }
    return out;
}

}  // namespace abzero

#endif
