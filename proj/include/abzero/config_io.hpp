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
#ifndef ABZERO_CONFIG_IO_HPP_
#define ABZERO_CONFIG_IO_HPP_

// JSON configuration documents. Complex numbers are [re, im] pairs.
//
//   {
//     "uniform_flux_density": 0.0,
//     "finite":    [{"position": [0, 0], "theta": 0.6}],
//     "chains":    [{"omega0": [1, 0], "offsets": [{"position": [0, 0], "theta": 0.5}]}],
//     "lattices":  [{"omega1": [1, 0], "omega2": [0, 1], "offsets": [...]}],
//     "irregular": {"N": 3, "theta": 0.5},
//     "perturbation": {"removed": POINTS, "added": [{"points": POINTS, "theta": 0.5}]}
//   }
//
// POINTS is a list of pairs, or an object {"points": [...], "sequence":
// {"origin", "direction", "scale", "power", "first"}}.

#include <abzero/fluxcfg.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace abzero {

using json = nlohmann::json;

namespace detail {

class Reader {
  public:
    [[noreturn]] static void fail(const std::string& path, const std::string& what)
    {
        throw config_error(path + ": " + what);
    }

    static const json& field(const json& obj, const std::string& key, const std::string& path)
    {
        if (!obj.is_object()) fail(path, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(path + "." + key, "missing field");
        return *it;
    }

    static double number(const json& v, const std::string& path)
    {
        if (!v.is_number()) fail(path, "expected a number");
        double x = v.get<double>();
        if (!std::isfinite(x)) fail(path, "non-finite number");
        return x;
    }

    static std::int64_t integer(const json& v, const std::string& path)
    {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        return v.get<std::int64_t>();
    }

    static cplx complex(const json& v, const std::string& path)
    {
        if (!v.is_array() || v.size() != 2) fail(path, "expected a pair [re, im]");
        return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
    }

    static const json& array(const json& v, const std::string& path)
    {
        if (!v.is_array()) fail(path, "expected an array");
        return v;
    }

    static FluxSite site(const json& v, const std::string& path)
    {
        return {complex(field(v, "position", path), path + ".position"), number(field(v, "theta", path), path + ".theta")};
    }

    static std::vector<FluxSite> sites(const json& v, const std::string& path)
    {
        std::vector<FluxSite> out;
        const auto& a = array(v, path);
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(site(a[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    static std::vector<cplx> points(const json& v, const std::string& path)
    {
        std::vector<cplx> out;
        const auto& a = array(v, path);
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(complex(a[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    static PointSet point_set(const json& v, const std::string& path)
    {
        PointSet s;
        if (v.is_array()) {
            s.points = points(v, path);
            return s;
        }
        if (!v.is_object()) fail(path, "expected a point list or an object");
        if (v.contains("points")) s.points = points(v["points"], path + ".points");
        if (v.contains("sequence")) {
            const auto& q = v["sequence"];
            std::string p = path + ".sequence";
            PointSequence seq;
            if (q.contains("origin")) seq.origin = complex(q["origin"], p + ".origin");
            if (q.contains("direction")) seq.direction = complex(q["direction"], p + ".direction");
            if (q.contains("scale")) seq.scale = number(q["scale"], p + ".scale");
            if (q.contains("power")) seq.power = number(q["power"], p + ".power");
            if (q.contains("first")) seq.first = integer(q["first"], p + ".first");
            if (!(seq.scale > 0) || !(seq.power > 0) || std::abs(seq.direction) == 0.0)
                fail(p, "needs positive scale and power and a nonzero direction");
            s.sequence = seq;
        }
        return s;
    }
};

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const std::vector<FluxSite>& v)
{
    json a = json::array();
    for (const auto& s : v) a.push_back({{"position", to_json(s.position)}, {"theta", s.theta}});
    return a;
}

inline json to_json(const PointSet& s)
{
    json pts = json::array();
    for (cplx p : s.points) pts.push_back(to_json(p));
    if (!s.sequence) return pts;
    const auto& q = *s.sequence;
    return {{"points", pts},
            {"sequence",
             {{"origin", to_json(q.origin)},
              {"direction", to_json(q.direction)},
              {"scale", q.scale},
              {"power", q.power},
              {"first", q.first}}}};
}

}  // namespace detail

inline FluxConfiguration config_from_json(const json& doc)
{
    using R = detail::Reader;
    const std::string root = "config";
    if (!doc.is_object()) R::fail(root, "expected an object");
    static const char* known[] = {"uniform_flux_density", "finite", "chains", "lattices", "irregular", "perturbation"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) == std::end(known))
            R::fail(root + "." + it.key(), "unknown field");
    FluxConfiguration c;
    if (doc.contains("uniform_flux_density")) c.uniform_flux_density = R::number(doc["uniform_flux_density"], root + ".uniform_flux_density");
    if (doc.contains("finite")) c.finite = R::sites(doc["finite"], root + ".finite");
    if (doc.contains("chains")) {
        const auto& a = R::array(doc["chains"], root + ".chains");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string p = root + ".chains[" + std::to_string(i) + "]";
            ChainComponent ch;
            ch.omega0 = R::complex(R::field(a[i], "omega0", p), p + ".omega0");
            ch.offsets = R::sites(R::field(a[i], "offsets", p), p + ".offsets");
            c.chains.push_back(ch);
        }
    }
    if (doc.contains("lattices")) {
        const auto& a = R::array(doc["lattices"], root + ".lattices");
        for (std::size_t i = 0; i < a.size(); ++i) {
            std::string p = root + ".lattices[" + std::to_string(i) + "]";
            LatticeComponent l;
            l.basis.omega1 = R::complex(R::field(a[i], "omega1", p), p + ".omega1");
            l.basis.omega2 = R::complex(R::field(a[i], "omega2", p), p + ".omega2");
            l.offsets = R::sites(R::field(a[i], "offsets", p), p + ".offsets");
            c.lattices.push_back(l);
        }
    }
    if (doc.contains("irregular")) {
        const auto& v = doc["irregular"];
        std::string p = root + ".irregular";
        IrregularComponent ir;
        ir.order = static_cast<int>(R::integer(R::field(v, "N", p), p + ".N"));
        ir.theta = R::number(R::field(v, "theta", p), p + ".theta");
        c.irregular = ir;
    }
    if (doc.contains("perturbation")) {
        const auto& v = doc["perturbation"];
        std::string p = root + ".perturbation";
        if (!v.is_object()) R::fail(p, "expected an object");
        if (v.contains("removed")) c.perturbation.removed = R::point_set(v["removed"], p + ".removed");
        if (v.contains("added")) {
            const auto& a = R::array(v["added"], p + ".added");
            for (std::size_t i = 0; i < a.size(); ++i) {
                std::string q = p + ".added[" + std::to_string(i) + "]";
                AddedSet s;
                s.points = R::point_set(R::field(a[i], "points", q), q + ".points");
                s.theta = R::number(R::field(a[i], "theta", q), q + ".theta");
                c.perturbation.added.push_back(s);
            }
        }
    }
    validate(c);
    return c;
}

inline json config_to_json(const FluxConfiguration& c)
{
    json doc;
    doc["uniform_flux_density"] = c.uniform_flux_density;
    doc["finite"] = detail::to_json(c.finite);
    doc["chains"] = json::array();
    for (const auto& ch : c.chains)
        doc["chains"].push_back({{"omega0", detail::to_json(ch.omega0)}, {"offsets", detail::to_json(ch.offsets)}});
    doc["lattices"] = json::array();
    for (const auto& l : c.lattices)
        doc["lattices"].push_back({{"omega1", detail::to_json(l.basis.omega1)},
                                   {"omega2", detail::to_json(l.basis.omega2)},
                                   {"offsets", detail::to_json(l.offsets)}});
    if (c.irregular) doc["irregular"] = {{"N", c.irregular->order}, {"theta", c.irregular->theta}};
    json added = json::array();
    for (const auto& a : c.perturbation.added) added.push_back({{"points", detail::to_json(a.points)}, {"theta", a.theta}});
    doc["perturbation"] = {{"removed", detail::to_json(c.perturbation.removed)}, {"added", added}};
    return doc;
}

// Parse a document; syntax errors report line and column.
inline FluxConfiguration parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw config_error("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
    }
    return config_from_json(doc);
}

inline FluxConfiguration load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline std::string serialize_config(const FluxConfiguration& c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace abzero

#endif
