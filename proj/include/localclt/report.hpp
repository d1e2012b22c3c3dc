#ifndef LOCALCLT_REPORT_HPP
#define LOCALCLT_REPORT_HPP

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "localclt/bounds.hpp"
#include "localclt/cumulants.hpp"
#include "localclt/errors.hpp"
#include "localclt/matching.hpp"
#include "localclt/models.hpp"
#include "localclt/sim.hpp"

namespace localclt {

// Deterministic JSON emitter: insertion-ordered objects, every floating-point
// number printed with 17 significant digits, newline-terminated. Reports are
// byte-stable across reruns and worker counts.
class JsonValue {
public:
    using Object = std::vector<std::pair<std::string, JsonValue>>;
    using Array = std::vector<JsonValue>;

    JsonValue() : v_(nullptr) {}
    JsonValue(std::nullptr_t) : v_(nullptr) {}
    JsonValue(bool b) : v_(b) {}
    JsonValue(double d) : v_(d) {}
    JsonValue(long long i) : v_(i) {}
    JsonValue(int i) : v_(static_cast<long long>(i)) {}
    JsonValue(const char* s) : v_(std::string(s)) {}
    JsonValue(std::string s) : v_(std::move(s)) {}
    JsonValue(Array a) : v_(std::move(a)) {}
    JsonValue(Object o) : v_(std::move(o)) {}

    static JsonValue array(std::vector<double> xs) {
        Array a;
        for (double x : xs) a.emplace_back(x);
        return JsonValue(std::move(a));
    }

    JsonValue& add(const std::string& key, JsonValue val) {
        std::get<Object>(v_).emplace_back(key, std::move(val));
        return *this;
    }

    void write(std::string& out, int indent = 0) const {
        struct Visitor {
            std::string& out;
            int indent;
            void pad(int n) const { out.append(static_cast<std::size_t>(2 * n), ' '); }
            void operator()(std::nullptr_t) const { out += "null"; }
            void operator()(bool b) const { out += b ? "true" : "false"; }
            void operator()(long long i) const { out += std::to_string(i); }
            void operator()(double d) const {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", d);
                out += buf;
            }
            void operator()(const std::string& s) const {
                out += '"';
                for (char c : s) {
                    switch (c) {
                        case '"': out += "\\\""; break;
                        case '\\': out += "\\\\"; break;
                        case '\n': out += "\\n"; break;
                        case '\t': out += "\\t"; break;
                        default: out += c;
                    }
                }
                out += '"';
            }
            void operator()(const Array& a) const {
                out += '[';
                for (std::size_t i = 0; i < a.size(); ++i) {
                    if (i) out += ", ";
                    a[i].write(out, indent);
                }
                out += ']';
            }
            void operator()(const Object& o) const {
                out += "{\n";
                for (std::size_t i = 0; i < o.size(); ++i) {
                    pad(indent + 1);
                    (*this)(o[i].first);
                    out += ": ";
                    o[i].second.write(out, indent + 1);
                    if (i + 1 < o.size()) out += ',';
                    out += '\n';
                }
                pad(indent);
                out += '}';
            }
        };
        std::visit(Visitor{out, indent}, v_);
    }

    std::string str() const {
        std::string out;
        write(out);
        out += '\n';
        return out;
    }

private:
    std::variant<std::nullptr_t, bool, long long, double, std::string, Array, Object> v_;
};

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

// Aligned-column plain-text table.
inline std::string format_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], row[c].size());
        }
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            if (c + 1 < row.size())
                out.append(width[c] - row[c].size() + 2, ' ');
        }
        out += '\n';
    }
    return out;
}

// ---- serializers ----

inline JsonValue to_json(const MomentSeq<double>& m) {
    JsonValue obj{JsonValue::Object{}};
    obj.add("order", static_cast<long long>(m.order()));
    obj.add("values", JsonValue::array(m.values));
    return obj;
}

inline JsonValue to_json(const CumulantSeq<double>& k) {
    JsonValue obj{JsonValue::Object{}};
    obj.add("order", static_cast<long long>(k.order()));
    obj.add("values", JsonValue::array(k.values));
    return obj;
}

inline JsonValue to_json(const RemainderTable& table) {
    JsonValue::Array rows;
    for (const auto& e : table.entries) {
        JsonValue row{JsonValue::Object{}};
        row.add("j", static_cast<long long>(e.j));
        row.add("omega", e.omega);
        row.add("value", e.value);
        row.add("stderr", e.se);
        row.add("exact", e.exact);
        rows.push_back(std::move(row));
    }
    return JsonValue(std::move(rows));
}

inline JsonValue to_json(const BoundReport& rep) {
    JsonValue obj{JsonValue::Object{}};
    obj.add("theorem", rep.theorem);
    obj.add("value", rep.value);
    JsonValue inputs{JsonValue::Object{}};
    for (const auto& [k, v] : rep.inputs) inputs.add(k, v);
    obj.add("inputs", std::move(inputs));
    obj.add("constants", rep.constant_note);
    JsonValue::Array warn;
    for (const auto& w : rep.warnings) warn.emplace_back(w);
    obj.add("warnings", JsonValue(std::move(warn)));
    return obj;
}

inline JsonValue to_json(const MatchResult& res) {
    JsonValue obj{JsonValue::Object{}};
    obj.add("gaussian_branch", res.gaussian_branch);
    obj.add("q", res.q);
    if (!res.q_note.empty()) obj.add("q_note", res.q_note);
    obj.add("c_p_used", res.c_p_used);
    obj.add("retries", static_cast<long long>(res.retries));
    obj.add("kappa_lower_bound", res.kappa_lower_bound);
    obj.add("xi_cumulants", to_json(res.xi_cumulants));
    obj.add("xi_moments", to_json(res.xi_moments));
    JsonValue::Array atoms;
    for (const auto& [x, w] : res.atoms) {
        JsonValue atom{JsonValue::Object{}};
        atom.add("location", x);
        atom.add("weight", w);
        atoms.push_back(std::move(atom));
    }
    obj.add("atoms", JsonValue(std::move(atoms)));
    return obj;
}

inline JsonValue to_json(const RateFit& fit, double p, long long reps, std::uint64_t seed) {
    JsonValue obj{JsonValue::Object{}};
    obj.add("p", p);
    obj.add("reps", reps);
    obj.add("seed", static_cast<long long>(seed));
    JsonValue::Array sizes;
    for (long long s : fit.sizes) sizes.emplace_back(s);
    obj.add("sizes", JsonValue(std::move(sizes)));
    obj.add("distances", JsonValue::array(fit.distances));
    obj.add("slope", fit.slope);
    obj.add("intercept", fit.intercept);
    obj.add("slope_stderr", fit.slope_se);
    obj.add("normal_convergence", fit.normal_convergence);
    return obj;
}

// ---- model file IO ----
// Exact models: {"vertices": [...], "edges": [[a,b],...],
//                "outcomes": [{"p": .., "x": [..]}, ...]}
// Sampler models: {"generator": "mdep_ma"|"ustat", ...parameters...}

namespace detail {
inline VertexId vertex_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) return {j.get<long long>()};
    if (j.is_string()) return parse_vertex(j.get<std::string>());
    if (j.is_array()) {
        VertexId v;
        for (const auto& c : j) v.push_back(c.get<long long>());
        return v;
    }
    throw ConfigError("model file: bad vertex encoding");
}
}  // namespace detail

inline GeneratorSpec generator_from_json(const nlohmann::json& j) {
    const std::string name = j.at("generator").get<std::string>();
    if (name == "mdep_ma") {
        MdepMASpec spec;
        spec.box.clear();
        if (j.contains("box"))
            for (const auto& b : j.at("box")) spec.box.push_back(b.get<long long>());
        else
            spec.box = {j.at("size").get<long long>()};
        spec.m = j.value("m", 1);
        spec.law = parse_law(j.value("law", std::string("rademacher")));
        return GeneratorSpec::mdep_ma(spec);
    }
    if (name == "ustat") {
        UStatSpec spec;
        spec.kernel = parse_kernel(j.value("kernel", std::string("sum")));
        spec.base = parse_law(j.value("base", std::string("rademacher")));
        spec.n = j.at("n").get<long long>();
        return GeneratorSpec::ustat(spec);
    }
    throw ConfigError("unknown registered generator '" + name + "'");
}

inline JointModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("model file '" + path + "': " + e.what());
    }
    try {
        if (j.contains("generator")) return joint_model_from_generator(generator_from_json(j));
        std::vector<VertexId> verts;
        for (const auto& v : j.at("vertices")) verts.push_back(detail::vertex_from_json(v));
        std::vector<std::pair<VertexId, VertexId>> edges;
        if (j.contains("edges"))
            for (const auto& e : j.at("edges")) {
                if (!e.is_array() || e.size() != 2)
                    throw ConfigError("model file: each edge needs two vertices");
                edges.emplace_back(detail::vertex_from_json(e[0]), detail::vertex_from_json(e[1]));
            }
        std::vector<Outcome> outs;
        for (const auto& o : j.at("outcomes")) {
            Outcome out;
            out.prob = o.at("p").get<double>();
            for (const auto& x : o.at("x")) out.x.push_back(x.get<double>());
            outs.push_back(std::move(out));
        }
        return JointModel(DependencyGraph::from_edge_list(edges, verts), std::move(outs));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("model file '" + path + "': " + e.what());
    }
}

}  // namespace localclt

#endif
