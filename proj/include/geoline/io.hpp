#pragma once

// Document serialization: JSON emitters with a fixed field order and numbers
// at 17 significant digits (lossless for doubles and byte-deterministic),
// nlohmann-based parsers with field diagnostics, and CSV writers for tabular
// sweeps. Parsing enforces document invariants; emitting the parse result
// reproduces the input bytes.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoline/core.hpp"
#include "geoline/geopolitics.hpp"
#include "geoline/migration.hpp"
#include "geoline/network.hpp"
#include "geoline/solver.hpp"
#include "geoline/trade.hpp"

namespace geoline {
namespace io {

inline constexpr int kSchemaVersion = 1;

// ===========================================================================
// Emission primitives
// ===========================================================================

/// One double, 17 significant digits: enough to round-trip any IEEE double.
inline std::string fmt17(double v) {
    if (!std::isfinite(v)) throw ValidationError("cannot serialize a non-finite number");
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

namespace detail {

/// Minimal deterministic JSON writer; fields appear in insertion order.
class Writer {
  public:
    Writer& object_begin() { return raw("{"); }
    Writer& object_end() { return raw("}"); }
    Writer& array_begin() { return raw("["); }
    Writer& array_end() { return raw("]"); }
    Writer& comma() { return raw(","); }
    Writer& key(const std::string& k) { return raw("\"" + json_escape(k) + "\":"); }
    Writer& value(double v) { return raw(fmt17(v)); }
    Writer& value(int v) { return raw(std::to_string(v)); }
    Writer& value(std::uint64_t v) { return raw(std::to_string(v)); }
    Writer& value(bool v) { return raw(v ? "true" : "false"); }
    Writer& value(const std::string& v) { return raw("\"" + json_escape(v) + "\""); }
    Writer& raw(const std::string& s) {
        out_ += s;
        return *this;
    }
    template <class T>
    Writer& field(const std::string& k, const T& v, bool first = false) {
        if (!first) comma();
        key(k);
        return value(v);
    }
    const std::string& str() const { return out_; }

  private:
    std::string out_;
};

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& field) {
    if (!j.is_object() || !j.contains(field))
        throw ValidationError("missing field '" + field + "'");
    return j.at(field);
}

inline double require_number(const nlohmann::json& j, const std::string& field) {
    const auto& v = require(j, field);
    if (!v.is_number()) throw ValidationError("field '" + field + "' must be a number");
    return v.get<double>();
}

inline bool require_bool(const nlohmann::json& j, const std::string& field) {
    const auto& v = require(j, field);
    if (!v.is_boolean()) throw ValidationError("field '" + field + "' must be a boolean");
    return v.get<bool>();
}

inline nlohmann::json parse_json(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace detail

// ===========================================================================
// PartitionDocument
// ===========================================================================

inline std::string to_json(const Partition& p) {
    detail::Writer w;
    w.object_begin();
    w.field("schema_version", kSchemaVersion, true);
    w.comma().key("params").object_begin();
    w.field("tau", p.params.tau, true)
        .field("h", p.params.h)
        .field("gamma", p.params.gamma)
        .field("alpha", p.params.alpha)
        .field("psi", p.params.psi)
        .field("eps_border", p.params.eps_border)
        .field("eps_size", p.params.eps_size)
        .field("fd_step", p.params.fd_step);
    w.object_end();
    w.field("h_eff", p.h_eff);
    w.field("n_interior", p.n_interior);
    w.field("truncated_at_accumulation", p.truncated_at_accumulation);
    w.comma().key("states").array_begin();
    for (std::size_t i = 0; i < p.states.size(); ++i) {
        const auto& s = p.states[i];
        if (i) w.comma();
        w.object_begin();
        w.field("index", s.index, true)
            .field("left", s.left)
            .field("right", s.right)
            .field("size", s.size)
            .field("remoteness", s.remoteness)
            .field("is_polar", s.is_polar);
        w.object_end();
    }
    w.array_end();
    w.object_end();
    return w.str() + "\n";
}

inline Partition partition_from_json(const std::string& text) {
    const nlohmann::json j = detail::parse_json(text);
    const auto& jp = detail::require(j, "params");
    Partition p;
    p.params.tau = detail::require_number(jp, "tau");
    p.params.h = detail::require_number(jp, "h");
    p.params.gamma = detail::require_number(jp, "gamma");
    p.params.alpha = detail::require_number(jp, "alpha");
    p.params.psi = detail::require_number(jp, "psi");
    p.params.eps_border = detail::require_number(jp, "eps_border");
    p.params.eps_size = detail::require_number(jp, "eps_size");
    p.params.fd_step = detail::require_number(jp, "fd_step");
    p.params.validate();
    p.h_eff = detail::require_number(j, "h_eff");
    p.n_interior = static_cast<int>(detail::require_number(j, "n_interior"));
    p.truncated_at_accumulation = detail::require_bool(j, "truncated_at_accumulation");

    const auto& js = detail::require(j, "states");
    if (!js.is_array() || js.empty()) throw ValidationError("states must be a non-empty array");
    double prev_right = -2.0;
    int interior_right = 0;
    for (const auto& e : js) {
        StateRecord s;
        s.index = static_cast<int>(detail::require_number(e, "index"));
        s.left = detail::require_number(e, "left");
        s.right = detail::require_number(e, "right");
        s.size = detail::require_number(e, "size");
        s.remoteness = detail::require_number(e, "remoteness");
        s.is_polar = detail::require_bool(e, "is_polar");
        if (!(s.left < s.right))
            throw ValidationError("state " + std::to_string(s.index) + ": left must be < right");
        if (!p.states.empty()) {
            if (!(s.left >= prev_right))
                throw ValidationError("states must have nondecreasing borders");
            if (std::fabs(s.left - prev_right) > 1e-12)
                throw ValidationError("states must tile [-1,1] without gaps");
        } else if (std::fabs(s.left - (-1.0)) > 1e-12) {
            throw ValidationError("first state must start at -1");
        }
        if (std::fabs(s.size - (s.right - s.left)) > 1e-12)
            throw ValidationError("state size must equal right - left");
        const double r = remoteness(s.left, s.right, p.params);
        if (std::fabs(s.remoteness - r) > 1e-9 * r)
            throw ValidationError("state remoteness inconsistent with its borders");
        if (!s.is_polar && s.index > 0) ++interior_right;
        prev_right = s.right;
        p.states.push_back(s);
    }
    if (std::fabs(prev_right - 1.0) > 1e-12)
        throw ValidationError("last state must end at 1");
    if (interior_right != p.n_interior)
        throw ValidationError("n_interior inconsistent with the states array");
    return p;
}

// ===========================================================================
// Network documents
// ===========================================================================

inline NetworkConfig network_config_from_json(const std::string& text) {
    const nlohmann::json j = detail::parse_json(text);
    NetworkConfig c;
    c.delta = detail::require_number(j, "delta");
    c.eta = detail::require_number(j, "eta");
    c.h = detail::require_number(j, "h");
    c.eps_max = detail::require_number(j, "eps_max");
    const auto& seed = detail::require(j, "seed");
    if (!seed.is_number_integer() && !seed.is_number_unsigned())
        throw ValidationError("field 'seed' must be an integer");
    c.seed = seed.get<std::uint64_t>();

    if (j.contains("nodes")) {
        std::vector<std::pair<std::string, std::pair<double, double>>> nodes;
        for (const auto& e : j.at("nodes")) {
            const auto& id = detail::require(e, "id");
            std::string name = id.is_string() ? id.get<std::string>() : id.dump();
            nodes.push_back(
                {name, {detail::require_number(e, "x"), detail::require_number(e, "y")}});
        }
        return make_network_config(std::move(nodes), c.delta, c.eta, c.h, c.eps_max, c.seed);
    }
    if (j.contains("distance_matrix")) {
        const auto& m = j.at("distance_matrix");
        if (!m.is_array()) throw ValidationError("distance_matrix must be an array of rows");
        for (const auto& row : m) {
            std::vector<double> r;
            for (const auto& v : row) r.push_back(v.get<double>());
            c.dist.push_back(std::move(r));
        }
        if (j.contains("ids")) {
            for (const auto& v : j.at("ids")) c.ids.push_back(v.get<std::string>());
        } else {
            for (std::size_t i = 0; i < c.dist.size(); ++i) c.ids.push_back(std::to_string(i));
        }
        c.has_positions = false;
        c.validate();
        return c;
    }
    throw ValidationError("network config needs either 'nodes' or 'distance_matrix'");
}

inline std::string to_json(const Graph& g, const NetworkConfig& c) {
    detail::Writer w;
    w.object_begin().key("edges").array_begin();
    bool first = true;
    for (const auto& [a, b] : g.edges) {
        if (!first) w.comma();
        first = false;
        w.array_begin().value(c.ids[a]).comma().value(c.ids[b]).array_end();
    }
    w.array_end().object_end();
    return w.str() + "\n";
}

inline Graph graph_from_json(const std::string& text, const NetworkConfig& c) {
    const nlohmann::json j = detail::parse_json(text);
    Graph g;
    g.n = c.size();
    auto index_of = [&](const std::string& id) {
        for (int i = 0; i < c.size(); ++i)
            if (c.ids[i] == id) return i;
        throw ValidationError("unknown node id '" + id + "' in graph");
    };
    for (const auto& e : detail::require(j, "edges")) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError("each edge must be a pair of node ids");
        const std::string a = e[0].is_string() ? e[0].get<std::string>() : e[0].dump();
        const std::string b = e[1].is_string() ? e[1].get<std::string>() : e[1].dump();
        const int ia = index_of(a), ib = index_of(b);
        if (ia == ib) throw ValidationError("self-loops are not allowed");
        g.add(ia, ib);
    }
    return g;
}

inline std::string to_json(const StabilityReport& r, const NetworkConfig& c) {
    detail::Writer w;
    w.object_begin();
    w.field("stable", r.stable, true);
    auto emit = [&](const char* name, const std::vector<PairMargin>& list) {
        w.comma().key(name).array_begin();
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i) w.comma();
            w.object_begin();
            w.field("i", c.ids[list[i].i], true)
                .field("j", c.ids[list[i].j])
                .field("margin", list[i].margin);
            w.object_end();
        }
        w.array_end();
    };
    emit("within_violations", r.within_violations);
    emit("between_violations", r.between_violations);
    w.object_end();
    return w.str() + "\n";
}

inline std::string to_json(const std::vector<GraphFrequency>& dist, std::uint64_t runs) {
    detail::Writer w;
    w.object_begin();
    w.field("runs", runs, true);
    w.comma().key("graphs").array_begin();
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (i) w.comma();
        w.object_begin();
        w.field("edges", dist[i].edges, true)
            .field("count", dist[i].count)
            .field("frequency", dist[i].frequency);
        w.object_end();
    }
    w.array_end().object_end();
    return w.str() + "\n";
}

// ===========================================================================
// Analysis documents
// ===========================================================================

inline std::string to_json(const TradeFlow& f, bool exact_selected) {
    detail::Writer w;
    w.object_begin();
    w.field("exporter", f.exporter, true)
        .field("importer", f.importer)
        .field("distance", f.distance)
        .field("x_newton", f.x_newton)
        .field("x_exact", f.x_exact)
        .field("value", exact_selected ? f.x_exact : f.x_newton);
    w.object_end();
    return w.str() + "\n";
}

inline std::string to_json(const MigrationResult& m) {
    detail::Writer w;
    w.object_begin();
    w.field("from_state", m.from_state, true)
        .field("to_state", m.to_state)
        .field("flow", m.flow)
        .field("phi_from", m.phi_from)
        .field("phi_to", m.phi_to)
        .field("residual", m.residual);
    w.object_end();
    return w.str() + "\n";
}

inline std::string to_json(const GravityDecomposition& d, const ParameterShock& shock, int m,
                           int n) {
    detail::Writer w;
    w.object_begin();
    w.field("parameter",
            std::string(shock.parameter == ParameterShock::Param::tau ? "tau" : "h"), true)
        .field("delta", shock.delta)
        .field("exporter", m)
        .field("importer", n)
        .field("size_effect", d.size_effect)
        .field("direct_effect", d.direct_effect)
        .field("location_effect", d.location_effect)
        .field("total", d.total);
    w.object_end();
    return w.str() + "\n";
}

inline std::string to_json(const EquilibriumAudit& a) {
    detail::Writer w;
    w.object_begin();
    w.field("grid_step", a.grid_step, true)
        .field("max_foc_residual", a.max_foc_residual)
        .field("passed", a.passed());
    w.comma().key("states").array_begin();
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const auto& s = a.states[i];
        if (i) w.comma();
        w.object_begin();
        w.field("index", s.index, true)
            .field("overlord_unimodality_ok", s.overlord_unimodality_ok)
            .field("locale_remoteness_minimal_ok", s.locale_remoteness_minimal_ok)
            .field("locale_violations", s.locale_violations);
        w.object_end();
    }
    w.array_end().object_end();
    return w.str() + "\n";
}

inline std::string to_json(const OpinionStats& st) {
    detail::Writer w;
    w.object_begin();
    w.field("mean", st.mean, true)
        .field("variance", st.variance)
        .field("n_per_hemisphere", st.n_per_hemisphere);
    w.comma().key("opinions").array_begin();
    bool first = true;
    for (const auto& [idx, g] : st.opinions) {
        if (!first) w.comma();
        first = false;
        w.object_begin();
        w.field("index", idx, true).field("g", g);
        w.object_end();
    }
    w.array_end().object_end();
    return w.str() + "\n";
}

inline std::string to_json(const VarianceSensitivity& v, const ParameterShock& shock) {
    detail::Writer w;
    w.object_begin();
    w.field("parameter",
            std::string(shock.parameter == ParameterShock::Param::tau ? "tau" : "h"), true)
        .field("delta", shock.delta)
        .field("d_var", v.d_var)
        .field("state_partials_ok", v.state_partials_ok);
    w.object_end();
    return w.str() + "\n";
}

// ===========================================================================
// CSV writers (column orders are documented in the CLI help text)
// ===========================================================================

inline std::string to_csv(const std::vector<TradeFlow>& flows) {
    std::string out = "exporter,importer,distance,x_newton,x_exact\n";
    for (const auto& f : flows)
        out += std::to_string(f.exporter) + "," + std::to_string(f.importer) + "," +
               fmt17(f.distance) + "," + fmt17(f.x_newton) + "," + fmt17(f.x_exact) + "\n";
    return out;
}

inline std::string to_csv(const ShockTable& t) {
    std::string out =
        "index,db_db0_fd,dS_db0_fd,dS_dbprev_analytic,db_db0_chain,F_b_positive\n";
    for (const auto& r : t.rows)
        out += std::to_string(r.index) + "," + fmt17(r.db_db0_fd) + "," + fmt17(r.dS_db0_fd) +
               "," + fmt17(r.dS_dbprev_analytic) + "," + fmt17(r.db_db0_chain) + "," +
               (r.F_b_positive ? "true" : "false") + "\n";
    return out;
}

inline std::string to_csv(const std::vector<SeparatismPoint>& pts) {
    std::string out = "index,t,sigma,overlap,ideal_left,ideal_right\n";
    for (const auto& p : pts)
        out += std::to_string(p.index) + "," + fmt17(p.t) + "," + fmt17(p.sigma) + "," +
               fmt17(p.overlap) + "," + fmt17(p.ideal_left) + "," + fmt17(p.ideal_right) + "\n";
    return out;
}

/// border,T_tilde rows for the border-effect profile.
inline std::string border_effect_csv(const std::vector<std::pair<double, double>>& rows) {
    std::string out = "b,T\n";
    for (const auto& [b, t] : rows) out += fmt17(b) + "," + fmt17(t) + "\n";
    return out;
}

/// index,f_tau,f_s,f_b,dSn_dbprev rows for per-state stability diagnostics.
inline std::string stability_csv(const Partition& p) {
    std::string out = "index,f_tau,f_s,f_b,dSn_dbprev\n";
    for (int n = 1; n <= p.n_interior; ++n) {
        const StateRecord& s = p.state(n);
        const FocPartials fp = foc_partials(s.left, s.right, p.params);
        out += std::to_string(n) + "," + fmt17(fp.f_tau) + "," + fmt17(fp.f_s) + "," +
               fmt17(fp.f_b) + "," + fmt17(-fp.f_b / fp.f_s) + "\n";
    }
    return out;
}

// ===========================================================================
// Files
// ===========================================================================

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << bytes;
    if (!out) throw ValidationError("failed writing '" + path + "'");
}

}  // namespace io
}  // namespace geoline
