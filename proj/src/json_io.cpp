#include "sr/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sr/errors.hpp"

namespace sr {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw InputError(where + ": " + what);
}

// re-throw builder errors with the document location prepended
template <class Fn>
auto located(const std::string& where, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(where, "unknown field '" + it.key() + "'");
    }
}

double get_double(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

int get_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& v, const std::string& where) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        fail(where, "expected a nonnegative integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        fail(where, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

std::vector<double> double_array(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(get_double(e, where));
    return out;
}

std::vector<std::vector<double>> double_matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of rows");
    std::vector<std::vector<double>> out;
    out.reserve(v.size());
    for (const auto& row : v) out.push_back(double_array(row, where));
    for (const auto& row : out)
        if (row.size() != out.front().size()) fail(where, "rows must have equal length");
    return out;
}

std::vector<int> int_array(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of integers");
    std::vector<int> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(get_int(e, where));
    return out;
}

CondPmf cond_rows(const std::vector<std::vector<double>>& rows, const std::string& from,
                  const std::string& to) {
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.front().size());
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return CondPmf({Alphabet(static_cast<int>(rows.size()), from)},
                   {Alphabet(static_cast<int>(rows.front().size()), to)}, std::move(flat));
}

DistortionMatrix parse_distortion(const json& v, const std::string& where, int x_size) {
    if (v.is_string()) {
        if (v.get<std::string>() == "hamming") return DistortionMatrix::hamming(x_size);
        fail(where, "the only named measure is \"hamming\"");
    }
    const auto m = double_matrix(v, where);
    if (static_cast<int>(m.size()) != x_size) fail(where, "need one row per source symbol");
    std::vector<double> flat;
    flat.reserve(m.size() * m.front().size());
    for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
    return located(where, [&] {
        return DistortionMatrix(x_size, static_cast<int>(m.front().size()), std::move(flat));
    });
}

SourceSpec parse_source(const json& s) {
    const std::string where = "source";
    check_keys(s, where, {"px", "y_given_x", "z_given_x", "y_given_z", "distortions"});
    const auto px = double_array(require(s, "px", where), where + ".px");
    const int nx = static_cast<int>(px.size());

    DistortionMatrix dy1 = DistortionMatrix::hamming(nx);
    DistortionMatrix dz1 = dy1, dy2 = dy1, dz2 = dy1;
    if (s.contains("distortions")) {
        const json& d = s["distortions"];
        const std::string dw = where + ".distortions";
        check_keys(d, dw, {"dy1", "dz1", "dy2", "dz2"});
        if (d.contains("dy1")) dy1 = parse_distortion(d["dy1"], dw + ".dy1", nx);
        if (d.contains("dz1")) dz1 = parse_distortion(d["dz1"], dw + ".dz1", nx);
        if (d.contains("dy2")) dy2 = parse_distortion(d["dy2"], dw + ".dy2", nx);
        if (d.contains("dz2")) dz2 = parse_distortion(d["dz2"], dw + ".dz2", nx);
    }

    const bool cond_indep = s.contains("y_given_x");
    if (cond_indep == s.contains("y_given_z"))
        fail(where,
             "give exactly one of y_given_x (Y, Z independent given X) "
             "or y_given_z (X -> Z -> Y)");
    const auto zx = double_matrix(require(s, "z_given_x", where), where + ".z_given_x");
    if (static_cast<int>(zx.size()) != nx)
        fail(where + ".z_given_x", "need one row per source symbol");

    return located(where, [&]() -> SourceSpec {
        CondPmf z_given_x = cond_rows(zx, "X", "Z");
        if (cond_indep) {
            const auto yx = double_matrix(s["y_given_x"], where + ".y_given_x");
            if (static_cast<int>(yx.size()) != nx)
                fail(where + ".y_given_x", "need one row per source symbol");
            return make_source(px, cond_rows(yx, "X", "Y"), z_given_x, dy1, dz1, dy2, dz2);
        }
        const auto yz = double_matrix(s["y_given_z"], where + ".y_given_z");
        if (yz.size() != zx.front().size())
            fail(where + ".y_given_z", "need one row per Z symbol");
        return make_degraded_source(px, z_given_x, cond_rows(yz, "Z", "Y"), dy1, dz1, dy2,
                                    dz2);
    });
}

DistortionQuad parse_quad(const json& t, const std::string& where) {
    check_keys(t, where, {"dy1", "dz1", "dy2", "dz2"});
    DistortionQuad q; // absent keys stay unconstrained
    if (t.contains("dy1")) q.dy1 = get_double(t["dy1"], where + ".dy1");
    if (t.contains("dz1")) q.dz1 = get_double(t["dz1"], where + ".dz1");
    if (t.contains("dy2")) q.dy2 = get_double(t["dy2"], where + ".dy2");
    if (t.contains("dz2")) q.dz2 = get_double(t["dz2"], where + ".dz2");
    return q;
}

CausalAuxChannel parse_aux_causal(const json& a, int x_size) {
    const std::string where = "aux_causal";
    check_keys(a, where, {"w1_size", "w2_size", "rows"});
    const int w1 = get_int(require(a, "w1_size", where), where + ".w1_size");
    const int w2 = get_int(require(a, "w2_size", where), where + ".w2_size");
    const auto rows = double_matrix(require(a, "rows", where), where + ".rows");
    return located(where, [&] { return CausalAuxChannel::from_rows(x_size, w1, w2, rows); });
}

NcAuxChannel parse_aux_block(const json& a, int x_size) {
    const std::string where = "aux_block";
    check_keys(a, where, {"w1_size", "w2_size", "w3_size", "w4_size", "v_size", "rows"});
    const int w1 = get_int(require(a, "w1_size", where), where + ".w1_size");
    const int w2 = get_int(require(a, "w2_size", where), where + ".w2_size");
    const int w3 = get_int(require(a, "w3_size", where), where + ".w3_size");
    const int w4 = get_int(require(a, "w4_size", where), where + ".w4_size");
    const int v = get_int(require(a, "v_size", where), where + ".v_size");
    const auto rows = double_matrix(require(a, "rows", where), where + ".rows");
    return located(where,
                   [&] { return NcAuxChannel::from_rows(x_size, w1, w2, w3, w4, v, rows); });
}

StateChannel parse_channel(const json& c, const std::string& where) {
    check_keys(c, where, {"b_given_a", "b_given_as", "p_s", "rho"});
    double rho = 1.0;
    if (c.contains("rho")) rho = get_double(c["rho"], where + ".rho");

    const bool plain = c.contains("b_given_a");
    if (plain == c.contains("b_given_as"))
        fail(where, "give exactly one of b_given_a (stateless) or b_given_as with p_s");
    if (plain) {
        if (c.contains("p_s")) fail(where, "p_s only applies to b_given_as");
        const auto rows = double_matrix(c["b_given_a"], where + ".b_given_a");
        return located(where,
                       [&] { return StateChannel::stateless(cond_rows(rows, "A", "B"), rho); });
    }

    // nested rows: b_given_as[a][s] is a pmf over the output letters
    const json& w = c["b_given_as"];
    if (!w.is_array() || w.empty()) fail(where + ".b_given_as", "expected rows per input letter");
    std::vector<std::vector<std::vector<double>>> nested;
    nested.reserve(w.size());
    for (const auto& per_a : w) nested.push_back(double_matrix(per_a, where + ".b_given_as"));
    const std::size_t s_size = nested.front().size();
    const std::size_t b_size = nested.front().front().size();
    for (const auto& per_a : nested)
        if (per_a.size() != s_size || per_a.front().size() != b_size)
            fail(where + ".b_given_as", "all (input, state) cells must have the same shape");
    const auto ps = double_array(require(c, "p_s", where), where + ".p_s");
    if (ps.size() != s_size) fail(where + ".p_s", "state pmf length must match b_given_as");

    std::vector<double> flat;
    flat.reserve(nested.size() * s_size * b_size);
    for (const auto& per_a : nested)
        for (const auto& row : per_a) flat.insert(flat.end(), row.begin(), row.end());
    return located(where, [&] {
        CondPmf cond({Alphabet(static_cast<int>(nested.size()), "A"),
                      Alphabet(static_cast<int>(s_size), "S")},
                     {Alphabet(static_cast<int>(b_size), "B")}, std::move(flat));
        JointPmf state({Alphabet(static_cast<int>(s_size), "S")}, ps);
        return StateChannel(std::move(cond), std::move(state), rho);
    });
}

void parse_search_into(const json& s, SearchConfig& cfg) {
    const std::string where = "search";
    check_keys(s, where, {"restarts", "steps", "aux_cap", "dist_tol"});
    if (s.contains("restarts")) cfg.restarts = get_int(s["restarts"], where + ".restarts");
    if (s.contains("steps")) cfg.steps = get_int(s["steps"], where + ".steps");
    if (s.contains("aux_cap")) cfg.aux_cap = get_int(s["aux_cap"], where + ".aux_cap");
    if (s.contains("dist_tol")) cfg.dist_tol = get_double(s["dist_tol"], where + ".dist_tol");
}

void parse_sim_into(const json& s, SimConfig& cfg) {
    const std::string where = "sim";
    check_keys(s, where,
               {"n", "delta", "rate_margin", "trials", "codeword_cap", "scan_cap",
                "max_typical_retries"});
    if (s.contains("n")) cfg.n = get_int(s["n"], where + ".n");
    if (s.contains("delta")) cfg.delta = get_double(s["delta"], where + ".delta");
    if (s.contains("rate_margin"))
        cfg.rate_margin = get_double(s["rate_margin"], where + ".rate_margin");
    if (s.contains("trials")) cfg.trials = get_int(s["trials"], where + ".trials");
    if (s.contains("codeword_cap"))
        cfg.codeword_cap = get_u64(s["codeword_cap"], where + ".codeword_cap");
    if (s.contains("scan_cap")) cfg.scan_cap = get_u64(s["scan_cap"], where + ".scan_cap");
    if (s.contains("max_typical_retries"))
        cfg.max_typical_retries = get_int(s["max_typical_retries"], where + ".max_typical_retries");
}

// ---------- writers ----------

json rows_json(const CondPmf& c) {
    const std::size_t w = c.to_cells();
    json rows = json::array();
    for (std::size_t r = 0; r < c.from_cells(); ++r) {
        json row = json::array();
        for (std::size_t t = 0; t < w; ++t) row.push_back(c(r, t));
        rows.push_back(std::move(row));
    }
    return rows;
}

// finite entries only; a reload treats absent keys as unconstrained
json quad_json(const DistortionQuad& q) {
    json o = json::object();
    if (std::isfinite(q.dy1)) o["dy1"] = q.dy1;
    if (std::isfinite(q.dz1)) o["dz1"] = q.dz1;
    if (std::isfinite(q.dy2)) o["dy2"] = q.dy2;
    if (std::isfinite(q.dz2)) o["dz2"] = q.dz2;
    return o;
}

json causal_point_to_json(const CausalRegionPoint& pt) {
    json aux{{"x_size", pt.aux.x_size()},
             {"w1_size", pt.aux.w1_size()},
             {"w2_size", pt.aux.w2_size()},
             {"rows", rows_json(pt.aux.cond)}};
    json dec{{"g_y1", pt.decoders.g_y1},
             {"g_z1", pt.decoders.g_z1},
             {"g_y2", pt.decoders.g_y2},
             {"g_z2", pt.decoders.g_z2}};
    return json{{"r1", pt.r1},
                {"delta_r", pt.delta_r},
                {"achieved", quad_json(pt.achieved)},
                {"aux", std::move(aux)},
                {"decoders", std::move(dec)}};
}

json nc_point_to_json(const NcRegionPoint& pt) {
    json aux{{"x_size", pt.aux.x_size()},   {"w1_size", pt.aux.w1_size()},
             {"w2_size", pt.aux.w2_size()}, {"w3_size", pt.aux.w3_size()},
             {"w4_size", pt.aux.w4_size()}, {"v_size", pt.aux.v_size()},
             {"rows", rows_json(pt.aux.cond)}};
    json dec{{"g_y1", pt.decoders.g_y1},
             {"g_z1", pt.decoders.g_z1},
             {"g_y2", pt.decoders.g_y2},
             {"g_z2", pt.decoders.g_z2}};
    return json{{"r1", pt.r1},
                {"r2", pt.r2},
                {"achieved", quad_json(pt.achieved)},
                {"aux", std::move(aux)},
                {"decoders", std::move(dec)}};
}

// ---------- loaders ----------

json parse_document(const std::string& text, const std::string& what) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(what + ": " + e.what());
    }
    if (!root.is_object()) throw InputError(what + ": expected a JSON object");
    return root;
}

void check_schema_version(const json& doc, const std::string& where) {
    const int v = get_int(require(doc, "schema_version", where), where + ".schema_version");
    if (v != 1) fail(where, "unsupported schema_version " + std::to_string(v));
}

CausalRegionPoint parse_causal_point(const json& p, const std::string& where) {
    check_keys(p, where, {"r1", "delta_r", "achieved", "aux", "decoders"});
    CausalRegionPoint pt;
    pt.r1 = get_double(require(p, "r1", where), where + ".r1");
    pt.delta_r = get_double(require(p, "delta_r", where), where + ".delta_r");
    pt.achieved = parse_quad(require(p, "achieved", where), where + ".achieved");

    const json& a = require(p, "aux", where);
    const std::string aw = where + ".aux";
    check_keys(a, aw, {"x_size", "w1_size", "w2_size", "rows"});
    const int nx = get_int(require(a, "x_size", aw), aw + ".x_size");
    const int w1 = get_int(require(a, "w1_size", aw), aw + ".w1_size");
    const int w2 = get_int(require(a, "w2_size", aw), aw + ".w2_size");
    const auto rows = double_matrix(require(a, "rows", aw), aw + ".rows");
    pt.aux = located(aw, [&] { return CausalAuxChannel::from_rows(nx, w1, w2, rows); });

    const json& d = require(p, "decoders", where);
    const std::string dw = where + ".decoders";
    check_keys(d, dw, {"g_y1", "g_z1", "g_y2", "g_z2"});
    pt.decoders.g_y1 = int_array(require(d, "g_y1", dw), dw + ".g_y1");
    pt.decoders.g_z1 = int_array(require(d, "g_z1", dw), dw + ".g_z1");
    pt.decoders.g_y2 = int_array(require(d, "g_y2", dw), dw + ".g_y2");
    pt.decoders.g_z2 = int_array(require(d, "g_z2", dw), dw + ".g_z2");
    return pt;
}

NcRegionPoint parse_nc_point(const json& p, const std::string& where) {
    check_keys(p, where, {"r1", "r2", "achieved", "aux", "decoders"});
    NcRegionPoint pt;
    pt.r1 = get_double(require(p, "r1", where), where + ".r1");
    pt.r2 = get_double(require(p, "r2", where), where + ".r2");
    pt.achieved = parse_quad(require(p, "achieved", where), where + ".achieved");

    const json& a = require(p, "aux", where);
    const std::string aw = where + ".aux";
    check_keys(a, aw, {"x_size", "w1_size", "w2_size", "w3_size", "w4_size", "v_size", "rows"});
    const int nx = get_int(require(a, "x_size", aw), aw + ".x_size");
    const int w1 = get_int(require(a, "w1_size", aw), aw + ".w1_size");
    const int w2 = get_int(require(a, "w2_size", aw), aw + ".w2_size");
    const int w3 = get_int(require(a, "w3_size", aw), aw + ".w3_size");
    const int w4 = get_int(require(a, "w4_size", aw), aw + ".w4_size");
    const int v = get_int(require(a, "v_size", aw), aw + ".v_size");
    const auto rows = double_matrix(require(a, "rows", aw), aw + ".rows");
    pt.aux =
        located(aw, [&] { return NcAuxChannel::from_rows(nx, w1, w2, w3, w4, v, rows); });

    const json& d = require(p, "decoders", where);
    const std::string dw = where + ".decoders";
    check_keys(d, dw, {"g_y1", "g_z1", "g_y2", "g_z2"});
    pt.decoders.g_y1 = int_array(require(d, "g_y1", dw), dw + ".g_y1");
    pt.decoders.g_z1 = int_array(require(d, "g_z1", dw), dw + ".g_z1");
    pt.decoders.g_y2 = int_array(require(d, "g_y2", dw), dw + ".g_y2");
    pt.decoders.g_z2 = int_array(require(d, "g_z2", dw), dw + ".g_z2");
    return pt;
}

void check_table(const std::vector<int>& table, std::size_t want, int xhat_size,
                 const std::string& name) {
    if (table.size() != want)
        throw InputError("witness table " + name + " has " + std::to_string(table.size()) +
                         " entries, expected " + std::to_string(want));
    for (const int v : table)
        if (v < 0 || v >= xhat_size)
            throw InputError("witness table " + name + " holds symbol " + std::to_string(v) +
                             " outside the reconstruction alphabet");
}

} // namespace

ProblemFile parse_problem_text(const std::string& text, const std::string& name) {
    const json root = parse_document(text, name);
    check_keys(root, name, {"source", "target", "aux_causal", "aux_block", "channels",
                            "search", "sim"});
    ProblemFile pf;
    if (root.contains("source")) pf.source = parse_source(root["source"]);
    if (root.contains("target")) pf.target = parse_quad(root["target"], "target");
    if (root.contains("aux_causal")) {
        if (!pf.source) fail(name, "aux_causal needs a source section");
        pf.aux_causal = parse_aux_causal(root["aux_causal"], pf.source->x_size());
    }
    if (root.contains("aux_block")) {
        if (!pf.source) fail(name, "aux_block needs a source section");
        pf.aux_block = parse_aux_block(root["aux_block"], pf.source->x_size());
    }
    if (root.contains("channels")) {
        const json& c = root["channels"];
        check_keys(c, "channels", {"stage1", "stage2"});
        if (c.contains("stage1")) pf.channel1 = parse_channel(c["stage1"], "channels.stage1");
        if (c.contains("stage2")) pf.channel2 = parse_channel(c["stage2"], "channels.stage2");
    }
    if (root.contains("search")) parse_search_into(root["search"], pf.search);
    if (root.contains("sim")) parse_sim_into(root["sim"], pf.sim);
    return pf;
}

ProblemFile load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem_text(buf.str(), path);
}

std::string causal_witness_json(const CausalWitnessFile& w) {
    json pts = json::array();
    for (const auto& p : w.points) pts.push_back(causal_point_to_json(p));
    const json doc{{"schema_version", 1}, {"kind", w.kind}, {"points", std::move(pts)}};
    return doc.dump(2) + "\n";
}

CausalWitnessFile load_causal_witness(const std::string& text) {
    const std::string where = "witness";
    const json doc = parse_document(text, where);
    check_keys(doc, where, {"schema_version", "kind", "points"});
    check_schema_version(doc, where);
    CausalWitnessFile w;
    w.kind = get_string(require(doc, "kind", where), where + ".kind");
    if (w.kind != "region-causal") fail(where, "kind '" + w.kind + "' is not a causal witness");
    const json& pts = require(doc, "points", where);
    if (!pts.is_array()) fail(where + ".points", "expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i)
        w.points.push_back(
            parse_causal_point(pts[i], where + ".points[" + std::to_string(i) + "]"));
    return w;
}

std::string nc_witness_json(const NcWitnessFile& w) {
    json pts = json::array();
    for (const auto& p : w.points) pts.push_back(nc_point_to_json(p));
    const json doc{{"schema_version", 1}, {"kind", w.kind}, {"points", std::move(pts)}};
    return doc.dump(2) + "\n";
}

NcWitnessFile load_nc_witness(const std::string& text) {
    const std::string where = "witness";
    const json doc = parse_document(text, where);
    check_keys(doc, where, {"schema_version", "kind", "points"});
    check_schema_version(doc, where);
    NcWitnessFile w;
    w.kind = get_string(require(doc, "kind", where), where + ".kind");
    static const char* kKinds[] = {"inner",     "outer",       "z1-slack",
                                   "y2-static", "lossless-z1", "lossless-y2"};
    bool known = false;
    for (const char* k : kKinds) known = known || w.kind == k;
    if (!known) fail(where, "kind '" + w.kind + "' is not a block-coding witness");
    const json& pts = require(doc, "points", where);
    if (!pts.is_array()) fail(where + ".points", "expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i)
        w.points.push_back(parse_nc_point(pts[i], where + ".points[" + std::to_string(i) + "]"));
    return w;
}

void check_causal_point(const SourceSpec& source, const CausalRegionPoint& pt) {
    if (pt.aux.x_size() != source.x_size())
        throw InputError("witness aux |X| does not match the source");
    const std::size_t ny = static_cast<std::size_t>(source.y_size());
    const std::size_t nz = static_cast<std::size_t>(source.z_size());
    const std::size_t n1 = static_cast<std::size_t>(pt.aux.w1_size());
    const std::size_t n2 = static_cast<std::size_t>(pt.aux.w2_size());
    check_table(pt.decoders.g_y1, ny * n1, source.d_y1.xhat_size(), "g_y1");
    check_table(pt.decoders.g_z1, nz * n1, source.d_z1.xhat_size(), "g_z1");
    check_table(pt.decoders.g_y2, ny * n1 * n2, source.d_y2.xhat_size(), "g_y2");
    check_table(pt.decoders.g_z2, nz * n1 * n2, source.d_z2.xhat_size(), "g_z2");
}

void check_nc_point(const SourceSpec& source, const NcRegionPoint& pt) {
    if (pt.aux.x_size() != source.x_size())
        throw InputError("witness aux |X| does not match the source");
    const std::size_t ny = static_cast<std::size_t>(source.y_size());
    const std::size_t nz = static_cast<std::size_t>(source.z_size());
    const std::size_t n1 = static_cast<std::size_t>(pt.aux.w1_size());
    const std::size_t n2 = static_cast<std::size_t>(pt.aux.w2_size());
    const std::size_t n3 = static_cast<std::size_t>(pt.aux.w3_size());
    const std::size_t n4 = static_cast<std::size_t>(pt.aux.w4_size());
    const std::size_t nv = static_cast<std::size_t>(pt.aux.v_size());
    check_table(pt.decoders.g_y1, ny * n1, source.d_y1.xhat_size(), "g_y1");
    check_table(pt.decoders.g_z1, nz * n1 * n2 * nv, source.d_z1.xhat_size(), "g_z1");
    check_table(pt.decoders.g_y2, ny * n1 * n3 * nv, source.d_y2.xhat_size(), "g_y2");
    check_table(pt.decoders.g_z2, nz * n1 * n2 * n3 * n4 * nv, source.d_z2.xhat_size(),
                "g_z2");
}

std::string capacity_json(const CapacityResult& res, const std::string& mode) {
    json doc{{"schema_version", 1},
             {"kind", "capacity"},
             {"mode", mode},
             {"capacity", res.capacity},
             {"upper_bound", res.upper_bound},
             {"residual", res.residual},
             {"iterations", res.iterations},
             {"lower_bound_only", res.lower_bound_only},
             {"input", res.input}};
    if (!res.strategies.empty()) doc["strategies"] = res.strategies;
    if (!res.u_given_s.from_axes().empty()) {
        doc["u_given_s"] = json{{"rows", rows_json(res.u_given_s)}};
        doc["a_given_us"] = json{{"rows", rows_json(res.a_given_us)}};
    }
    return doc.dump(2) + "\n";
}

std::string separation_json(const SeparationResult& res) {
    json doc{{"schema_version", 1},
             {"kind", "separation"},
             {"achievable", res.achievable},
             {"rate1_budget", res.rate1_budget},
             {"rate2_budget", res.rate2_budget}};
    if (res.achievable) doc["witness"] = causal_point_to_json(res.witness);
    return doc.dump(2) + "\n";
}

std::string sim_report_json(const SimReport& rep, const std::string& scheme) {
    const SimConfig& c = rep.config;
    json cfg{{"n", c.n},
             {"delta", c.delta},
             {"effective_delta", c.effective_delta()},
             {"rate_margin", c.rate_margin},
             {"trials", c.trials},
             {"seed", c.seed},
             {"codeword_cap", c.codeword_cap},
             {"scan_cap", c.scan_cap},
             {"max_typical_retries", c.max_typical_retries},
             {"workers", c.workers}};
    auto tally = [](const DecodeTally& t) {
        return json{{"none_typical", t.none_typical},
                    {"ambiguous", t.ambiguous},
                    {"mismatch", t.mismatch}};
    };
    const json doc{{"schema_version", 1},
                   {"kind", "simulate"},
                   {"scheme", scheme},
                   {"config", std::move(cfg)},
                   {"trials", rep.trials},
                   {"trials_ok", rep.trials_ok},
                   {"encoder_events", rep.encoder_events},
                   {"y_side", tally(rep.y_side)},
                   {"z_side", tally(rep.z_side)},
                   {"empirical", quad_json(rep.empirical)}};
    return doc.dump(2) + "\n";
}

std::string consistency_json(const ConsistencyReport& rep) {
    const json doc{{"schema_version", 1},
                   {"kind", "consistency"},
                   {"samples", rep.samples},
                   {"r1_mismatches", rep.r1_mismatches},
                   {"dominance_violations", rep.dominance_violations},
                   {"max_r1_gap", rep.max_r1_gap},
                   {"min_r2_slack", rep.min_r2_slack},
                   {"max_markov_residual", rep.max_markov_residual}};
    return doc.dump(2) + "\n";
}

} // namespace sr
