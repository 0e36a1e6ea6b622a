#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bergman/error.hpp"
#include "bergman/measure.hpp"
#include "bergman/span.hpp"
#include "bergman/types.hpp"
#include "bergman/weight.hpp"

namespace bergman::harness {

using json = nlohmann::json;

/// Config problems, with the file position or field path in the message.
class config_error : public error {
public:
    using error::error;
};

struct DiskSpec {
    double radius = 1.0;
    int n_radial = 8;
    int n_angular = 16;
};

struct DiscreteSpec {
    std::vector<cplx> points;
    std::vector<double> masses;
};

using MeasureSpec = std::variant<DiskSpec, DiscreteSpec>;

struct MonomialSpec {
    int degree = 0;
};

struct TabulatedSpanSpec {
    CMatrix values;
};

using SpanSpec = std::variant<MonomialSpec, TabulatedSpanSpec>;

/// Either a closed-form family or explicit node values.
struct WeightSpec {
    std::optional<WeightFamily> family;
    RVector values;
};

enum class Check { structural, comparison, sweep, homotopy, tcz, maxprinciple };

inline const char* to_string(Check c) {
    switch (c) {
    case Check::structural: return "structural";
    case Check::comparison: return "comparison";
    case Check::sweep: return "sweep";
    case Check::homotopy: return "homotopy";
    case Check::tcz: return "tcz";
    case Check::maxprinciple: return "maxprinciple";
    }
    return "?";
}

struct Params {
    std::vector<double> c_grid{-2.0, -1.0, 0.0, 1.0, 2.0};
    std::vector<double> t_grid;  // empty: 11 equispaced points on [0, 1]
    std::vector<double> bound_taus{0.5, 0.1, 0.01};
    std::vector<double> fd_steps{1e-2, 1e-3, 1e-4};
    double fd_step = 1e-3;
    double fd_t = 0.5;
    std::vector<double> k_ladder{10.0, 20.0, 40.0};
    double degree_factor = 1.5;
    std::optional<double> interior_radius;  // default R/2
    double tcz_max_dev = 0.05;
    double tcz_slack = 0.1;
    std::vector<Index> omega;
    double rank_tol = 1e-12;
};

struct ScenarioConfig {
    std::string id;
    MeasureSpec measure;
    SpanSpec span;
    WeightSpec phi;
    WeightSpec psi;
    std::vector<Check> checks;
    Params params;
    std::uint64_t seed = 0;
};

inline QuadratureMeasure build_measure(const MeasureSpec& spec) {
    if (const auto* d = std::get_if<DiskSpec>(&spec)) return build_disk_measure(d->radius, d->n_radial, d->n_angular);
    const auto& s = std::get<DiscreteSpec>(spec);
    return build_discrete_measure(s.points, s.masses);
}

inline FunctionSpan build_span(const SpanSpec& spec) {
    if (const auto* m = std::get_if<MonomialSpec>(&spec)) return FunctionSpan::monomials(m->degree);
    return FunctionSpan::tabulated(std::get<TabulatedSpanSpec>(spec).values);
}

inline WeightFunction build_weight(const WeightSpec& spec, const QuadratureMeasure& measure) {
    if (spec.family) return eval_weight(*spec.family, measure);
    return eval_weight(WeightFunction(spec.values), measure);
}

// ---------------------------------------------------------------------------
// parsing

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw config_error("field '" + path + "': " + msg);
}

inline const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(join(path, key), "missing");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline long long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long long>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline cplx complex_pair(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [re, im]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline MeasureSpec parse_measure(const json& j, const std::string& path) {
    const std::string kind = [&] {
        const json& k = field(j, "kind", path);
        if (!k.is_string()) fail(join(path, "kind"), "expected a string");
        return k.get<std::string>();
    }();
    if (kind == "disk") {
        DiskSpec d;
        d.radius = number(field(j, "radius", path), join(path, "radius"));
        d.n_radial = static_cast<int>(integer(field(j, "n_radial", path), join(path, "n_radial")));
        d.n_angular = static_cast<int>(integer(field(j, "n_angular", path), join(path, "n_angular")));
        if (!(d.radius > 0.0)) fail(join(path, "radius"), "must be > 0");
        if (d.n_radial < 1) fail(join(path, "n_radial"), "must be >= 1");
        if (d.n_angular < 1) fail(join(path, "n_angular"), "must be >= 1");
        return d;
    }
    if (kind == "discrete") {
        DiscreteSpec d;
        const json& pts = field(j, "points", path);
        if (!pts.is_array() || pts.empty()) fail(join(path, "points"), "expected a nonempty array of [re, im]");
        for (std::size_t i = 0; i < pts.size(); ++i)
            d.points.push_back(complex_pair(pts[i], join(path, "points") + "[" + std::to_string(i) + "]"));
        d.masses = numbers(field(j, "masses", path), join(path, "masses"));
        if (d.masses.size() != d.points.size()) fail(join(path, "masses"), "length differs from points");
        for (std::size_t i = 0; i < d.masses.size(); ++i)
            if (!(d.masses[i] > 0.0)) fail(join(path, "masses") + "[" + std::to_string(i) + "]", "must be > 0");
        return d;
    }
    fail(join(path, "kind"), "unknown measure kind '" + kind + "' (expected disk or discrete)");
}

inline SpanSpec parse_span(const json& j, const std::string& path) {
    const json& k = field(j, "kind", path);
    if (!k.is_string()) fail(join(path, "kind"), "expected a string");
    const std::string kind = k.get<std::string>();
    if (kind == "monomials") {
        const long long d = integer(field(j, "degree", path), join(path, "degree"));
        if (d < 0) fail(join(path, "degree"), "must be >= 0");
        return MonomialSpec{static_cast<int>(d)};
    }
    if (kind == "tabulated") {
        const json& rows = field(j, "values", path);
        const std::string vp = join(path, "values");
        if (!rows.is_array() || rows.empty()) fail(vp, "expected a nonempty array of rows");
        const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
        if (cols == 0) fail(vp + "[0]", "expected a nonempty row of [re, im]");
        CMatrix v(static_cast<Index>(rows.size()), static_cast<Index>(cols));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::string rp = vp + "[" + std::to_string(r) + "]";
            if (!rows[r].is_array() || rows[r].size() != cols) fail(rp, "expected " + std::to_string(cols) + " entries");
            for (std::size_t c = 0; c < cols; ++c)
                v(Index(r), Index(c)) = complex_pair(rows[r][c], rp + "[" + std::to_string(c) + "]");
        }
        return TabulatedSpanSpec{std::move(v)};
    }
    fail(join(path, "kind"), "unknown span kind '" + kind + "' (expected monomials or tabulated)");
}

inline WeightSpec parse_weight(const json& j, const std::string& path) {
    const json& f = field(j, "family", path);
    if (!f.is_string()) fail(join(path, "family"), "expected a string");
    const std::string fam = f.get<std::string>();
    WeightSpec w;
    if (fam == "constant") {
        w.family = family::Constant{number(field(j, "c", path), join(path, "c"))};
    } else if (fam == "gauss") {
        w.family = family::Gauss{number(field(j, "a", path), join(path, "a"))};
    } else if (fam == "radial-poly") {
        w.family = family::RadialPoly{numbers(field(j, "coeffs", path), join(path, "coeffs"))};
    } else if (fam == "harmonic") {
        w.family = family::Harmonic{number(field(j, "b", path), join(path, "b"))};
    } else if (fam == "tabulated") {
        const auto v = numbers(field(j, "values", path), join(path, "values"));
        w.values = Eigen::Map<const RVector>(v.data(), Index(v.size()));
    } else {
        fail(join(path, "family"), "unknown weight family '" + fam + "'");
    }
    return w;
}

inline Check parse_check(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a check name");
    const std::string s = j.get<std::string>();
    for (const Check c : {Check::structural, Check::comparison, Check::sweep, Check::homotopy, Check::tcz, Check::maxprinciple})
        if (s == to_string(c)) return c;
    fail(path, "unknown check '" + s + "'");
}

inline Params parse_params(const json& j, const std::string& path) {
    Params p;
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = it.key();
        const std::string kp = join(path, key);
        const json& v = it.value();
        if (key == "c_grid") p.c_grid = numbers(v, kp);
        else if (key == "t_grid") p.t_grid = numbers(v, kp);
        else if (key == "bound_taus") p.bound_taus = numbers(v, kp);
        else if (key == "fd_steps") p.fd_steps = numbers(v, kp);
        else if (key == "fd_step") p.fd_step = number(v, kp);
        else if (key == "fd_t") p.fd_t = number(v, kp);
        else if (key == "k_ladder") p.k_ladder = numbers(v, kp);
        else if (key == "degree_factor") p.degree_factor = number(v, kp);
        else if (key == "interior_radius") p.interior_radius = number(v, kp);
        else if (key == "tcz_max_dev") p.tcz_max_dev = number(v, kp);
        else if (key == "tcz_slack") p.tcz_slack = number(v, kp);
        else if (key == "rank_tol") p.rank_tol = number(v, kp);
        else if (key == "omega") {
            if (!v.is_array()) fail(kp, "expected an array of node indices");
            for (std::size_t i = 0; i < v.size(); ++i) p.omega.push_back(static_cast<Index>(integer(v[i], kp + "[" + std::to_string(i) + "]")));
        } else fail(kp, "unknown parameter");
    }
    if (p.fd_step == 0.0) fail(join(path, "fd_step"), "must be nonzero");
    for (const double tau : p.bound_taus)
        if (!(std::abs(tau) <= 1.0) || tau == 0.0) fail(join(path, "bound_taus"), "entries must satisfy 0 < |tau| <= 1");
    if (!std::is_sorted(p.t_grid.begin(), p.t_grid.end())) fail(join(path, "t_grid"), "must be ordered");
    return p;
}

} // namespace detail

inline ScenarioConfig parse_scenario(const json& j, const std::string& path = "") {
    using namespace detail;
    ScenarioConfig s;
    const json& id = field(j, "id", path);
    if (!id.is_string() || id.get<std::string>().empty()) fail(join(path, "id"), "expected a nonempty string");
    s.id = id.get<std::string>();
    s.measure = parse_measure(field(j, "measure", path), join(path, "measure"));
    s.span = parse_span(field(j, "span", path), join(path, "span"));
    s.phi = parse_weight(field(j, "phi", path), join(path, "phi"));
    s.psi = j.contains("psi") ? parse_weight(j["psi"], join(path, "psi")) : s.phi;
    if (j.contains("checks")) {
        const json& cs = j["checks"];
        if (!cs.is_array()) fail(join(path, "checks"), "expected an array");
        for (std::size_t i = 0; i < cs.size(); ++i)
            s.checks.push_back(parse_check(cs[i], join(path, "checks") + "[" + std::to_string(i) + "]"));
    }
    if (j.contains("params")) s.params = parse_params(j["params"], join(path, "params"));
    if (j.contains("seed")) s.seed = static_cast<std::uint64_t>(integer(j["seed"], join(path, "seed")));
    for (const auto& key : j.items())
        if (!std::set<std::string>{"id", "measure", "span", "phi", "psi", "checks", "params", "seed"}.contains(key.key()))
            fail(join(path, key.key()), "unknown field");
    return s;
}

/// Accepts a single scenario object, an array of scenarios, or {"scenarios": [...]}.
inline std::vector<ScenarioConfig> parse_scenarios(const json& doc) {
    std::vector<ScenarioConfig> out;
    const json* list = &doc;
    std::string base;
    if (doc.is_object() && doc.contains("scenarios")) {
        list = &doc["scenarios"];
        base = "scenarios";
    }
    if (list->is_array()) {
        for (std::size_t i = 0; i < list->size(); ++i) out.push_back(parse_scenario((*list)[i], base + "[" + std::to_string(i) + "]"));
    } else {
        out.push_back(parse_scenario(*list, base));
    }
    std::set<std::string> ids;
    for (const auto& s : out)
        if (!ids.insert(s.id).second) throw config_error("duplicate scenario id '" + s.id + "'");
    return out;
}

/// Parses text, reporting syntax errors as line:column.
inline std::vector<ScenarioConfig> parse_scenarios_text(const std::string& text, const std::string& source = "<input>") {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw config_error(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error: " + e.what());
    }
    try {
        return parse_scenarios(doc);
    } catch (const config_error& e) {
        throw config_error(source + ": " + e.what());
    }
}

inline std::vector<ScenarioConfig> load_scenarios(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw config_error(file + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenarios_text(ss.str(), file);
}

// ---------------------------------------------------------------------------
// serialization (failure dumps round-trip through parse_scenario)

inline json to_json(const WeightSpec& w) {
    if (!w.family) return {{"family", "tabulated"}, {"values", std::vector<double>(w.values.data(), w.values.data() + w.values.size())}};
    struct {
        json operator()(const family::Constant& c) const { return {{"family", "constant"}, {"c", c.c}}; }
        json operator()(const family::Gauss& g) const { return {{"family", "gauss"}, {"a", g.a}}; }
        json operator()(const family::RadialPoly& p) const { return {{"family", "radial-poly"}, {"coeffs", p.coeffs}}; }
        json operator()(const family::Harmonic& h) const { return {{"family", "harmonic"}, {"b", h.b}}; }
    } visitor;
    return std::visit(visitor, *w.family);
}

inline json to_json(const ScenarioConfig& s) {
    json j;
    j["id"] = s.id;
    if (const auto* d = std::get_if<DiskSpec>(&s.measure)) {
        j["measure"] = {{"kind", "disk"}, {"radius", d->radius}, {"n_radial", d->n_radial}, {"n_angular", d->n_angular}};
    } else {
        const auto& m = std::get<DiscreteSpec>(s.measure);
        json pts = json::array();
        for (const cplx& z : m.points) pts.push_back({z.real(), z.imag()});
        j["measure"] = {{"kind", "discrete"}, {"points", pts}, {"masses", m.masses}};
    }
    if (const auto* m = std::get_if<MonomialSpec>(&s.span)) {
        j["span"] = {{"kind", "monomials"}, {"degree", m->degree}};
    } else {
        const auto& v = std::get<TabulatedSpanSpec>(s.span).values;
        json rows = json::array();
        for (Index r = 0; r < v.rows(); ++r) {
            json row = json::array();
            for (Index c = 0; c < v.cols(); ++c) row.push_back({v(r, c).real(), v(r, c).imag()});
            rows.push_back(row);
        }
        j["span"] = {{"kind", "tabulated"}, {"values", rows}};
    }
    j["phi"] = to_json(s.phi);
    j["psi"] = to_json(s.psi);
    json checks = json::array();
    for (const Check c : s.checks) checks.push_back(to_string(c));
    j["checks"] = checks;
    const Params& p = s.params;
    json params = {{"c_grid", p.c_grid},       {"bound_taus", p.bound_taus}, {"fd_steps", p.fd_steps},
                   {"fd_step", p.fd_step},     {"fd_t", p.fd_t},             {"k_ladder", p.k_ladder},
                   {"degree_factor", p.degree_factor}, {"tcz_max_dev", p.tcz_max_dev}, {"tcz_slack", p.tcz_slack},
                   {"rank_tol", p.rank_tol}};
    if (!p.t_grid.empty()) params["t_grid"] = p.t_grid;
    if (p.interior_radius) params["interior_radius"] = *p.interior_radius;
    if (!p.omega.empty()) params["omega"] = p.omega;
    j["params"] = params;
    j["seed"] = s.seed;
    return j;
}

} // namespace bergman::harness
