#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>

namespace bcl::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) {
        fail(path, "expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail(path, "unknown key '" + key + "'");
        }
    }
}

const json* find(const json& j, const char* key)
{
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path)
{
    if (!j.is_number()) {
        fail(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        fail(path, "expected a finite number");
    }
    return v;
}

double number(const json& parent, const char* key, double fallback, const std::string& path)
{
    const json* j = find(parent, key);
    return j ? number(*j, path + "." + key) : fallback;
}

std::size_t count(const json& parent, const char* key, std::size_t fallback, const std::string& path, std::size_t min = 1)
{
    const json* j = find(parent, key);
    if (!j) {
        return fallback;
    }
    if (!j->is_number_integer() && !j->is_number_unsigned()) {
        fail(path + "." + key, "expected an integer");
    }
    const auto v = j->get<long long>();
    if (v < static_cast<long long>(min)) {
        fail(path + "." + key, "must be at least " + std::to_string(min));
    }
    return static_cast<std::size_t>(v);
}

std::string text(const json& parent, const char* key, const std::string& fallback, const std::string& path)
{
    const json* j = find(parent, key);
    if (!j) {
        return fallback;
    }
    if (!j->is_string()) {
        fail(path + "." + key, "expected a string");
    }
    return j->get<std::string>();
}

std::complex<double> complex_value(const json& j, const std::string& path)
{
    if (j.is_number()) {
        return number(j, path);
    }
    if (j.is_array() && j.size() == 2) {
        return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
    }
    fail(path, "expected a number or a [re, im] pair");
}

Point point_value(const json& j, int n, const std::string& path)
{
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        fail(path, "expected an array of " + std::to_string(n) + " complex entries");
    }
    Point p(n);
    for (int i = 0; i < n; ++i) {
        p(i) = complex_value(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    }
    return p;
}

Eigen::MatrixXcd matrix_value(const json& j, int n, const std::string& path)
{
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        fail(path, "expected " + std::to_string(n) + " rows");
    }
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        const Point row = point_value(j[static_cast<std::size_t>(i)], n, path + "[" + std::to_string(i) + "]");
        m.row(i) = row.transpose();
    }
    return m;
}

std::vector<double> number_list(const json& j, const std::string& path)
{
    if (!j.is_array()) {
        fail(path, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

const std::string& type_of(const json& j, const std::string& path)
{
    if (!j.is_object()) {
        fail(path, "expected an object");
    }
    const json* t = find(j, "type");
    if (!t || !t->is_string()) {
        fail(path, "missing string 'type'");
    }
    return t->get_ref<const std::string&>();
}

RadialWeight weight_spec(const json& j, int n, const std::string& path)
{
    const std::string& type = type_of(j, path);
    if (type == "standard") {
        check_keys(j, path, {"type", "alpha"});
        return RadialWeight(StandardAlpha{number(j, "alpha", 0.0, path)}, n);
    }
    if (type == "power-log") {
        check_keys(j, path, {"type", "alpha", "b"});
        return RadialWeight(PowerLog{number(j, "alpha", 0.0, path), number(j, "b", 0.0, path)}, n);
    }
    if (type == "tabulated") {
        check_keys(j, path, {"type", "r", "values", "tail_exponent"});
        Tabulated t;
        const json* r = find(j, "r");
        const json* v = find(j, "values");
        if (!r || !v) {
            fail(path, "tabulated weights need 'r' and 'values'");
        }
        t.r = number_list(*r, path + ".r");
        t.values = number_list(*v, path + ".values");
        if (const json* e = find(j, "tail_exponent")) {
            t.tail_exponent = number(*e, path + ".tail_exponent");
        }
        return RadialWeight(std::move(t), n);
    }
    fail(path + ".type", "unknown weight type '" + type + "'");
}

SymbolMap symbol_spec(const json& j, int n, const std::string& path)
{
    const std::string& type = type_of(j, path);
    if (type == "identity") {
        check_keys(j, path, {"type"});
        return SymbolMap::identity(n);
    }
    if (type == "dilation") {
        check_keys(j, path, {"type", "lambda"});
        const json* l = find(j, "lambda");
        if (!l) {
            fail(path, "dilation needs 'lambda'");
        }
        return SymbolMap::dilation(n, complex_value(*l, path + ".lambda"));
    }
    if (type == "affine") {
        check_keys(j, path, {"type", "A", "b"});
        const json* A = find(j, "A");
        if (!A) {
            fail(path, "affine map needs 'A'");
        }
        const json* b = find(j, "b");
        return SymbolMap(symbol::Affine{matrix_value(*A, n, path + ".A"),
                                        b ? point_value(*b, n, path + ".b") : Point(Point::Zero(n))},
                         n);
    }
    if (type == "automorphism") {
        check_keys(j, path, {"type", "a", "U"});
        const json* a = find(j, "a");
        if (!a) {
            fail(path, "automorphism needs 'a'");
        }
        const json* U = find(j, "U");
        return SymbolMap(symbol::Automorphism{point_value(*a, n, path + ".a"),
                                              U ? matrix_value(*U, n, path + ".U")
                                                : Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(n, n))},
                         n);
    }
    if (type == "composite") {
        check_keys(j, path, {"type", "maps"});
        const json* maps = find(j, "maps");
        if (!maps || !maps->is_array() || maps->empty()) {
            fail(path, "composite needs a nonempty 'maps' array");
        }
        std::vector<SymbolMap> parts;
        for (std::size_t i = 0; i < maps->size(); ++i) {
            parts.push_back(symbol_spec((*maps)[i], n, path + ".maps[" + std::to_string(i) + "]"));
        }
        return SymbolMap(symbol::Composite{std::move(parts)}, n);
    }
    fail(path + ".type", "unknown symbol type '" + type + "'");
}

WeightFactor factor_spec(const json& j, int n, const std::string& path)
{
    const std::string& type = type_of(j, path);
    if (type == "constant") {
        check_keys(j, path, {"type", "value"});
        const json* v = find(j, "value");
        return WeightFactor::constant(n, v ? complex_value(*v, path + ".value") : 1.0);
    }
    if (type == "linear") {
        check_keys(j, path, {"type", "c0", "coefficients"});
        const json* c0 = find(j, "c0");
        const json* cs = find(j, "coefficients");
        const std::complex<double> base = c0 ? complex_value(*c0, path + ".c0") : 0.0;
        const Point c = cs ? point_value(*cs, n, path + ".coefficients") : Point(Point::Zero(n));
        std::ostringstream d;
        d << "linear(" << base << ", " << c.transpose() << ")";
        return WeightFactor([base, c](const Point& z) { return base + (c.array() * z.array()).sum(); }, n, d.str());
    }
    fail(path + ".type", "unknown factor type '" + type + "'");
}

MeasurePtr measure_spec(const json& j, int n, const RadialWeight& omega, const std::string& path)
{
    const std::string& type = type_of(j, path);
    if (type == "zero") {
        check_keys(j, path, {"type"});
        return Measure::zero(n);
    }
    if (type == "weighted") {
        check_keys(j, path, {"type", "weight", "boundary_power", "scale"});
        const json* w = find(j, "weight");
        const RadialWeight base = w ? weight_spec(*w, n, path + ".weight") : omega;
        const double t = number(j, "boundary_power", 0.0, path);
        const double c = number(j, "scale", 1.0, path);
        if (!(c >= 0.0)) {
            fail(path + ".scale", "must be nonnegative");
        }
        if (t == 0.0 && c == 1.0) {
            return Measure::weighted(base);
        }
        std::ostringstream label;
        label << c << " (1-|z|)^" << t;
        return Measure::weighted(base, [t, c](const Point& z) { return c * std::pow(1.0 - z.norm(), t); }, label.str());
    }
    if (type == "sum") {
        check_keys(j, path, {"type", "parts"});
        const json* parts = find(j, "parts");
        if (!parts || !parts->is_array() || parts->empty()) {
            fail(path, "sum needs a nonempty 'parts' array");
        }
        std::vector<MeasurePtr> out;
        for (std::size_t i = 0; i < parts->size(); ++i) {
            out.push_back(measure_spec((*parts)[i], n, omega, path + ".parts[" + std::to_string(i) + "]"));
        }
        return Measure::sum(std::move(out));
    }
    if (type == "pushforward") {
        check_keys(j, path, {"type", "base", "map"});
        const json* b = find(j, "base");
        const json* m = find(j, "map");
        if (!b || !m) {
            fail(path, "pushforward needs 'base' and 'map'");
        }
        return Measure::pushforward(measure_spec(*b, n, omega, path + ".base"), symbol_spec(*m, n, path + ".map"));
    }
    if (type == "restriction") {
        check_keys(j, path, {"type", "base", "radius"});
        const json* b = find(j, "base");
        if (!b) {
            fail(path, "restriction needs 'base'");
        }
        const double R = number(j, "radius", 0.5, path);
        if (!(R > 0.0 && R <= 1.0)) {
            fail(path + ".radius", "must lie in (0, 1]");
        }
        std::ostringstream label;
        label << "|z| < " << R;
        return Measure::restriction(measure_spec(*b, n, omega, path + ".base"),
                                    [R](const Point& z) { return z.norm() < R; }, label.str());
    }
    fail(path + ".type", "unknown measure type '" + type + "'");
}

const json& section(const json& doc, const char* key)
{
    static const json empty = json::object();
    const json* j = find(doc, key);
    return j ? *j : empty;
}

}  // namespace

Scenario parse_scenario(const json& doc)
{
    check_keys(doc, "config",
               {"task", "description", "n", "p", "q", "r", "weight", "measure", "phi", "psi", "u", "v", "quadrature",
                "grid", "carleson", "probe", "audit", "lattice", "suite", "output"});
    Scenario sc;
    sc.task = text(doc, "task", "", "config");
    if (std::find(task_names().begin(), task_names().end(), sc.task) == task_names().end()) {
        fail("config.task", sc.task.empty() ? "missing" : "unknown task '" + sc.task + "'");
    }
    text(doc, "description", "", "config");

    const json& quad = section(doc, "quadrature");
    check_keys(quad, "config.quadrature", {"seed", "radial_nodes", "sphere_samples", "chunk", "shells", "mc_samples"});
    sc.seed = count(quad, "seed", 1, "config.quadrature", 0);
    const json& grid = section(doc, "grid");
    check_keys(grid, "config.grid", {"dyadic_depth", "directions"});
    const json& car = section(doc, "carleson");
    check_keys(car, "config.carleson", {"shells", "shell_samples", "inner_samples", "lattice_truncation"});
    const json& probe = section(doc, "probe");
    check_keys(probe, "config.probe", {"depth"});
    const json& aud = section(doc, "audit");
    check_keys(aud, "config.audit", {"s", "R", "N", "t0", "t_grid", "samples"});
    const json& lat = section(doc, "lattice");
    check_keys(lat, "config.lattice", {"truncation", "coverage_samples", "N", "M", "R_out"});
    const json& suite = section(doc, "suite");
    check_keys(suite, "config.suite", {"cases", "dimensions", "tube_samples"});
    const json& out = section(doc, "output");
    check_keys(out, "config.output", {"path", "format"});
    sc.output_path = text(out, "path", "", "config.output");
    sc.format = text(out, "format", "json", "config.output");
    if (sc.format != "json" && sc.format != "csv") {
        fail("config.output.format", "must be \"json\" or \"csv\"");
    }
    if (sc.format == "csv" && sc.task != "carleson-pq" && sc.task != "operator-check") {
        fail("config.output.format", "csv export covers mean profiles only (carleson-pq, operator-check)");
    }

    const std::size_t chunk = count(quad, "chunk", 256, "config.quadrature");
    sc.geometry.seed = sc.seed;
    sc.geometry.cases = count(suite, "cases", sc.geometry.cases, "config.suite");
    sc.geometry.tube_samples = count(suite, "tube_samples", sc.geometry.tube_samples, "config.suite");
    if (const json* d = find(suite, "dimensions")) {
        sc.geometry.dimensions.clear();
        for (double v : number_list(*d, "config.suite.dimensions")) {
            if (v != std::floor(v) || v < 1 || v > 7) {
                fail("config.suite.dimensions", "entries must be integers in [1, 7]");
            }
            sc.geometry.dimensions.push_back(static_cast<int>(v));
        }
    }
    if (sc.task == "geometry-suite") {
        for (const char* key : {"n", "p", "q", "r", "weight", "measure", "phi", "psi", "u", "v"}) {
            if (find(doc, key)) {
                fail(std::string("config.") + key, "not used by geometry-suite");
            }
        }
        return sc;
    }

    const double nn = number(doc, "n", 1.0, "config");
    if (nn != std::floor(nn) || nn < 1 || nn > 7) {
        fail("config.n", "must be an integer in [1, 7]");
    }
    const int n = static_cast<int>(nn);
    const double p = number(doc, "p", 2.0, "config");
    const double q = number(doc, "q", 2.0, "config");
    const double r = number(doc, "r", 0.5, "config");
    if (!(p > 0.0) || !(q > 0.0)) {
        fail("config", "p and q must be positive");
    }
    if (!(r > 0.0)) {
        fail("config.r", "must be positive");
    }
    const bool operator_task = sc.task == "operator-check" || sc.task == "compactness-probe" || sc.task == "audit-4.2";
    if (operator_task && !(r < 1.0)) {
        fail("config.r", "must lie in (0, 1) for operator tasks");
    }

    try {
        const json defaults_weight{{"type", "standard"}, {"alpha", 0.0}};
        const json* wj = find(doc, "weight");
        const RadialWeight omega = weight_spec(wj ? *wj : defaults_weight, n, "config.weight");
        const json* mj = find(doc, "measure");
        const MeasurePtr mu = mj ? measure_spec(*mj, n, omega, "config.measure") : Measure::weighted(omega);
        const json identity{{"type", "identity"}};
        const json one{{"type", "constant"}, {"value", 1.0}};
        const SymbolMap phi = symbol_spec(find(doc, "phi") ? doc["phi"] : identity, n, "config.phi");
        const SymbolMap psi = symbol_spec(find(doc, "psi") ? doc["psi"] : identity, n, "config.psi");
        const WeightFactor u = factor_spec(find(doc, "u") ? doc["u"] : one, n, "config.u");
        const WeightFactor v = factor_spec(find(doc, "v") ? doc["v"] : one, n, "config.v");
        sc.cfg.emplace(SymbolConfig{n, p, q, omega, mu, phi, psi, u, v, r});
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        fail("config", e.what());
    }
    SymbolConfig& cfg = *sc.cfg;

    cfg.polar.seed = sc.seed;
    cfg.polar.chunk = chunk;
    cfg.polar.sphere_samples = count(quad, "sphere_samples", cfg.polar.sphere_samples, "config.quadrature");
    cfg.polar.radial_nodes = count(quad, "radial_nodes", cfg.polar.radial_nodes, "config.quadrature");
    cfg.polar.shells = count(quad, "shells", cfg.polar.shells, "config.quadrature");
    if (cfg.polar.shells > 48) {
        fail("config.quadrature.shells", "at most 48 (deeper nodes round to 1)");
    }
    auto& cs = cfg.carleson;
    cs.mc = {count(quad, "mc_samples", cs.mc.samples, "config.quadrature"), sc.seed, chunk};
    cs.inner.chunk = chunk;
    cs.depth = static_cast<int>(count(grid, "dyadic_depth", static_cast<std::size_t>(cs.depth), "config.grid", 3));
    cs.directions = static_cast<int>(count(grid, "directions", static_cast<std::size_t>(cs.directions), "config.grid"));
    if (cs.depth > 30) {
        fail("config.grid.dyadic_depth", "at most 30");
    }
    cs.shells = static_cast<int>(count(car, "shells", static_cast<std::size_t>(cs.shells), "config.carleson", 3));
    if (cs.shells > 40) {
        fail("config.carleson.shells", "at most 40");
    }
    cs.shell_samples = count(car, "shell_samples", cs.shell_samples, "config.carleson");
    cs.inner.samples = count(car, "inner_samples", cs.inner.samples, "config.carleson");
    cs.lattice_truncation = number(car, "lattice_truncation", cs.lattice_truncation, "config.carleson");
    if (!(cs.lattice_truncation > 0.0 && cs.lattice_truncation <= 0.999)) {
        fail("config.carleson.lattice_truncation", "must lie in (0, 0.999]");
    }

    sc.probe_depth = static_cast<int>(count(probe, "depth", 10, "config.probe", 3));
    if (sc.probe_depth > 30) {
        fail("config.probe.depth", "at most 30");
    }

    sc.audit.s = number(aud, "s", sc.audit.s, "config.audit");
    sc.audit.R = number(aud, "R", sc.audit.R, "config.audit");
    sc.audit.N = number(aud, "N", sc.audit.N, "config.audit");
    sc.audit.t0 = number(aud, "t0", sc.audit.t0, "config.audit");
    if (const json* t = find(aud, "t_grid")) {
        sc.audit.ts = number_list(*t, "config.audit.t_grid");
    }
    sc.audit.mc = {count(aud, "samples", sc.audit.mc.samples, "config.audit"), sc.seed, chunk};

    sc.lattice.r = r;
    sc.lattice.n = n;
    sc.lattice.seed = sc.seed;
    sc.lattice.truncation = number(lat, "truncation", sc.lattice.truncation, "config.lattice");
    sc.lattice.coverage_samples = count(lat, "coverage_samples", sc.lattice.coverage_samples, "config.lattice");
    sc.lattice.N = number(lat, "N", sc.lattice.N, "config.lattice");
    sc.lattice.M = static_cast<int>(count(lat, "M", static_cast<std::size_t>(sc.lattice.M), "config.lattice", 0));
    sc.lattice.R_out = number(lat, "R_out", sc.lattice.R_out, "config.lattice");

    if (sc.task == "carleson-pq" && !(p <= q)) {
        fail("config", "carleson-pq requires p <= q");
    }
    if (sc.task == "carleson-qp" && !(q < p)) {
        fail("config", "carleson-qp requires q < p");
    }
    if (sc.format == "csv" && !(p <= q)) {
        fail("config.output.format", "csv export needs a mean profile (p <= q)");
    }
    if (operator_task) {
        try {
            validate(cfg);
        } catch (const std::exception& e) {
            fail("config", e.what());
        }
    }
    return sc;
}

}  // namespace bcl::cli
