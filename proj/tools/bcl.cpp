// bcl run <config.json> [--seed N] [--output PATH] [--verbose]
//
// Exit codes: 0 success, 1 runtime failure, 2 schema error, 3 every verdict inconclusive.

#include "scenario.hpp"

#include "bcl/version.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace bcl;
using bcl::cli::json;

namespace {

bool g_verbose = false;

void note(const std::string& msg)
{
    if (g_verbose) {
        std::cerr << "[bcl] " << msg << '\n';
    }
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json point_json(const Point& p)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        a.push_back(complex_json(p(i)));
    }
    return a;
}

json trend_json(const TrendFit& t) { return {{"slope", t.slope}, {"se", t.se}, {"points", t.points}}; }

json levels_json(const std::vector<LevelSummary>& levels)
{
    json a = json::array();
    for (const auto& l : levels) {
        a.push_back({{"k", l.k}, {"radius", l.radius}, {"value", l.value}, {"se", l.se}});
    }
    return a;
}

json profile_json(const MeanProfile& m)
{
    json rows = json::array();
    for (std::size_t i = 0; i < m.centers.size(); ++i) {
        const auto& v = m.values[i];
        rows.push_back({{"center", point_json(m.centers[i])},
                        {"radius", m.centers[i].norm()},
                        {"value", v.value},
                        {"se", v.se},
                        {"numerator", v.numerator},
                        {"denominator", v.denominator},
                        {"flagged", v.flagged}});
    }
    return {{"r", m.r}, {"s", m.s}, {"points", rows}};
}

json carleson_json(const CarlesonReport& c)
{
    json j{{"regime", c.regime}, {"r", c.r}, {"s", c.s}};
    if (c.regime == "p<=q") {
        j["profile"] = profile_json(c.profile);
        j["levels"] = levels_json(c.levels);
        j["sup"] = c.sup;
        j["sup_se"] = c.sup_se;
        j["sup_previous"] = c.sup_previous;
        j["tail"] = trend_json(c.tail);
    } else {
        j["integral"] = {{"value", c.integral},
                         {"se", c.integral_se},
                         {"shells", levels_json(c.integral_shells)},
                         {"tail", trend_json(c.integral_tail)},
                         {"finite", to_string(c.integral_finite)}};
        j["lattice"] = {{"sum", c.lattice_sum},
                        {"se", c.lattice_se},
                        {"points", c.lattice_points},
                        {"truncation_radius", c.truncation_radius},
                        {"shells", levels_json(c.lattice_shells)},
                        {"tail", trend_json(c.lattice_tail)},
                        {"finite", to_string(c.lattice_finite)}};
        j["paths_agree"] = c.paths_agree;
    }
    j["bounded"] = to_string(c.bounded);
    j["vanishing"] = to_string(c.vanishing);
    j["bounded_reason"] = c.bounded_reason;
    j["vanishing_reason"] = c.vanishing_reason;
    return j;
}

json operator_json(const OperatorReport& o)
{
    json battery = json::array();
    for (const auto& b : o.battery) {
        battery.push_back({{"label", b.label},
                           {"image_norm", b.image_norm},
                           {"image_se", b.image_se},
                           {"norm", b.norm},
                           {"norm_se", b.norm_se},
                           {"ratio", b.ratio},
                           {"ratio_se", b.ratio_se},
                           {"boundary_kernel", b.boundary_kernel}});
    }
    return {{"regime", o.regime},
            {"bounded", to_string(o.bounded)},
            {"vanishing", to_string(o.vanishing)},
            {"one_sided_agree", o.one_sided_agree},
            {"consistent", o.consistent},
            {"criterion",
             {{"two_sided", carleson_json(o.two_sided)},
              {"phi_sided", carleson_json(o.phi_sided)},
              {"psi_sided", carleson_json(o.psi_sided)}}},
            {"battery",
             {{"version", o.battery_version},
              {"lower_bound", o.battery_lower_bound},
              {"lower_bound_se", o.battery_lower_bound_se},
              {"kernel_trend", trend_json(o.kernel_trend)},
              {"kernel_diverging", o.kernel_diverging},
              {"entries", battery}}}};
}

json probe_json(const ProbeReport& p)
{
    json rows = json::array();
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        rows.push_back({{"radius", p.radii[i]}, {"value", p.values[i]}, {"se", p.se[i]}});
    }
    return {{"verdict", p.verdict}, {"used", p.used}, {"trend", trend_json(p.trend)}, {"sequence", rows}};
}

json audit_rows_json(const std::vector<AuditRow>& rows)
{
    json a = json::array();
    for (const auto& r : rows) {
        a.push_back({{"t", r.t},
                     {"numerator", r.numerator},
                     {"numerator_se", r.numerator_se},
                     {"denominator", r.denominator},
                     {"denominator_se", r.denominator_se},
                     {"ratio", r.ratio},
                     {"rejected_fraction", r.rejected_fraction}});
    }
    return a;
}

json audit_json(const AuditReport& a)
{
    return {{"s", a.s},
            {"R", a.R},
            {"N", a.N},
            {"t0", a.t0},
            {"C", a.C},
            {"C_doubled", a.C_doubled},
            {"drift", a.drift},
            {"violation", a.violation},
            {"rows", audit_rows_json(a.rows)},
            {"doubled", audit_rows_json(a.doubled)}};
}

json geometry_json(const std::vector<GeometryCaseSummary>& g)
{
    json a = json::array();
    for (const auto& s : g) {
        a.push_back({{"n", s.n},
                     {"cases", s.cases},
                     {"mobius_invariance_max", s.mobius_invariance_max},
                     {"involution_max", s.involution_max},
                     {"membership_checked", s.membership_checked},
                     {"membership_disagreements", s.membership_disagreements},
                     {"tube_samples", s.tube_samples},
                     {"tube_violations", s.tube_violations}});
    }
    return {{"dimensions", a}};
}

json weights_json(const WeightsSuiteReport& w)
{
    const auto& d = w.diagnostics;
    json kernel = json::array();
    for (std::size_t i = 0; i < w.kernel_radii.size(); ++i) {
        kernel.push_back({{"radius", w.kernel_radii[i]}, {"ratio", w.kernel_ratios[i]}});
    }
    return {{"diagnostics",
             {{"doubling_sup", d.doubling_sup},
              {"reverse_pair", {{"C", d.reverse_pair.C}, {"K", d.reverse_pair.K}}},
              {"lambda_est", d.lambda_est},
              {"beta_est", d.beta_est},
              {"regression_slope", d.regression_slope},
              {"C_upper", d.C_upper},
              {"C_lower", d.C_lower},
              {"lambda0", d.lambda0}}},
            {"doubling_radius", w.doubling_radius},
            {"doubling_ratio", w.doubling_ratio},
            {"twisted_ratio", {{"min", w.twisted_ratio_min}, {"max", w.twisted_ratio_max}}},
            {"kernel_integral", {{"slope", w.kernel_slope}, {"divergent", w.kernel_divergent}, {"ratios", kernel}}}};
}

json lattice_json(const LatticeSuiteReport& l)
{
    return {{"points", l.lattice.points.size()},
            {"r", l.lattice.r},
            {"truncation_radius", l.lattice.truncation_radius},
            {"coverage_samples", l.coverage_samples},
            {"coverage_misses", l.coverage_misses},
            {"min_pairwise_distance", l.min_pairwise_distance},
            {"quarter_disjoint", l.quarter_disjoint},
            {"multiplicity_bound", l.lattice.multiplicity_bound},
            {"interior_multiplicity", l.lattice.interior_multiplicity},
            {"packing_bound", l.lattice.packing_bound},
            {"multiplicity_within_packing", l.multiplicity_within_packing},
            {"decomposition",
             {{"points", l.decomposition_points},
              {"groups", l.decomposition_groups},
              {"partition", l.decomposition_partition},
              {"separated", l.decomposition_separated},
              {"blocked", l.decomposition_blocked}}}};
}

std::string profile_csv(const MeanProfile& m, int n)
{
    std::ostringstream out;
    out.precision(17);
    out << "index,radius";
    for (int i = 1; i <= n; ++i) {
        out << ",re_" << i << ",im_" << i;
    }
    out << ",value,se,flagged\n";
    for (std::size_t k = 0; k < m.centers.size(); ++k) {
        out << k << ',' << m.centers[k].norm();
        for (int i = 0; i < n; ++i) {
            out << ',' << m.centers[k](i).real() << ',' << m.centers[k](i).imag();
        }
        out << ',' << m.values[k].value << ',' << m.values[k].se << ',' << (m.values[k].flagged ? 1 : 0) << '\n';
    }
    return out.str();
}

void append(json& warnings, const std::vector<std::string>& more)
{
    for (const auto& w : more) {
        warnings.push_back(w);
    }
}

bool inconclusive(Verdict v) { return v == Verdict::Inconclusive; }

struct Outcome {
    json result;
    json warnings = json::array();
    bool all_inconclusive = false;
    std::string csv;
};

Outcome execute(const cli::Scenario& sc)
{
    Outcome o;
    if (sc.task == "geometry-suite") {
        note("geometry suite");
        o.result = geometry_json(geometry_suite(sc.geometry));
        return o;
    }
    const SymbolConfig& cfg = *sc.cfg;
    if (sc.task == "weights-suite") {
        note("weights suite");
        o.result = weights_json(weights_suite(cfg.omega));
    } else if (sc.task == "lattice-suite") {
        note("lattice suite");
        o.result = lattice_json(lattice_suite(sc.lattice));
    } else if (sc.task == "carleson-pq") {
        note("sup criterion on the boundary grid");
        const auto rep = carleson_pq(*cfg.mu, cfg.omega, cfg.p, cfg.q, cfg.r, cfg.carleson);
        o.result = carleson_json(rep);
        append(o.warnings, rep.warnings);
        o.all_inconclusive = inconclusive(rep.bounded) && inconclusive(rep.vanishing);
        o.csv = profile_csv(rep.profile, cfg.n);
    } else if (sc.task == "carleson-qp") {
        note("building lattice");
        LatticeOptions opt;
        opt.seed = sc.seed;
        opt.coverage_samples = 20000;
        const Lattice lat = build_lattice(cfg.r, cfg.carleson.lattice_truncation, cfg.n, opt);
        note("integral and lattice criteria over " + std::to_string(lat.points.size()) + " points");
        const auto rep = carleson_qp(*cfg.mu, cfg.omega, cfg.p, cfg.q, cfg.r, lat, cfg.carleson);
        o.result = carleson_json(rep);
        append(o.warnings, rep.warnings);
        o.all_inconclusive = inconclusive(rep.bounded) && inconclusive(rep.vanishing);
    } else if (sc.task == "operator-check") {
        note("operator check");
        const auto rep = operator_check(cfg);
        note("compactness probe");
        const auto probe = compactness_probe(cfg, radial_centers(cfg.n, sc.probe_depth));
        o.result = operator_json(rep);
        o.result["probe"] = probe_json(probe);
        append(o.warnings, rep.warnings);
        append(o.warnings, probe.warnings);
        o.all_inconclusive = inconclusive(rep.bounded) && inconclusive(rep.vanishing) && probe.verdict == "inconclusive";
        if (cfg.p <= cfg.q) {
            o.csv = profile_csv(rep.two_sided.profile, cfg.n);
        }
    } else if (sc.task == "compactness-probe") {
        note("compactness probe");
        const auto probe = compactness_probe(cfg, radial_centers(cfg.n, sc.probe_depth));
        o.result = probe_json(probe);
        append(o.warnings, probe.warnings);
        o.all_inconclusive = probe.verdict == "inconclusive";
    } else {
        note("inequality audit");
        const auto& a = sc.audit;
        const auto rep = audit_lemma_4_2(cfg, a.s, a.R, a.N, a.ts, a.t0, a.mc);
        o.result = audit_json(rep);
        append(o.warnings, rep.warnings);
    }
    return o;
}

int run(const std::string& path, std::optional<std::uint64_t> seed, std::string output)
{
    json doc;
    try {
        std::ifstream in(path);
        if (!in) {
            std::cerr << "bcl: cannot read " << path << '\n';
            return 2;
        }
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << "bcl: malformed JSON in " << path << ": " << e.what() << '\n';
        return 2;
    }
    if (seed && doc.is_object()) {
        doc["quadrature"]["seed"] = *seed;
    }
    cli::Scenario sc;
    try {
        sc = cli::parse_scenario(doc);
    } catch (const cli::SchemaError& e) {
        std::cerr << "bcl: schema error: " << e.what() << '\n';
        return 2;
    }
    if (output.empty()) {
        output = sc.output_path;
    }

    Outcome o;
    try {
        o = execute(sc);
    } catch (const std::exception& e) {
        std::cerr << "bcl: " << sc.task << " failed: " << e.what() << '\n';
        return 1;
    }

    std::string text;
    if (sc.format == "csv") {
        text = o.csv;
    } else {
        json report;
        report["schema"] = kReportSchema;
        report["version"] = kLibraryVersion;
        report["thresholds"] = thresholds::kVersion;
        report["task"] = sc.task;
        report["seed"] = sc.seed;
        report["config"] = doc;
        report["result"] = o.result;
        report["warnings"] = o.warnings;
        text = report.dump(2) + "\n";
    }
    if (output.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(output, std::ios::binary);
        f << text;
        if (!f) {
            std::cerr << "bcl: cannot write " << output << '\n';
            return 1;
        }
        note("report written to " + output);
    }
    return o.all_inconclusive ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Carleson-measure and composition-difference verifier"};
    app.require_subcommand(1);
    auto* cmd = app.add_subcommand("run", "Run a scenario file");
    std::string config, output;
    std::optional<std::uint64_t> seed;
    cmd->add_option("config", config, "Scenario JSON")->required();
    cmd->add_option("--seed", seed, "Override quadrature.seed");
    cmd->add_option("--output", output, "Report path (default: output.path, else stdout)");
    cmd->add_flag("--verbose", g_verbose, "Progress on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return run(config, seed, output);
}
