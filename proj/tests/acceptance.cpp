// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Criteria 7 to 9 drive the shipped scenario files through the command-line tool.

#include "bcl/suites.hpp"
#include "bcl/verifier.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace bcl;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- harness

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int g_failures = 0;

void criterion(int id, const char* title, const std::function<void(Check&)>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s |%s (%.1f s)\n", c.ok ? "PASS" : "FAIL", id, title, c.detail.str().c_str(), secs);
    std::fflush(stdout);
    g_failures += c.ok ? 0 : 1;
}

Point along_e1(int n, double t)
{
    Point p = Point::Zero(n);
    p(0) = t;
    return p;
}

// ||K_a^s||^2 in A^2 of the disc: sum_k ((s)_k / k!)^2 |a|^{2k} / (k+1).
double kernel_series(double s, double x)
{
    double coef = 1.0, sum = 0.0, xk = 1.0;
    for (int k = 0; k < 400000; ++k) {
        const double term = coef * coef * xk / (k + 1.0);
        sum += term;
        if (term < 1e-17 * sum && k > 10) {
            break;
        }
        coef *= (s + k) / (k + 1.0);
        xk *= x * x;
    }
    return sum;
}

// Least-squares slope of log y against log(1 - x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = std::log(1.0 - x[i]), v = std::log(y[i]);
        sx += u;
        sy += v;
        sxx += u * u;
        sxy += u * v;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// Lexicographically first assignment into M+1 groups in which every point is compatible
// with the earlier members of its group, by exhaustive enumeration.
std::optional<std::vector<int>> first_valid_assignment(const std::vector<Point>& seq, double N, double r, int M,
                                                       double R_out)
{
    const int groups = M + 1;
    const std::size_t L = seq.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < L; ++i) {
        total *= static_cast<std::size_t>(groups);
    }
    std::vector<int> g(L, 0);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = L; i-- > 0;) {
            g[i] = static_cast<int>(c % groups);
            c /= groups;
        }
        bool ok = true;
        for (std::size_t x = 0; x < L && ok; ++x) {
            for (std::size_t y = 0; y < x && ok; ++y) {
                if (g[x] != g[y]) {
                    continue;
                }
                const double delta = 1.0 - seq[y].norm();
                const auto basis = frame_for(seq[y]);
                for (Eigen::Index j = 0; j < seq[y].size() && ok; ++j) {
                    Point p = (1.0 - N * N * delta) * basis.col(0);
                    if (j > 0) {
                        p += N * std::sqrt(delta) * basis.col(j);
                    }
                    ok = bergman_distance(seq[x], p) >= r;
                }
                ok = ok && bergman_distance(seq[x], seq[y]) >= R_out;
            }
        }
        if (ok) {
            return g;
        }
    }
    return std::nullopt;
}

MeasurePtr radial_density(const RadialWeight& w, double e)
{
    return Measure::weighted(w, [e](const Point& z) { return std::pow(1.0 - z.norm(), e); });
}

// ---------------------------------------------------------------- CLI driver

fs::path out_dir() { return fs::path(BCL_ACCEPTANCE_OUT); }

struct CliRun {
    int exit_code = -1;
    std::string text;
    json report;
};

CliRun run_cli(const std::string& scenario, int workers, const std::string& tag)
{
    fs::create_directories(out_dir());
    const fs::path out = out_dir() / (tag + ".json");
    fs::remove(out);
    std::ostringstream cmd;
    cmd << "BCL_WORKERS=" << workers << " '" << BCL_CLI << "' run '" << (fs::path(BCL_SCENARIOS) / scenario).string()
        << "' --output '" << out.string() << "'";
    const int status = std::system(cmd.str().c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    r.text = buf.str();
    if (!r.text.empty()) {
        r.report = json::parse(r.text);
    }
    return r;
}

std::string fmt(double x)
{
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
}

// ---------------------------------------------------------------- criteria

void geometry_invariants(Check& c)
{
    const auto summaries = geometry_suite();  // 10^4 cases per n in {1, 2, 3}
    for (const auto& s : summaries) {
        c.require(s.cases >= 10000, "case count");
        c.require(s.mobius_invariance_max <= 1e-9, "Mobius invariance n=" + std::to_string(s.n));
        c.require(s.involution_max <= 1e-9, "involution n=" + std::to_string(s.n));
        c.require(s.membership_disagreements == 0, "ellipsoid membership n=" + std::to_string(s.n));
        c.require(s.tube_violations == 0, "tube containment n=" + std::to_string(s.n));
        c.detail << " n=" << s.n << ": mobius " << fmt(s.mobius_invariance_max) << ", involution "
                 << fmt(s.involution_max) << ", membership " << s.membership_disagreements << "/"
                 << s.membership_checked << ", tube " << s.tube_violations << "/" << s.tube_samples << ";";
    }
    // Scalar oracle in the disc: rho(a, z) = |(a - z) / (1 - conj(a) z)|.
    Rng rng(404);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Point a = 0.98 * sample_ball(rng, 1);
        const Point z = 0.98 * sample_ball(rng, 1);
        const double oracle = std::abs((a(0) - z(0)) / (1.0 - std::conj(a(0)) * z(0)));
        worst = std::max(worst, std::abs(pseudo_distance(a, z) - oracle));
    }
    c.require(worst <= 1e-9, "disc oracle");
    c.detail << " disc oracle " << fmt(worst);
}

void weight_properties(Check& c)
{
    constexpr double kRatioBound = 4.0;  // declared C for hat W / hat omega
    for (double alpha : {0.0, 1.0, 2.0}) {
        const auto rep = weights_suite(RadialWeight::standard(alpha, 1));
        const double expected = std::exp2(alpha + 1.0);
        c.require(std::abs(rep.doubling_ratio / expected - 1.0) < 0.02, "doubling ratio alpha=" + fmt(alpha));
        c.require(rep.twisted_ratio_min >= 1.0 / kRatioBound && rep.twisted_ratio_max <= kRatioBound,
                  "hat W / hat omega alpha=" + fmt(alpha));
        c.detail << " alpha " << alpha << ": doubling " << fmt(rep.doubling_ratio) << " vs " << expected << ", W ratio ["
                 << fmt(rep.twisted_ratio_min) << ", " << fmt(rep.twisted_ratio_max) << "]";
        // Kernel-integral flatness on |a| in [0.5, 0.99], n = 1, two exponents above lambda0.
        const auto& d = rep.diagnostics;
        for (double extra : {0.25, 0.5}) {
            std::vector<double> radii, ratios;
            bool bad = false;
            for (int i = 0; i < 9; ++i) {
                const double t = 1.0 - 0.5 * std::pow(0.02, i / 8.0);
                const auto k = kernel_integral(RadialWeight::standard(alpha, 1), along_e1(1, t), d.lambda0 + extra, 0.0, d);
                bad = bad || k.divergent || k.out_of_theory;
                radii.push_back(t);
                ratios.push_back(k.value / k.proxy);
            }
            const double slope = loglog_slope(radii, ratios);
            c.require(!bad && std::abs(slope) < 0.1, "kernel flatness alpha=" + fmt(alpha) + " extra=" + fmt(extra));
            c.detail << ", flat(" << extra << ") " << fmt(slope);
        }
        c.detail << ";";
    }
    // For information: n = 2 flatness close to the sphere.
    const auto w2 = RadialWeight::standard(0.0, 2);
    const auto d2 = doubling_diagnostics(w2);
    std::vector<double> radii, ratios;
    for (int i = 0; i < 7; ++i) {
        const double t = 1.0 - 0.1 * std::pow(0.01, i / 6.0);
        const auto k = kernel_integral(w2, along_e1(2, t), d2.lambda0 + 0.25, 0.0, d2);
        radii.push_back(t);
        ratios.push_back(k.value / k.proxy);
    }
    c.detail << " (info: n=2 slope on [0.9, 0.999] " << fmt(loglog_slope(radii, ratios)) << ")";
}

void kernel_norms(Check& c)
{
    const auto w0 = RadialWeight::standard(0.0, 1);
    for (double s : {2.0, 1.75}) {
        for (double t : {0.5, 0.9, 0.99}) {
            const NormResult nr = bergman_norm(HoloFunction::kernel_power(along_e1(1, t), s), w0, 2.0);
            const double oracle = std::sqrt(kernel_series(s, t));
            c.require(std::abs(nr.value - oracle) <= 3.0 * nr.se, "series agreement s=" + fmt(s) + " |a|=" + fmt(t));
            c.require(nr.se < 0.02 * nr.value, "precision s=" + fmt(s) + " |a|=" + fmt(t));
            c.detail << " s=" << s << " |a|=" << t << ": " << fmt(nr.value) << " +- " << fmt(nr.se) << " vs " << fmt(oracle);
            if (s == 2.0) {
                // ||K_a^s||^2 against hat omega(|a|) / (1 - |a|)^{2s - 1}
                const double proxy = w0.hat(t) / std::pow(1.0 - t, 2.0 * s - 1.0);
                const double ratio = nr.value * nr.value / proxy;
                c.require(ratio > 0.2 && ratio < 1.0, "kernel-norm proxy |a|=" + fmt(t));
                c.detail << " (proxy ratio " << fmt(ratio) << ")";
            }
            c.detail << ";";
        }
    }
}

void norm_equivalence(Check& c)
{
    constexpr double kC = 4.0;  // declared equivalence constant
    const std::vector<RadialWeight> weights{RadialWeight::standard(1.0, 1), RadialWeight::standard(2.0, 1),
                                            RadialWeight(PowerLog{0.5, 1.0}, 1)};
    PolarSettings ps;
    ps.sphere_samples = 1024;
    double lo = 1e300, hi = 0.0;
    std::size_t count = 0;
    for (std::size_t wi = 0; wi < weights.size(); ++wi) {
        const auto& w = weights[wi];
        const RadialWeight W = twisted_weight(w);
        for (double p : {1.0, 2.0, 4.0}) {
            const auto bat = battery(1, w, p);
            c.require(bat.size() >= 20, "battery size");
            for (std::size_t i = 0; i < bat.size(); ++i) {
                ps.seed = derive_seed(17, 1000 * wi + 10 * static_cast<std::size_t>(p) + i);
                const auto norms = bergman_norms(bat[i].f, {w, W}, {p}, ps);
                const double ratio = norms[0][0].value / norms[1][0].value;
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
                ++count;
            }
        }
    }
    c.require(lo >= 1.0 / kC && hi <= kC, "ratio outside [1/C, C]");
    c.detail << " " << count << " (function, weight, p) cases, ratio in [" << fmt(lo) << ", " << fmt(hi) << "], C = " << kC;
}

void lattice_properties(Check& c)
{
    for (int n : {1, 2}) {
        LatticeSuiteSettings s;
        s.n = n;
        s.r = 0.6;
        s.truncation = n == 1 ? 0.9 : 0.7;
        s.coverage_samples = 100000;
        const auto rep = lattice_suite(s);
        const std::string tag = " n=" + std::to_string(n);
        c.require(rep.coverage_misses == 0, "coverage" + tag);
        c.require(rep.quarter_disjoint, "r/4 disjointness" + tag);
        c.require(rep.multiplicity_within_packing, "multiplicity" + tag);
        c.require(!rep.decomposition_blocked && rep.decomposition_partition && rep.decomposition_separated,
                  "decomposition" + tag);
        c.detail << tag << ": " << rep.lattice.points.size() << " points, misses " << rep.coverage_misses << "/"
                 << rep.coverage_samples << ", min distance " << fmt(rep.min_pairwise_distance) << ", overlap "
                 << rep.lattice.multiplicity_bound << " <= " << fmt(rep.lattice.packing_bound) << ", decomposition "
                 << rep.decomposition_points << " points into " << rep.decomposition_groups << " groups;";
    }
    Rng rng(21);
    int compared = 0, decomposed = 0, mismatched = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 2;
        const std::size_t L = 2 + static_cast<std::size_t>(trial % 3);
        std::vector<Point> seq;
        for (std::size_t i = 0; i < L; ++i) {
            Point a = along_e1(n, 1.0);
            a += 0.05 * sample_sphere(rng, n);
            seq.push_back((0.9 + 0.09 * rng.uniform()) * a / a.norm());
        }
        const double N = 1.0 + rng.uniform();
        const double r = 0.05 + 0.5 * rng.uniform();
        const int M = trial % 3;
        const double R_out = 0.1 + 1.5 * rng.uniform();
        const auto oracle = first_valid_assignment(seq, N, r, M, R_out);
        ++compared;
        try {
            const auto d = decompose_separated(seq, N, r, M, R_out);
            ++decomposed;
            bool same = oracle.has_value() && d.groups.size() == static_cast<std::size_t>(M + 1);
            for (std::size_t g = 0; same && g < d.groups.size(); ++g) {
                for (std::size_t i : d.groups[g]) {
                    same = same && (*oracle)[i] == static_cast<int>(g);
                }
            }
            mismatched += same ? 0 : 1;
        } catch (const DecompositionError&) {
            mismatched += oracle.has_value() ? 1 : 0;
        }
    }
    c.require(mismatched == 0 && decomposed > 0, "exhaustive oracle");
    c.detail << " oracle: " << compared << " inputs, " << decomposed << " decomposed, " << mismatched << " mismatches";
}

void carleson_evaluators(Check& c)
{
    const auto w = RadialWeight::standard(0.0, 1);
    struct Family {
        const char* name;
        double e;
        Verdict bounded, vanishing;
    };
    const Family families[] = {{"omega", 0.0, Verdict::Yes, Verdict::No},
                               {"(1-|z|) omega", 1.0, Verdict::Yes, Verdict::Yes},
                               {"(1-|z|)^-1/4 omega", -0.25, Verdict::No, Verdict::No}};
    for (double r : {0.5, 1.0, 1.5}) {
        for (const auto& f : families) {
            const auto rep = carleson_pq(*radial_density(w, f.e), w, 2.0, 2.0, r);
            c.require(rep.bounded == f.bounded && rep.vanishing == f.vanishing,
                      std::string("p<=q ") + f.name + " r=" + fmt(r));
        }
    }
    c.detail << " p<=q: three families match at r = 0.5, 1, 1.5;";

    int disagreements = 0, wrong = 0;
    for (double r : {0.5, 1.0, 1.5}) {
        LatticeOptions opt;
        opt.coverage_samples = 20000;
        const Lattice lat = build_lattice(r, 0.995, 1, opt);
        c.detail << " r=" << r << " (" << lat.points.size() << " points):";
        for (double t : {-0.9, -0.75, -0.25, 0.0, 0.5}) {
            const auto rep = carleson_qp(*radial_density(w, t), w, 2.0, 1.0, r, lat);
            disagreements += rep.paths_agree ? 0 : 1;
            const Verdict expected = t > -0.5 ? Verdict::Yes : Verdict::No;
            wrong += rep.bounded == expected ? 0 : 1;
            c.detail << " t=" << t << " " << to_string(rep.integral_finite) << "/" << to_string(rep.lattice_finite);
        }
        c.detail << ";";
        const auto zero = carleson_qp(*Measure::zero(1), w, 2.0, 1.0, r, lat);
        const auto flat = carleson_qp(*Measure::weighted(w), w, 2.0, 1.0, r, lat);
        c.require(zero.bounded == Verdict::Yes && zero.integral == 0.0 && zero.lattice_sum == 0.0, "q<p zero");
        c.require(flat.bounded == Verdict::Yes, "q<p omega");
    }
    c.require(disagreements == 0, "paths (iii) and (iv) disagree");
    c.require(wrong == 0, "q<p verdicts against the critical exponent -1/2");
}

CliRun g_zero, g_dilation, g_dilation_qp;

void operator_level(Check& c)
{
    g_zero = run_cli("zero-operator.json", 2, "zero-operator");
    g_dilation = run_cli("dilation.json", 2, "dilation");
    g_dilation_qp = run_cli("dilation-qp.json", 2, "dilation-qp");
    for (const auto* r : {&g_zero, &g_dilation, &g_dilation_qp}) {
        c.require(r->exit_code == 0 && !r->report.is_null(), "CLI run");
    }
    if (!c.ok) {
        return;
    }
    const json& z = g_zero.report["result"];
    bool probe_zero = true;
    for (const auto& row : z["probe"]["sequence"]) {
        probe_zero = probe_zero && row["value"].get<double>() == 0.0;
    }
    c.require(z["bounded"] == "yes" && z["vanishing"] == "yes", "zero operator verdicts");
    c.require(z["battery"]["lower_bound"].get<double>() == 0.0 && probe_zero, "zero operator battery and probe");
    c.detail << " zero: " << z["bounded"].get<std::string>() << "/" << z["vanishing"].get<std::string>()
             << ", battery 0, probe 0;";

    const json& d = g_dilation.report["result"];
    c.require(d["bounded"] == "yes" && d["vanishing"] == "no", "dilation verdicts");
    c.require(d["one_sided_agree"].get<bool>() && d["consistent"].get<bool>(), "dilation consistency");
    c.require(d["probe"]["verdict"] == "refutes compactness", "dilation probe");
    double klo = 1e300, khi = 0.0;
    for (const auto& e : d["battery"]["entries"]) {
        if (e["boundary_kernel"].get<bool>()) {
            klo = std::min(klo, e["ratio"].get<double>());
            khi = std::max(khi, e["ratio"].get<double>());
        }
    }
    c.require(klo > 0.25 && khi < 4.0, "boundary kernel ratios bounded away from 0 and infinity");
    const auto& seq = d["probe"]["sequence"];
    c.detail << " dilation: " << d["bounded"].get<std::string>() << "/" << d["vanishing"].get<std::string>()
             << ", kernel ratios [" << fmt(klo) << ", " << fmt(khi) << "], probe "
             << d["probe"]["verdict"].get<std::string>() << " (last value "
             << fmt(seq.back()["value"].get<double>()) << ");";

    const json& q = g_dilation_qp.report["result"];
    const double slope = q["probe"]["trend"]["slope"].get<double>();
    const double se = q["probe"]["trend"]["se"].get<double>();
    c.require(q["bounded"] == "yes", "q<p criterion bounded");
    c.require(slope < -0.1 && q["probe"]["verdict"] == "consistent with compactness", "q<p probe trend");
    c.require(q["consistent"].get<bool>(), "q<p consistency");
    c.detail << " q<p: " << q["bounded"].get<std::string>() << ", probe slope " << fmt(slope) << " +- " << fmt(se);
}

void audit(Check& c)
{
    for (const char* name : {"audit-dilation.json", "audit-dilation-qp.json", "audit-zero.json"}) {
        const auto r = run_cli(name, 2, fs::path(name).stem().string());
        c.require(r.exit_code == 0 && !r.report.is_null(), std::string("CLI run ") + name);
        if (r.report.is_null()) {
            continue;
        }
        const json& a = r.report["result"];
        const double C = a["C"].get<double>(), drift = a["drift"].get<double>();
        c.require(!a["violation"].get<bool>(), std::string("violation in ") + name);
        c.require(std::isfinite(C) && drift < 0.1, std::string("C finite and stable in ") + name);
        c.detail << " " << name << ": C " << fmt(C) << ", doubled " << fmt(a["C_doubled"].get<double>()) << ", drift "
                 << fmt(drift) << ";";
    }
}

void reproducibility(Check& c)
{
    for (const char* name : {"carleson-pq.json", "carleson-qp.json", "audit-dilation.json", "lattice.json"}) {
        const std::string stem = fs::path(name).stem().string();
        const auto one = run_cli(name, 1, stem + "-w1");
        const auto two = run_cli(name, 2, stem + "-w2");
        const auto eight = run_cli(name, 8, stem + "-w8");
        c.require(one.exit_code == 0 && !one.text.empty(), std::string("CLI run ") + name);
        c.require(one.text == two.text && one.text == eight.text, std::string("bytes differ for ") + name);
        c.detail << " " << name << " " << one.text.size() << " bytes;";
    }
    // The operator scenario from criterion 7 ran with 2 workers.
    if (!g_dilation.text.empty()) {
        for (int workers : {1, 8}) {
            const auto r = run_cli("dilation.json", workers, "dilation-w" + std::to_string(workers));
            c.require(r.text == g_dilation.text, "dilation.json bytes differ at " + std::to_string(workers) + " workers");
        }
        c.detail << " dilation.json " << g_dilation.text.size() << " bytes at 1, 2, 8 workers";
    } else {
        c.require(false, "dilation.json report missing");
    }
}

}  // namespace

int main()
{
    criterion(1, "geometry invariants", geometry_invariants);
    criterion(2, "weights: doubling, twisted ratio, kernel flatness", weight_properties);
    criterion(3, "kernel norms against the series oracle", kernel_norms);
    criterion(4, "norm equivalence across the battery", norm_equivalence);
    criterion(5, "lattice covering, separation, multiplicity, decomposition", lattice_properties);
    criterion(6, "Carleson evaluators", carleson_evaluators);
    criterion(7, "operator-level end to end", operator_level);
    criterion(8, "local inequality audit", audit);
    criterion(9, "byte-identical reports across 1, 2, 8 workers", reproducibility);
    std::printf("%s: %d of 9 criteria failed\n", g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", g_failures);
    return g_failures == 0 ? 0 : 1;
}
