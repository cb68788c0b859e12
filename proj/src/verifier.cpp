#include "bcl/verifier.hpp"

#include "bcl/parallel.hpp"
#include "bcl/quadrature.hpp"
#include "bcl/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace bcl {

using namespace thresholds;

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::Yes:
        return "yes";
    case Verdict::No:
        return "no";
    case Verdict::Inconclusive:
        break;
    }
    return "inconclusive";
}

TrendFit fit_trend(const std::vector<double>& radii, const std::vector<double>& values, const std::vector<double>& se)
{
    std::vector<double> x, y, sy;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (values[i] > 0.0 && radii[i] < 1.0) {
            x.push_back(-std::log1p(-radii[i]));
            y.push_back(std::log(values[i]));
            sy.push_back(se[i] / values[i]);
        }
    }
    TrendFit t;
    t.points = x.size();
    if (x.size() < 2) {
        return t;
    }
    double mx = 0.0;
    for (double v : x) {
        mx += v;
    }
    mx /= static_cast<double>(x.size());
    double sxx = 0.0;
    for (double v : x) {
        sxx += (v - mx) * (v - mx);
    }
    double var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = (x[i] - mx) / sxx;
        t.slope += c * y[i];
        var += c * c * sy[i] * sy[i];
    }
    t.se = std::sqrt(var);
    return t;
}

namespace {

std::string fmt(double x)
{
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
}

// Tail trend verdict: Yes when the slope is below the threshold by the margin, No when it is not
// below even allowing the margin.
Verdict slope_verdict(const TrendFit& t)
{
    if (t.points < 2) {
        return Verdict::Inconclusive;
    }
    if (t.slope + kMarginSe * t.se < kTrendSlope) {
        return Verdict::Yes;
    }
    if (t.slope - kMarginSe * t.se >= kTrendSlope) {
        return Verdict::No;
    }
    return Verdict::Inconclusive;
}

std::vector<LevelSummary> tail_half(const std::vector<LevelSummary>& levels)
{
    if (levels.empty()) {
        return {};
    }
    const int last = levels.back().k;
    const int first = std::max(1, last / 2);
    std::vector<LevelSummary> out;
    for (const auto& l : levels) {
        if (l.k >= first) {
            out.push_back(l);
        }
    }
    return out;
}

TrendFit fit_levels(const std::vector<LevelSummary>& levels)
{
    std::vector<double> r, v, s;
    for (const auto& l : levels) {
        r.push_back(l.radius);
        v.push_back(l.value);
        s.push_back(l.se);
    }
    return fit_trend(r, v, s);
}

bool all_zero(const std::vector<LevelSummary>& levels)
{
    return std::all_of(levels.begin(), levels.end(), [](const LevelSummary& l) { return l.value == 0.0; });
}

bool too_noisy(const std::vector<LevelSummary>& levels, std::vector<std::string>& warnings, const char* what)
{
    bool noisy = false;
    for (const auto& l : levels) {
        if (l.value > 0.0 && l.se > kMaxRelSe * l.value) {
            warnings.push_back(std::string(what) + ": relative SE " + fmt(l.se / l.value) + " at k = " +
                               std::to_string(l.k));
            noisy = true;
        }
    }
    return noisy;
}

// Verdict on a sum of shell contributions: finite when the tail decays geometrically.
Verdict finite_verdict(const std::vector<LevelSummary>& shells, TrendFit& fit, std::vector<std::string>& warnings,
                       const char* what)
{
    const auto tail = tail_half(shells);
    fit = fit_levels(tail);
    if (all_zero(shells)) {
        return Verdict::Yes;
    }
    if (all_zero(tail)) {
        return Verdict::Yes;
    }
    if (too_noisy(tail, warnings, what)) {
        return Verdict::Inconclusive;
    }
    return slope_verdict(fit);
}

// A lattice spreads evenly in Bergman volume, and shell k carries about 2^{kn} of it. The shell sums
// therefore decay with slope n plus the slope of the summands, which is fitted through the tail points
// directly so that the count of points per shell does not enter.
Verdict lattice_verdict(const std::vector<Point>& pts, const std::vector<double>& val, const std::vector<double>& se,
                        double truncation, int n, TrendFit& fit, std::vector<std::string>& warnings)
{
    const double from = 1.0 - std::sqrt(1.0 - truncation);
    std::vector<double> r, v, s;
    std::vector<int> shells;
    bool any = false;
    std::size_t noisy = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double rad = pts[i].norm();
        if (rad < from || rad > truncation) {
            continue;
        }
        if (val[i] > 0.0) {
            any = true;
            if (se[i] > kMaxRelSe * val[i]) {
                ++noisy;
                continue;
            }
            r.push_back(rad);
            v.push_back(val[i]);
            s.push_back(se[i]);
            shells.push_back(static_cast<int>(dyadic_shell(rad)));
        }
    }
    if (noisy > 0) {
        warnings.push_back("lattice criterion: " + std::to_string(noisy) + " tail points dropped for relative SE above " +
                           fmt(kMaxRelSe));
    }
    if (!any) {
        return Verdict::Yes;
    }
    fit = fit_trend(r, v, s);
    fit.slope += n;
    std::sort(shells.begin(), shells.end());
    if (std::unique(shells.begin(), shells.end()) - shells.begin() < 3) {
        warnings.push_back("lattice criterion: tail covers fewer than three dyadic shells; truncation too aggressive");
        return Verdict::Inconclusive;
    }
    return slope_verdict(fit);
}

}  // namespace

CarlesonReport carleson_pq(const Measure& nu, const RadialWeight& w, double p, double q, double r,
                           const CarlesonSettings& settings)
{
    if (!(p > 0.0 && q >= p)) {
        throw std::domain_error("carleson_pq: requires 0 < p <= q");
    }
    if (!(r > 0.0)) {
        throw std::domain_error("carleson_pq: r must be positive");
    }
    if (settings.depth < 3) {
        throw std::domain_error("carleson_pq: grid depth must be at least 3");
    }
    CarlesonReport rep;
    rep.regime = "p<=q";
    rep.r = r;
    rep.s = q / p;
    const int n = nu.dimension();
    rep.profile = mean_profile(nu, w, r, rep.s, boundary_grid(n, settings.depth, settings.directions), settings.mc);

    std::map<int, LevelSummary> by_level;
    for (std::size_t i = 0; i < rep.profile.centers.size(); ++i) {
        const double rad = rep.profile.centers[i].norm();
        const int k = rad == 0.0 ? 0 : static_cast<int>(std::lround(-std::log2(1.0 - rad)));
        auto [it, fresh] = by_level.try_emplace(k, LevelSummary{k, rad, 0.0, 0.0});
        const auto& mv = rep.profile.values[i];
        if (fresh || mv.value > it->second.value) {
            it->second.value = mv.value;
            it->second.se = mv.se;
        }
    }
    for (const auto& [k, l] : by_level) {
        rep.levels.push_back(l);
    }

    // Sup over the full grid against the sup one dyadic step short of it.
    const std::size_t L = rep.levels.size();
    std::size_t arg = 0, arg_prev = 0;
    for (std::size_t i = 0; i < L; ++i) {
        if (rep.levels[i].value > rep.levels[arg].value) {
            arg = i;
        }
        if (i + 1 < L && rep.levels[i].value > rep.levels[arg_prev].value) {
            arg_prev = i;
        }
    }
    rep.sup = rep.levels[arg].value;
    rep.sup_se = rep.levels[arg].se;
    rep.sup_previous = rep.levels[arg_prev].value;
    const auto tail = tail_half(rep.levels);
    rep.tail = fit_levels(tail);

    if (all_zero(rep.levels)) {
        rep.bounded = rep.vanishing = Verdict::Yes;
        rep.bounded_reason = rep.vanishing_reason = "profile identically 0";
        return rep;
    }
    const bool noisy = too_noisy(tail, rep.warnings, "carleson_pq");
    if (noisy) {
        rep.bounded = rep.vanishing = Verdict::Inconclusive;
        rep.bounded_reason = rep.vanishing_reason = "SE too large near the boundary";
        return rep;
    }
    if (rep.sup_previous > 0.0) {
        const double hi = (rep.sup + kMarginSe * rep.sup_se) / rep.sup_previous - 1.0;
        const double lo = (rep.sup - kMarginSe * rep.sup_se) / rep.sup_previous - 1.0;
        const std::string growth = "sup " + fmt(rep.sup) + " vs " + fmt(rep.sup_previous) + " one step short";
        if (hi < kBoundedGrowth) {
            rep.bounded = Verdict::Yes;
        } else if (lo >= kBoundedGrowth) {
            rep.bounded = Verdict::No;
        }
        rep.bounded_reason = growth;
    } else {
        // Only the outermost level is nonzero.
        rep.bounded = Verdict::Inconclusive;
        rep.bounded_reason = "profile vanishes except at the outermost level";
    }

    if (all_zero(tail)) {
        rep.vanishing = Verdict::Yes;
        rep.vanishing_reason = "tail identically 0";
    } else if (rep.bounded == Verdict::No) {
        rep.vanishing = Verdict::No;
        rep.vanishing_reason = "profile unbounded";
    } else {
        rep.vanishing = slope_verdict(rep.tail);
        rep.vanishing_reason = "tail slope " + fmt(rep.tail.slope) + " +- " + fmt(rep.tail.se);
    }
    return rep;
}

namespace {

// int over shell k of hat mu_{omega,r}^e W dV, by uniform sampling of each shell.
std::vector<LevelSummary> integral_shells(const Measure& nu, const RadialWeight& w, const RadialWeight& W, double r,
                                          double e, const CarlesonSettings& settings)
{
    const int n = nu.dimension();
    const int K = settings.shells;
    const McSettings mc{settings.shell_samples * static_cast<std::size_t>(K), derive_seed(settings.mc.seed, 0x696969ULL),
                        settings.inner.chunk};
    auto edge = [](int k) { return k == 0 ? 0.0 : 1.0 - std::ldexp(1.0, -k); };
    const McVector est = stratified_means(mc, static_cast<std::size_t>(K), static_cast<std::size_t>(K),
                                          [&](Rng& rng, std::size_t st, std::span<double> out) {
        const int k = static_cast<int>(st);
        const double lo = std::pow(edge(k), 2 * n), hi = std::pow(edge(k + 1), 2 * n);
        const double rad = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / (2 * n));
        const Point z = rad * sample_sphere(rng, n);
        McSettings inner = settings.inner;
        inner.seed = rng.next();
        const double m = mean_function(nu, w, r, 1.0, z, inner).value;
        if (m <= 0.0) {
            return;
        }
        out[st] = static_cast<double>(K) * (hi - lo) * std::pow(m, e) * W(z);
    });
    std::vector<LevelSummary> shells;
    for (int k = 0; k < K; ++k) {
        shells.push_back({k, edge(k), est.mean[static_cast<std::size_t>(k)], est.se[static_cast<std::size_t>(k)]});
    }
    return shells;
}

}  // namespace

CarlesonReport carleson_qp(const Measure& nu, const RadialWeight& w, double p, double q, double r, const Lattice& lattice,
                           const CarlesonSettings& settings)
{
    if (!(q > 0.0 && q < p)) {
        throw std::domain_error("carleson_qp: requires 0 < q < p");
    }
    if (!(r > 0.0)) {
        throw std::domain_error("carleson_qp: r must be positive");
    }
    if (lattice.points.empty() || lattice.dim() != nu.dimension()) {
        throw std::domain_error("carleson_qp: lattice is empty or of the wrong dimension");
    }
    CarlesonReport rep;
    rep.regime = "q<p";
    rep.r = r;
    rep.s = q / p;
    const double e = p / (p - q);
    const RadialWeight W = twisted_weight(w);

    // (iii)
    rep.integral_shells = integral_shells(nu, w, W, r, e, settings);
    double var = 0.0;
    for (const auto& s : rep.integral_shells) {
        rep.integral += s.value;
        var += s.se * s.se;
    }
    rep.integral_se = std::sqrt(var);
    rep.integral_finite = finite_verdict(rep.integral_shells, rep.integral_tail, rep.warnings, "integral criterion");

    // (iv): per-point averages. Shell sums are reported; the tail trend is fitted through the points.
    const auto& pts = lattice.points;
    rep.lattice_points = pts.size();
    rep.truncation_radius = lattice.truncation_radius;
    std::vector<double> val(pts.size()), se(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        McSettings inner = settings.inner;
        inner.seed = derive_seed(settings.mc.seed ^ 0x6c6174ULL, i);
        const MeanValue m = mean_function(nu, w, r, rep.s, pts[i], inner);
        if (m.value > 0.0) {
            val[i] = std::pow(m.value, e);
            se[i] = e * val[i] * m.se / m.value;
        }
    });
    std::map<int, LevelSummary> by_shell;
    std::map<int, double> shell_var;
    var = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        rep.lattice_sum += val[i];
        var += se[i] * se[i];
        const int k = static_cast<int>(dyadic_shell(pts[i].norm()));
        auto [it, fresh] = by_shell.try_emplace(k, LevelSummary{k, k == 0 ? 0.0 : 1.0 - std::ldexp(1.0, -k), 0.0, 0.0});
        it->second.value += val[i];
        shell_var[k] += se[i] * se[i];
    }
    rep.lattice_se = std::sqrt(var);
    for (auto& [k, l] : by_shell) {
        l.se = std::sqrt(shell_var[k]);
        if (1.0 - std::ldexp(1.0, -k - 1) <= lattice.truncation_radius) {
            rep.lattice_shells.push_back(l);
        }
    }
    rep.lattice_finite = lattice_verdict(pts, val, se, lattice.truncation_radius, nu.dimension(), rep.lattice_tail,
                                         rep.warnings);

    rep.paths_agree = rep.integral_finite == rep.lattice_finite;
    if (rep.paths_agree) {
        rep.bounded = rep.integral_finite;
        rep.bounded_reason = "integral tail slope " + fmt(rep.integral_tail.slope) + ", lattice tail slope " +
                             fmt(rep.lattice_tail.slope);
    } else {
        rep.bounded = Verdict::Inconclusive;
        rep.bounded_reason = std::string("integral criterion ") + to_string(rep.integral_finite) + ", lattice criterion " +
                             to_string(rep.lattice_finite);
        rep.warnings.push_back("integral and lattice criteria disagree: " + rep.bounded_reason);
    }
    rep.vanishing = rep.bounded;
    rep.vanishing_reason = "bounded and compact coincide for q < p";
    return rep;
}

void validate(const SymbolConfig& cfg)
{
    if (cfg.n < 1) {
        throw std::domain_error("config: n must be positive");
    }
    if (!(cfg.p > 0.0 && std::isfinite(cfg.p)) || !(cfg.q > 0.0 && std::isfinite(cfg.q))) {
        throw std::domain_error("config: p and q must be positive and finite");
    }
    if (!(cfg.r > 0.0 && cfg.r < 1.0)) {
        throw std::domain_error("config: r must lie in (0, 1)");
    }
    if (!cfg.mu || cfg.mu->dimension() != cfg.n || cfg.omega.dimension() != cfg.n || cfg.phi.dimension() != cfg.n ||
        cfg.psi.dimension() != cfg.n) {
        throw std::domain_error("config: dimension mismatch between n, weight, measure and symbols");
    }
    const auto d = doubling_diagnostics(cfg.omega);
    if (!std::isfinite(d.doubling_sup) || !std::isfinite(d.beta_est)) {
        throw std::domain_error("config: weight diagnostics are not finite");
    }
}

namespace {

CarlesonReport criterion(const SymbolConfig& cfg, const MeasurePtr& m, const std::optional<Lattice>& lattice)
{
    if (cfg.p <= cfg.q) {
        return carleson_pq(*m, cfg.omega, cfg.p, cfg.q, cfg.r, cfg.carleson);
    }
    return carleson_qp(*m, cfg.omega, cfg.p, cfg.q, cfg.r, *lattice, cfg.carleson);
}

}  // namespace

OperatorReport operator_check(const SymbolConfig& cfg)
{
    validate(cfg);
    OperatorReport rep;
    rep.regime = cfg.p <= cfg.q ? "p<=q" : "q<p";
    const CompositeMeasure eta = build_eta(cfg.phi, cfg.psi, cfg.u, cfg.v, cfg.mu, cfg.q);
    const CompositeMeasure sigma = build_sigma(cfg.phi, cfg.psi, cfg.u, cfg.v, cfg.mu, cfg.q, cfg.r);
    std::optional<Lattice> lattice;
    if (cfg.q < cfg.p) {
        LatticeOptions opt;
        opt.seed = cfg.carleson.mc.seed;
        opt.coverage_samples = 20000;
        lattice = build_lattice(cfg.r, cfg.carleson.lattice_truncation, cfg.n, opt);
    }
    rep.two_sided = criterion(cfg, Measure::sum({eta.total, sigma.total}), lattice);
    rep.phi_sided = criterion(cfg, Measure::sum({eta.total, sigma.phi_part}), lattice);
    rep.psi_sided = criterion(cfg, Measure::sum({eta.total, sigma.psi_part}), lattice);
    rep.bounded = rep.two_sided.bounded;
    rep.vanishing = rep.two_sided.vanishing;
    rep.one_sided_agree = rep.phi_sided.bounded == rep.psi_sided.bounded &&
                          rep.phi_sided.vanishing == rep.psi_sided.vanishing;
    if (!rep.one_sided_agree) {
        rep.warnings.push_back("one-sided measures eta + sigma_{phi,r} and eta + sigma_{psi,r} give different verdicts");
    }
    for (const auto* c : {&rep.two_sided, &rep.phi_sided, &rep.psi_sided}) {
        for (const auto& w : c->warnings) {
            rep.warnings.push_back(w);
        }
    }

    // Battery lower bound for the operator norm.
    rep.battery_version = kBatteryVersion;
    const auto bat = battery(cfg.n, cfg.omega, cfg.p);
    rep.battery.resize(bat.size());
    for (std::size_t i = 0; i < bat.size(); ++i) {
        const auto& entry = bat[i];
        BatteryRatio b;
        b.label = entry.label;
        b.boundary_kernel = entry.boundary_kernel;
        if (const auto* t = std::get_if<fn::NormalizedTest>(&entry.f.variant())) {
            b.center_radius = t->a.norm();
        }
        PolarSettings ps = cfg.polar;
        ps.seed = derive_seed(cfg.polar.seed, i);
        const NormResult nf = bergman_norm(entry.f, cfg.omega, cfg.p, ps);
        const NormResult img = lq_norm(apply_difference(cfg.u, cfg.v, cfg.phi, cfg.psi, entry.f), *cfg.mu, cfg.q, ps);
        b.norm = nf.value;
        b.norm_se = nf.se;
        b.image_norm = img.value;
        b.image_se = img.se;
        if (nf.value > 0.0) {
            b.ratio = img.value / nf.value;
            const double rel = img.value > 0.0 ? std::hypot(img.se / img.value, nf.se / nf.value) : 0.0;
            b.ratio_se = b.ratio * rel;
        }
        if (img.divergent || nf.divergent) {
            rep.warnings.push_back("battery entry '" + entry.label + "': radial tail not converged");
        }
        rep.battery[i] = b;
        if (b.ratio > rep.battery_lower_bound) {
            rep.battery_lower_bound = b.ratio;
            rep.battery_lower_bound_se = b.ratio_se;
        }
    }

    // Largest boundary-kernel ratio per radius; a rising trend means the lower bound grows toward the sphere.
    std::map<double, BatteryRatio> kernels;
    for (const auto& b : rep.battery) {
        if (b.boundary_kernel) {
            auto [it, fresh] = kernels.try_emplace(b.center_radius, b);
            if (!fresh && b.ratio > it->second.ratio) {
                it->second = b;
            }
        }
    }
    std::vector<double> rad, val, se;
    for (const auto& [x, b] : kernels) {
        rad.push_back(x);
        val.push_back(b.ratio);
        se.push_back(b.ratio_se);
    }
    rep.kernel_trend = fit_trend(rad, val, se);
    rep.kernel_diverging = rep.kernel_trend.points >= 2 &&
                           rep.kernel_trend.slope - kMarginSe * rep.kernel_trend.se > -kTrendSlope;
    rep.consistent = !(rep.bounded == Verdict::Yes && rep.kernel_diverging);
    if (!rep.consistent) {
        rep.warnings.push_back("criterion reports bounded while the kernel battery ratios grow toward the sphere");
    }
    return rep;
}

std::vector<Point> radial_centers(int n, int depth)
{
    std::vector<Point> out;
    for (int k = 1; k <= depth; ++k) {
        Point a = Point::Zero(n);
        a(0) = 1.0 - std::ldexp(1.0, -k);
        out.push_back(a);
    }
    return out;
}

ProbeReport compactness_probe(const SymbolConfig& cfg, const std::vector<Point>& centers)
{
    validate(cfg);
    if (centers.size() < 3) {
        throw std::domain_error("compactness_probe: needs at least three centers");
    }
    for (std::size_t i = 1; i < centers.size(); ++i) {
        if (!(centers[i].norm() > centers[i - 1].norm())) {
            throw std::domain_error("compactness_probe: centers must approach the boundary");
        }
    }
    ProbeReport rep;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const HoloFunction f = HoloFunction::normalized_test(centers[i], cfg.omega, cfg.p);
        PolarSettings ps = cfg.polar;
        ps.seed = derive_seed(cfg.polar.seed ^ 0x70726f6265ULL, i);
        const NormResult img = lq_norm(apply_difference(cfg.u, cfg.v, cfg.phi, cfg.psi, f), *cfg.mu, cfg.q, ps);
        rep.radii.push_back(centers[i].norm());
        rep.values.push_back(img.value);
        rep.se.push_back(img.se);
    }
    rep.used = rep.values.size();
    for (std::size_t i = 0; i < rep.values.size(); ++i) {
        if (rep.values[i] > 0.0 && rep.se[i] > kMaxRelSe * rep.values[i]) {
            rep.used = i;
            rep.warnings.push_back("compactness_probe: SE dominates from |a| = " + fmt(rep.radii[i]) + "; sequence truncated");
            break;
        }
    }
    const bool zero = std::all_of(rep.values.begin(), rep.values.end(), [](double v) { return v == 0.0; });
    if (zero) {
        rep.verdict = "consistent with compactness";
        return rep;
    }
    if (rep.used < 3) {
        rep.verdict = "inconclusive";
        return rep;
    }
    const std::size_t first = rep.used / 2;
    const std::vector<double> r(rep.radii.begin() + static_cast<long>(first), rep.radii.begin() + static_cast<long>(rep.used));
    const std::vector<double> v(rep.values.begin() + static_cast<long>(first), rep.values.begin() + static_cast<long>(rep.used));
    const std::vector<double> s(rep.se.begin() + static_cast<long>(first), rep.se.begin() + static_cast<long>(rep.used));
    rep.trend = fit_trend(r, v, s);
    const bool positive = std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
    switch (slope_verdict(rep.trend)) {
    case Verdict::Yes:
        rep.verdict = "consistent with compactness";
        break;
    case Verdict::No:
        rep.verdict = positive ? "refutes compactness" : "inconclusive";
        break;
    case Verdict::Inconclusive:
        rep.verdict = "inconclusive";
        break;
    }
    return rep;
}

namespace {

std::vector<AuditRow> audit_rows(const SymbolConfig& cfg, const MeasurePtr& mu_phi, double s, double R, double N,
                                 const std::vector<double>& ts, const McSettings& mc)
{
    std::vector<AuditRow> rows;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        AuditRow row;
        row.t = ts[i];
        Point a = Point::Zero(cfg.n);
        a(0) = ts[i];
        McSettings m = mc;
        m.seed = derive_seed(mc.seed, 2 * i);
        const Estimate num = measure_of_ball(*mu_phi, a, R, m);
        row.numerator = num.value;
        row.numerator_se = num.se;
        const PerturbedFamily fam = perturbed_family(a, N, true);
        double var = 0.0, rejected = 0.0;
        for (std::size_t j = 0; j < fam.index_set.size(); ++j) {
            McSettings mj = mc;
            mj.seed = derive_seed(mc.seed, 2 * i + 1 + 1000 * (j + 1));
            const Estimate d = R_quantity(cfg.phi, cfg.psi, cfg.u, cfg.v, cfg.mu, s, cfg.r, cfg.q, a, fam.index_set[j], mj);
            row.denominator += d.value;
            var += d.se * d.se;
            rejected = std::max(rejected, d.rejected_fraction);
        }
        row.denominator_se = std::sqrt(var);
        row.rejected_fraction = rejected;
        row.ratio = row.denominator > 0.0 ? row.numerator / row.denominator : 0.0;
        rows.push_back(row);
    }
    return rows;
}

double sup_ratio(const std::vector<AuditRow>& rows)
{
    double c = 0.0;
    for (const auto& r : rows) {
        c = std::max(c, r.ratio);
    }
    return c;
}

}  // namespace

AuditReport audit_lemma_4_2(const SymbolConfig& cfg, double s, double R, double N, std::vector<double> ts, double t0,
                            const McSettings& mc)
{
    validate(cfg);
    if (!(N >= 1.0) || !(s > 0.0) || !(R > 0.0 && R < 1.0)) {
        throw std::domain_error("audit_lemma_4_2: needs N >= 1, s > 0 and R in (0, 1)");
    }
    if (!(t0 > 0.0 && t0 < 1.0)) {
        throw std::domain_error("audit_lemma_4_2: t0 must lie in (0, 1)");
    }
    if (ts.empty()) {
        // Five dyadic levels, starting where the index set J_N exists (N^6 (1 - t) < 1).
        const int k0 = std::max(4, static_cast<int>(std::floor(6.0 * std::log2(N))) + 1);
        for (int k = k0; k < k0 + 5; ++k) {
            ts.push_back(1.0 - std::ldexp(1.0, -k));
        }
    }
    for (double t : ts) {
        if (!(t > t0 && t < 1.0)) {
            throw std::domain_error("audit_lemma_4_2: every t must lie in (t0, 1)");
        }
    }
    AuditReport rep;
    rep.s = s;
    rep.R = R;
    rep.N = N;
    rep.t0 = t0;
    const CompositeMeasure eta = build_eta(cfg.phi, cfg.psi, cfg.u, cfg.v, cfg.mu, cfg.q);
    const CompositeMeasure sigma = build_sigma(cfg.phi, cfg.psi, cfg.u, cfg.v, cfg.mu, cfg.q, cfg.r);
    const MeasurePtr mu_phi = Measure::sum({eta.phi_part, sigma.phi_part});

    rep.rows = audit_rows(cfg, mu_phi, s, R, N, ts, mc);
    McSettings twice = mc;
    twice.samples *= 2;
    twice.seed = derive_seed(mc.seed, 0x646f75626c65ULL);
    rep.doubled = audit_rows(cfg, mu_phi, s, R, N, ts, twice);
    rep.C = sup_ratio(rep.rows);
    rep.C_doubled = sup_ratio(rep.doubled);
    rep.drift = rep.C > 0.0 ? std::abs(rep.C_doubled - rep.C) / rep.C : (rep.C_doubled > 0.0 ? 1.0 : 0.0);

    for (const auto* rows : {&rep.rows, &rep.doubled}) {
        for (const auto& r : *rows) {
            if (r.denominator <= 0.0 && r.numerator - kMarginSe * r.numerator_se > 0.0) {
                rep.violation = true;
                rep.warnings.push_back("INEQUALITY VIOLATION at t = " + fmt(r.t) +
                                       ": positive mu(D(t e_1, R)) with a vanishing right-hand side");
            }
            if (r.rejected_fraction > 0.0) {
                rep.warnings.push_back("audit: samples dropped at the contact set, fraction " + fmt(r.rejected_fraction) +
                                       " at t = " + fmt(r.t));
            }
        }
    }
    return rep;
}

}  // namespace bcl
