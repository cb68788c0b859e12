#include "bcl/suites.hpp"

#include "bcl/random.hpp"

#include <algorithm>
#include <cmath>

namespace bcl {

std::vector<GeometryCaseSummary> geometry_suite(const GeometrySuiteSettings& settings)
{
    std::vector<GeometryCaseSummary> out;
    for (int n : settings.dimensions) {
        GeometryCaseSummary s;
        s.n = n;
        s.cases = settings.cases;
        Rng rng(derive_seed(settings.seed, static_cast<std::uint64_t>(n)));
        for (std::size_t i = 0; i < settings.cases; ++i) {
            const Point a = 0.98 * sample_ball(rng, n);
            const Point z = 0.98 * sample_ball(rng, n);
            const Point c = 0.98 * sample_ball(rng, n);
            const double moved = pseudo_distance(mobius_transform(c, a), mobius_transform(c, z));
            s.mobius_invariance_max = std::max(s.mobius_invariance_max, std::abs(moved - pseudo_distance(a, z)));
            s.involution_max = std::max(s.involution_max, (mobius_transform(a, mobius_transform(a, z)) - z).norm());

            const Point w = 0.999 * sample_ball(rng, n);
            const double r = 0.1 + 3.0 * rng.uniform();
            const double beta = bergman_distance(a, w);
            if (std::abs(beta - r) >= kMembershipBand) {
                ++s.membership_checked;
                s.membership_disagreements += bergman_ball(a, r).contains(w) != (beta < r) ? 1 : 0;
            }
        }
        Point e1 = Point::Zero(n);
        e1(0) = 1.0;
        const BoundaryPoint xi(e1);
        for (double t : settings.tube_t) {
            for (double r : settings.tube_r) {
                const auto ball = bergman_ball(Point(t * e1), r);
                const double delta = tube_width_for_ball(t, r);
                for (std::size_t k = 0; k < settings.tube_samples; ++k) {
                    const Point u = k % 2 == 0 ? sample_ball(rng, n) : Point((1.0 - 1e-12) * sample_sphere(rng, n));
                    const Point w = ball.map_from_unit_ball(u);
                    ++s.tube_samples;
                    s.tube_violations += carleson_tube_contains(xi, delta, w) ? 0 : 1;
                }
            }
        }
        out.push_back(s);
    }
    return out;
}

WeightsSuiteReport weights_suite(const RadialWeight& w)
{
    WeightsSuiteReport rep;
    rep.diagnostics = doubling_diagnostics(w);
    rep.doubling_radius = 1.0 - std::exp2(-20.0);
    rep.doubling_ratio = w.hat(rep.doubling_radius) / w.hat(0.5 * (1.0 + rep.doubling_radius));

    const RadialWeight W = twisted_weight(w);
    rep.twisted_ratio_min = 1e300;
    for (int i = 0; i <= 999; ++i) {
        const double r = i / 1000.0;
        const double q = W.hat(r) / w.hat(r);
        rep.twisted_ratio_min = std::min(rep.twisted_ratio_min, q);
        rep.twisted_ratio_max = std::max(rep.twisted_ratio_max, q);
    }

    const int n = w.dimension();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 9; ++i) {
        const double t = 1.0 - 0.5 * std::pow(0.02, i / 8.0);
        Point a = Point::Zero(n);
        a(0) = t;
        const auto k = kernel_integral(w, a, rep.diagnostics.lambda0 + 0.25, 0.0, rep.diagnostics);
        rep.kernel_divergent = rep.kernel_divergent || k.divergent;
        rep.kernel_radii.push_back(t);
        rep.kernel_ratios.push_back(k.value / k.proxy);
        const double x = std::log(1.0 - t), y = std::log(rep.kernel_ratios.back());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.kernel_slope = (9.0 * sxy - sx * sy) / (9.0 * sxx - sx * sx);
    return rep;
}

LatticeSuiteReport lattice_suite(const LatticeSuiteSettings& settings)
{
    LatticeSuiteReport rep;
    LatticeOptions opt;
    opt.seed = settings.seed;
    opt.coverage_samples = std::min<std::size_t>(settings.coverage_samples, 20000);
    rep.lattice = build_lattice(settings.r, settings.truncation, settings.n, opt);
    const auto& pts = rep.lattice.points;

    // Fresh coverage sample, brute force.
    Rng rng(derive_seed(settings.seed, 0x636f766572ULL));
    const double tr = std::tanh(settings.r);
    rep.coverage_samples = settings.coverage_samples;
    for (std::size_t i = 0; i < settings.coverage_samples; ++i) {
        const Point z = rep.lattice.truncation_radius * sample_ball(rng, settings.n);
        const bool hit = std::any_of(pts.begin(), pts.end(), [&](const Point& p) { return within_bergman(z, p, tr); });
        rep.coverage_misses += hit ? 0 : 1;
    }

    rep.min_pairwise_distance = pts.size() < 2 ? settings.r : 1e300;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            rep.min_pairwise_distance = std::min(rep.min_pairwise_distance, bergman_distance(pts[i], pts[j]));
        }
    }
    rep.quarter_disjoint = rep.min_pairwise_distance >= settings.r / 2;
    rep.multiplicity_within_packing = rep.lattice.multiplicity_bound <= rep.lattice.packing_bound;

    // Lattice points where the perturbed family is defined.
    std::vector<Point> seq;
    for (const auto& p : pts) {
        if (settings.N * settings.N * (1.0 - p.norm()) < 0.5) {
            seq.push_back(p);
        }
    }
    rep.decomposition_points = seq.size();
    try {
        const auto d = decompose_separated(seq, settings.N, settings.r, settings.M, settings.R_out);
        rep.decomposition_groups = d.groups.size();
        std::vector<int> seen(seq.size(), 0);
        bool separated = true;
        for (const auto& g : d.groups) {
            for (std::size_t x : g) {
                ++seen[x];
            }
            for (std::size_t a = 0; a < g.size(); ++a) {
                for (std::size_t b = a + 1; b < g.size(); ++b) {
                    separated = separated && bergman_distance(seq[g[a]], seq[g[b]]) >= settings.R_out;
                }
            }
        }
        rep.decomposition_partition = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
        rep.decomposition_separated = separated;
    } catch (const DecompositionError&) {
        rep.decomposition_blocked = true;
    }
    return rep;
}

}  // namespace bcl
