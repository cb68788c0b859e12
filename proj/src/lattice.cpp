#include "bcl/lattice.hpp"

#include "bcl/parallel.hpp"
#include "bcl/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace bcl {

namespace {

double hyperbolic_radius(const Point& z) { return std::atanh(std::min(z.norm(), 1.0 - kInteriorMargin)); }

// Points kept sorted by their Bergman distance to 0; the triangle inequality
// restricts any distance-r query to a window of that key.
class RadialIndex {
public:
    explicit RadialIndex(const std::vector<Point>& points) : points_(points) {}

    void insert(std::size_t i) { keys_.emplace(hyperbolic_radius(points_[i]), i); }

    template <typename Visit>
    bool any_within(const Point& z, double r, Visit&& visit) const
    {
        const double key = hyperbolic_radius(z);
        for (auto it = keys_.lower_bound(key - r); it != keys_.end() && it->first <= key + r; ++it) {
            if (visit(it->second)) {
                return true;
            }
        }
        return false;
    }

private:
    const std::vector<Point>& points_;
    std::multimap<double, std::size_t> keys_;
};

}  // namespace

bool within_bergman(const Point& z, const Point& w, double tanh_r)
{
    const double d = std::norm(1.0 - inner(z, w));
    const double omr2 = (1.0 - z.squaredNorm()) * (1.0 - w.squaredNorm()) / d;
    return omr2 > 1.0 - tanh_r * tanh_r;
}

Lattice build_lattice(double r, double truncation_radius, int n, const LatticeOptions& options)
{
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw std::domain_error("build_lattice: r must be positive");
    }
    if (!(truncation_radius > 0.0 && truncation_radius <= 0.999)) {
        throw std::domain_error("build_lattice: truncation radius must lie in (0, 0.999]");
    }
    if (n < 1 || 1 + 2 * n > 16) {
        throw std::domain_error("build_lattice: dimension must lie in [1, 7]");
    }
    Lattice lat;
    lat.r = r;
    lat.truncation_radius = truncation_radius;
    RadialIndex index(lat.points);
    const double keep = std::tanh(0.5 * r);

    // try_add keeps z when it is at distance >= r/2 from every current point.
    auto try_add = [&](const Point& z) {
        ++lat.candidates_used;
        const bool near = index.any_within(z, 0.5 * r, [&](std::size_t i) { return within_bergman(z, lat.points[i], keep); });
        if (!near) {
            lat.points.push_back(z);
            index.insert(lat.points.size() - 1);
            return true;
        }
        return false;
    };

    // Halton stream with a seeded rotation; radii follow the invariant measure
    // (1-|z|^2)^{-n-1} dV on the truncated ball, directions come from Box-Muller.
    Rng shift_rng(options.seed);
    std::vector<double> shift(static_cast<std::size_t>(1 + 2 * n));
    for (double& s : shift) {
        s = shift_rng.uniform();
    }
    const double T2 = truncation_radius * truncation_radius;
    const double u_max = T2 / (1.0 - T2);
    auto coordinate = [&](std::size_t dim, std::uint64_t i) {
        const double x = halton(dim, i) + shift[dim];
        return x - std::floor(x);
    };
    auto candidate = [&](std::uint64_t i) {
        Point z(n);
        const double u = u_max * std::pow(coordinate(0, i), 1.0 / n);
        const double rho = std::min(std::sqrt(u / (1.0 + u)), truncation_radius);
        for (int j = 0; j < n; ++j) {
            const double u1 = 1.0 - coordinate(static_cast<std::size_t>(1 + 2 * j), i);
            const double u2 = coordinate(static_cast<std::size_t>(2 + 2 * j), i);
            z(j) = std::polar(std::sqrt(-2.0 * std::log(u1)), 2.0 * std::numbers::pi * u2);
        }
        const double len = z.norm();
        return Point(len > 0.0 ? Point(rho * z / len) : Point(Point::Zero(n)));
    };

    try_add(Point::Zero(n));
    std::uint64_t next = 0;
    int quiet_batches = 0;
    while (quiet_batches < 2 && lat.candidates_used < options.candidate_budget) {
        std::size_t added = 0;
        for (std::size_t b = 0; b < options.batch && lat.candidates_used < options.candidate_budget; ++b) {
            added += try_add(candidate(next++)) ? 1 : 0;
        }
        quiet_batches = added == 0 ? quiet_batches + 1 : 0;
    }

    // Coverage by sampling; misses become candidates until none remain.
    Rng sample_rng(derive_seed(options.seed, 0x636f766572ULL));
    std::vector<Point> samples(options.coverage_samples);
    for (auto& s : samples) {
        s = truncation_radius * sample_ball(sample_rng, n);
    }
    const double cover = std::tanh(r);
    std::vector<char> covered(samples.size(), 0);
    for (int round = 0;; ++round) {
        parallel_for(samples.size(), [&](std::size_t k) {
            if (!covered[k]) {
                covered[k] = index.any_within(samples[k], r, [&](std::size_t i) {
                    return within_bergman(samples[k], lat.points[i], cover);
                });
            }
        });
        const auto hits = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 1));
        lat.coverage_fraction = samples.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(samples.size());
        if (hits == samples.size()) {
            break;
        }
        if (lat.candidates_used >= options.candidate_budget || round >= 8) {
            std::ostringstream msg;
            msg << "build_lattice: candidate budget exhausted with coverage fraction " << lat.coverage_fraction;
            throw CoverageError(msg.str(), lat.coverage_fraction);
        }
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (!covered[k]) {
                try_add(samples[k]);
            }
        }
    }

    // Pairs closer than r all fall inside the index window, so the minimum is exact whenever it is below r.
    lat.min_separation = r;
    for (std::size_t i = 0; i < lat.points.size(); ++i) {
        index.any_within(lat.points[i], r, [&](std::size_t j) {
            if (j > i) {
                lat.min_separation = std::min(lat.min_separation, bergman_distance(lat.points[i], lat.points[j]));
            }
            return false;
        });
    }

    // Overlap of the D(a_k, 4r) at sample points and at the lattice points themselves.
    const double wide = std::tanh(4.0 * r);
    const std::size_t probes = std::min<std::size_t>(samples.size(), 20000);
    std::vector<int> counts(probes + lat.points.size(), 0);
    parallel_for(counts.size(), [&](std::size_t k) {
        const Point& z = k < probes ? samples[k] : lat.points[k - probes];
        int c = 0;
        index.any_within(z, 4.0 * r, [&](std::size_t i) {
            c += within_bergman(z, lat.points[i], wide) ? 1 : 0;
            return false;
        });
        counts[k] = c;
    });
    lat.multiplicity_bound = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    const double inner_limit = std::atanh(truncation_radius) - 4.0 * r;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const Point& z = k < probes ? samples[k] : lat.points[k - probes];
        if (hyperbolic_radius(z) <= inner_limit) {
            lat.interior_multiplicity = std::max(lat.interior_multiplicity, counts[k]);
        }
    }
    // Invariant volume of D(0, t) is sinh(t)^{2n}, and every D(a_k, r/4) meeting D(z, 4r) lies in D(z, 4r + r/4).
    lat.packing_bound = std::pow(std::sinh(4.25 * r) / std::sinh(0.25 * r), 2.0 * n);
    return lat;
}

Point perturbed_point(const Point& a, const Eigen::MatrixXcd& basis, Eigen::Index j, double N)
{
    const double delta = 1.0 - a.norm();
    Point p = (1.0 - N * N * delta) * basis.col(0);
    if (j > 0) {
        p += N * std::sqrt(delta) * basis.col(j);
    }
    return p;
}

PerturbedFamily perturbed_family(const Point& a, double N, bool with_index_set)
{
    require_interior(a, "perturbed_family");
    const double len = a.norm();
    if (len == 0.0) {
        throw std::domain_error("perturbed_family: a must be nonzero");
    }
    if (!(N >= 1.0) || !std::isfinite(N)) {
        throw std::domain_error("perturbed_family: N must be at least 1");
    }
    const double delta = 1.0 - len;
    if (!(N * N * delta < 1.0)) {
        throw std::domain_error("perturbed_family: requires N^2 (1-|a|) < 1");
    }
    if (with_index_set && !(std::pow(N, 6) * delta < 1.0)) {
        throw std::domain_error("perturbed_family: the index set requires N^6 (1-|a|) < 1");
    }
    PerturbedFamily f;
    f.base = a;
    f.N = N;
    f.basis = frame_for(a);
    const Eigen::Index n = a.size();
    for (Eigen::Index j = 0; j < n; ++j) {
        f.points.push_back(perturbed_point(a, f.basis, j, N));
    }
    if (with_index_set) {
        f.index_set.push_back(a);
        for (double M : {N * N, N * N * N}) {
            for (Eigen::Index j = 0; j < n; ++j) {
                f.index_set.push_back(perturbed_point(a, f.basis, j, M));
            }
        }
    }
    return f;
}

bool compatible(const Point& x, const Point& y, const PerturbedFamily& y_family, double r, double R_out)
{
    const double R = std::tanh(r);
    for (const Point& p : y_family.points) {
        if (within_bergman(x, p, R)) {
            return false;
        }
    }
    return bergman_distance(x, y) >= R_out;
}

Decomposition decompose_separated(const std::vector<Point>& seq, double N, double r, int M, double R_out)
{
    if (M < 0) {
        throw std::domain_error("decompose_separated: M must be nonnegative");
    }
    if (!(r > 0.0) || !(R_out > 0.0)) {
        throw std::domain_error("decompose_separated: r and R_out must be positive");
    }
    std::vector<PerturbedFamily> families;
    families.reserve(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) {
        if (!(N * N * (1.0 - seq[k].norm()) < 0.5)) {
            std::ostringstream msg;
            msg << "decompose_separated: N^2 (1-|a_k|) < 1/2 fails at index " << k;
            throw std::domain_error(msg.str());
        }
        for (std::size_t j = 0; j < k; ++j) {
            if ((seq[j] - seq[k]).norm() == 0.0) {
                throw std::domain_error("decompose_separated: sequence is not separated (repeated point)");
            }
        }
        families.push_back(perturbed_family(seq[k], N, false));
    }
    Decomposition out;
    out.groups.assign(static_cast<std::size_t>(M) + 1, {});
    for (std::size_t k = 0; k < seq.size(); ++k) {
        bool placed = false;
        for (auto& group : out.groups) {
            const bool fits = std::all_of(group.begin(), group.end(), [&](std::size_t m) {
                return compatible(seq[k], seq[m], families[m], r, R_out);
            });
            if (fits) {
                group.push_back(k);
                placed = true;
                break;
            }
        }
        if (!placed) {
            std::ostringstream msg;
            msg << "decompose_separated: point " << k << " is blocked by all " << (M + 1)
                << " groups; the bounded-overlap hypothesis fails";
            throw DecompositionError(msg.str(), k);
        }
    }
    return out;
}

}  // namespace bcl
