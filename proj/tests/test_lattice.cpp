#include "bcl/lattice.hpp"
#include "bcl/random.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <optional>

using namespace bcl;

namespace {

Point real_point(std::initializer_list<double> xs)
{
    Point p(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) {
        p(i++) = x;
    }
    return p;
}

// Lexicographically first assignment in which every later point is compatible
// with each earlier member of its group, by exhaustive enumeration.
std::optional<std::vector<int>> first_valid_assignment(const std::vector<Point>& seq, double N, double r, int M,
                                                       double R_out)
{
    const int groups = M + 1;
    const std::size_t L = seq.size();
    std::vector<int> g(L, 0);
    std::size_t total = 1;
    for (std::size_t i = 0; i < L; ++i) {
        total *= static_cast<std::size_t>(groups);
    }
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
                // Independent restatement of the exclusion rule.
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

}  // namespace

TEST_CASE("a large ball covers with a single point")
{
    const Lattice lat = build_lattice(3.0, 0.5, 1);
    CHECK(lat.points.size() == 1);
    CHECK(lat.points[0].norm() == 0.0);
    CHECK(lat.coverage_fraction == 1.0);
}

TEST_CASE("lattice covering, separation and overlap")
{
    for (int n : {1, 2}) {
        for (double r : {0.6, 1.0}) {
            LatticeOptions opt;
            opt.coverage_samples = 20000;
            const Lattice lat = build_lattice(r, n == 1 ? 0.9 : 0.7, n, opt);
            CHECK(lat.coverage_fraction == 1.0);
            CHECK(lat.min_separation >= r / 4);
            // Brute-force coverage recheck on a fresh sample.
            Rng rng(99);
            int misses = 0;
            for (int i = 0; i < 2000; ++i) {
                const Point z = lat.truncation_radius * sample_ball(rng, n);
                bool hit = false;
                for (const auto& p : lat.points) {
                    if (bergman_distance(z, p) < r) {
                        hit = true;
                        break;
                    }
                }
                misses += hit ? 0 : 1;
            }
            CHECK(misses == 0);
            CHECK(lat.multiplicity_bound <= lat.packing_bound);
            MESSAGE("n " << n << " r " << r << ": " << lat.points.size() << " points, overlap " << lat.multiplicity_bound
                         << ", packing bound " << lat.packing_bound);
        }
    }
    CHECK_THROWS_AS(build_lattice(0.0, 0.5, 1), std::domain_error);
    CHECK_THROWS_AS(build_lattice(0.5, 0.9999, 1), std::domain_error);
}

TEST_CASE("interior multiplicity settles as the truncation grows")
{
    LatticeOptions opt;
    opt.coverage_samples = 20000;
    const Lattice small = build_lattice(0.3, 0.98, 1, opt);
    const Lattice large = build_lattice(0.3, 0.99, 1, opt);
    REQUIRE(small.interior_multiplicity > 0);
    REQUIRE(large.interior_multiplicity > 0);
    MESSAGE("interior overlap " << small.interior_multiplicity << " -> " << large.interior_multiplicity << " ("
                                << small.points.size() << " -> " << large.points.size() << " points)");
    CHECK(large.interior_multiplicity <= large.packing_bound);
    CHECK(std::abs(large.interior_multiplicity - small.interior_multiplicity) <= 0.25 * small.interior_multiplicity);
}

TEST_CASE("coverage failure is reported with the achieved fraction")
{
    LatticeOptions opt;
    opt.candidate_budget = 10;
    opt.coverage_samples = 2000;
    try {
        build_lattice(0.3, 0.9, 1, opt);
        FAIL("expected a coverage error");
    } catch (const CoverageError& e) {
        CHECK(e.coverage_fraction() < 1.0);
        CHECK(e.coverage_fraction() > 0.0);
    }
}

TEST_CASE("perturbed family identities")
{
    Rng rng(5);
    for (int n : {1, 2, 3}) {
        for (int trial = 0; trial < 20; ++trial) {
            Point a = sample_sphere(rng, n);
            const double t = 1.0 - 0.01 * rng.uniform_open0();
            a *= t;
            const double N = 1.0 + rng.uniform();
            const auto f = perturbed_family(a, N);
            const Eigen::MatrixXcd gram = f.basis.adjoint() * f.basis;
            CHECK((gram - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-12);
            CHECK((f.basis.col(0) - a / a.norm()).norm() < 1e-12);
            const double d = 1.0 - a.norm();
            const double N2d = N * N * d;
            CHECK(1.0 - f.points[0].squaredNorm() == doctest::Approx(N2d * (2.0 - N2d)).epsilon(1e-10));
            for (int j = 1; j < n; ++j) {
                CHECK(1.0 - f.points[j].squaredNorm() == doctest::Approx(N2d * (1.0 - N2d)).epsilon(1e-10));
            }
            CHECK(f.index_set.size() == static_cast<std::size_t>(2 * n + 1));
        }
    }
    const auto e = perturbed_family(real_point({0.99, 0.0}), 3.0, false);
    CHECK(e.basis.isApprox(Eigen::MatrixXcd::Identity(2, 2)));
    CHECK(1.0 - e.points[1].squaredNorm() == doctest::Approx(9.0 * 0.01 * (1.0 - 0.09)).epsilon(1e-12));
    CHECK(1.0 - e.points[1].squaredNorm() == doctest::Approx(0.0819).epsilon(1e-10));

    const auto g = perturbed_family(real_point({0.999, 0.0}), 2.0);
    std::size_t distinct = 0;
    for (std::size_t i = 0; i < g.index_set.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) {
            seen = seen || (g.index_set[i] - g.index_set[j]).norm() < 1e-14;
        }
        distinct += seen ? 0 : 1;
    }
    CHECK(distinct == 5);

    CHECK_THROWS_AS(perturbed_family(real_point({0.0, 0.0}), 2.0), std::domain_error);
    CHECK_THROWS_AS(perturbed_family(real_point({0.5}), 2.0, false), std::domain_error);
    CHECK_THROWS_AS(perturbed_family(real_point({0.9}), 1.5), std::domain_error);
    CHECK_NOTHROW(perturbed_family(real_point({0.9}), 1.5, false));
}

TEST_CASE("decomposition partitions and separates")
{
    const std::vector<Point> seq{real_point({0.9}), real_point({0.91}), real_point({0.99})};
    const auto d = decompose_separated(seq, 1.5, 0.05, 2, 0.01);
    CHECK(d.groups.size() == 3);
    std::vector<int> seen(seq.size(), 0);
    for (const auto& g : d.groups) {
        for (std::size_t i : g) {
            ++seen[i];
        }
        for (std::size_t a = 0; a < g.size(); ++a) {
            for (std::size_t b = a + 1; b < g.size(); ++b) {
                CHECK(bergman_distance(seq[g[a]], seq[g[b]]) >= 0.01);
            }
        }
    }
    for (int s : seen) {
        CHECK(s == 1);
    }

    // M = 0: the single group must be the sequence itself.
    const auto one = decompose_separated(seq, 1.5, 0.01, 0, 0.01);
    CHECK(one.groups.size() == 1);
    CHECK(one.groups[0] == std::vector<std::size_t>{0, 1, 2});
    CHECK_THROWS_AS(decompose_separated(seq, 1.5, 0.05, 0, 0.2), DecompositionError);
    CHECK_THROWS_AS(decompose_separated(seq, 3.0, 0.05, 2, 0.01), std::domain_error);
}

TEST_CASE("decomposition matches the exhaustive oracle on small inputs")
{
    Rng rng(21);
    int successes = 0, failures = 0, incomplete = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 2;
        const std::size_t L = 2 + static_cast<std::size_t>(trial % 3);
        std::vector<Point> seq;
        // Clustered near e_1 so that conflicts actually occur.
        for (std::size_t i = 0; i < L; ++i) {
            Point a = Point::Zero(n);
            a(0) = 1.0;
            a += 0.05 * sample_sphere(rng, n);
            seq.push_back((0.9 + 0.09 * rng.uniform()) * a / a.norm());
        }
        const double N = 1.0 + rng.uniform();
        const double r = 0.05 + 0.5 * rng.uniform();
        const int M = trial % 3;
        const double R_out = 0.1 + 1.5 * rng.uniform();
        const auto oracle = first_valid_assignment(seq, N, r, M, R_out);
        try {
            const auto d = decompose_separated(seq, N, r, M, R_out);
            REQUIRE(oracle.has_value());
            for (std::size_t g = 0; g < d.groups.size(); ++g) {
                for (std::size_t i : d.groups[g]) {
                    CHECK((*oracle)[i] == static_cast<int>(g));
                }
            }
            ++successes;
        } catch (const DecompositionError&) {
            // First-fit is not complete: a blocked run may still admit some assignment.
            ++failures;
            incomplete += oracle.has_value() ? 1 : 0;
        }
        if (!oracle) {
            CHECK_THROWS_AS(decompose_separated(seq, N, r, M, R_out), DecompositionError);
        }
    }
    MESSAGE("oracle comparisons: " << successes << " decomposed, " << failures << " blocked, " << incomplete
                                   << " blocked despite a valid assignment");
    CHECK(successes > 0);
    CHECK(failures > 0);
}
