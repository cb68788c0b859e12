#include "bcl/measure.hpp"

#include "bcl/lattice.hpp"
#include "bcl/random.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bcl {

namespace {

constexpr std::size_t kCertificateSamples = 10000;
constexpr double kSelfMapSlack = 1e-12;
constexpr double kContactTolerance = 1e-14;

// Half interior samples, half on the sphere pulled in by the interior margin.
template <typename Visit>
void certification_sample(int n, std::uint64_t seed, Visit&& visit)
{
    Rng rng(seed);
    for (std::size_t i = 0; i < kCertificateSamples; ++i) {
        Point z = (i % 2 == 0) ? sample_ball(rng, n) : Point((1.0 - 2.0 * kInteriorMargin) * sample_sphere(rng, n));
        visit(z);
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

bool inside_open_ball(const Point& z) { return z.squaredNorm() < 1.0; }

}  // namespace

SymbolMap::SymbolMap(Variant v, int n) : v_(std::move(v)), n_(n)
{
    if (n < 1) {
        throw std::invalid_argument("SymbolMap: dimension must be positive");
    }
    std::visit(overloaded{
                   [&](const symbol::Identity&) { invertible_ = true; },
                   [&](const symbol::Dilation& d) {
                       if (!(std::abs(d.lambda) <= 1.0)) {
                           throw std::invalid_argument("SymbolMap: dilation requires |lambda| <= 1");
                       }
                       invertible_ = d.lambda != 0.0;
                   },
                   [&](const symbol::Affine& f) {
                       if (f.A.rows() != n || f.A.cols() != n || f.b.size() != n) {
                           throw std::invalid_argument("SymbolMap: affine map has the wrong shape");
                       }
                       const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(f.A);
                       invertible_ = std::abs(lu.determinant()) > 1e-14;
                       if (invertible_) {
                           inverse_linear_ = lu.inverse();
                       }
                   },
                   [&](const symbol::Automorphism& m) {
                       if (m.a.size() != n || m.U.rows() != n || m.U.cols() != n) {
                           throw std::invalid_argument("SymbolMap: automorphism has the wrong shape");
                       }
                       require_interior(m.a, "SymbolMap");
                       if ((m.U.adjoint() * m.U - Eigen::MatrixXcd::Identity(n, n)).norm() > 1e-10) {
                           throw std::invalid_argument("SymbolMap: automorphism requires a unitary U");
                       }
                       invertible_ = true;
                   },
                   [&](const symbol::Composite& c) {
                       invertible_ = true;
                       for (const auto& m : c.maps) {
                           if (m.dimension() != n) {
                               throw std::invalid_argument("SymbolMap: composite dimensions differ");
                           }
                           invertible_ = invertible_ && m.invertible();
                       }
                   },
               },
               v_);
    certification_sample(n, 0x73656c66ULL, [&](const Point& z) { sup_ = std::max(sup_, (*this)(z).norm()); });
    if (!(sup_ <= 1.0 + kSelfMapSlack)) {
        std::ostringstream msg;
        msg << "SymbolMap: " << describe() << " leaves the closed ball (sup |h| = " << sup_ << ")";
        throw std::invalid_argument(msg.str());
    }
}

Point SymbolMap::operator()(const Point& z) const
{
    return std::visit(overloaded{
                          [&](const symbol::Identity&) { return z; },
                          [&](const symbol::Dilation& d) { return Point(d.lambda * z); },
                          [&](const symbol::Affine& f) { return Point(f.A * z + f.b); },
                          [&](const symbol::Automorphism& m) { return Point(m.U * mobius_transform(m.a, z)); },
                          [&](const symbol::Composite& c) {
                              Point w = z;
                              for (const auto& m : c.maps) {
                                  w = m(w);
                              }
                              return w;
                          },
                      },
                      v_);
}

double SymbolMap::jacobian(const Point& z) const
{
    return std::visit(overloaded{
                          [&](const symbol::Identity&) { return 1.0; },
                          [&](const symbol::Dilation& d) { return std::pow(std::norm(d.lambda), n_); },
                          [&](const symbol::Affine& f) { return std::norm(f.A.determinant()); },
                          [&](const symbol::Automorphism& m) {
                              const double num = 1.0 - m.a.squaredNorm();
                              const double den = std::norm(1.0 - inner(z, m.a));
                              return std::pow(num / den, n_ + 1);
                          },
                          [&](const symbol::Composite& c) {
                              double j = 1.0;
                              Point w = z;
                              for (const auto& m : c.maps) {
                                  j *= m.jacobian(w);
                                  w = m(w);
                              }
                              return j;
                          },
                      },
                      v_);
}

std::optional<Point> SymbolMap::inverse(const Point& w) const
{
    if (!invertible_) {
        return std::nullopt;
    }
    return std::visit(overloaded{
                          [&](const symbol::Identity&) -> std::optional<Point> { return w; },
                          [&](const symbol::Dilation& d) -> std::optional<Point> { return Point(w / d.lambda); },
                          [&](const symbol::Affine& f) -> std::optional<Point> {
                              return Point(inverse_linear_ * (w - f.b));
                          },
                          [&](const symbol::Automorphism& m) -> std::optional<Point> {
                              const Point v = m.U.adjoint() * w;
                              if (!is_interior(v)) {
                                  return std::nullopt;
                              }
                              return mobius_transform(m.a, v);
                          },
                          [&](const symbol::Composite& c) -> std::optional<Point> {
                              Point z = w;
                              for (auto it = c.maps.rbegin(); it != c.maps.rend(); ++it) {
                                  if (it != c.maps.rbegin() && !is_interior(z)) {
                                      return std::nullopt;
                                  }
                                  auto prev = it->inverse(z);
                                  if (!prev) {
                                      return std::nullopt;
                                  }
                                  z = std::move(*prev);
                              }
                              return z;
                          },
                      },
                      v_);
}

std::string SymbolMap::describe() const
{
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const symbol::Identity&) { out << "identity"; },
                   [&](const symbol::Dilation& d) { out << "dilation(" << d.lambda.real() << "," << d.lambda.imag() << ")"; },
                   [&](const symbol::Affine&) { out << "affine"; },
                   [&](const symbol::Automorphism& m) { out << "automorphism(|a|=" << m.a.norm() << ")"; },
                   [&](const symbol::Composite& c) {
                       out << "composite[";
                       for (std::size_t i = 0; i < c.maps.size(); ++i) {
                           out << (i ? "," : "") << c.maps[i].describe();
                       }
                       out << "]";
                   },
               },
               v_);
    return out.str();
}

WeightFactor::WeightFactor(ComplexField f, int n, std::string description)
    : f_(std::move(f)), description_(std::move(description))
{
    certification_sample(n, 0x77656967ULL, [&](const Point& z) {
        const double m = std::abs(f_(z));
        if (!std::isfinite(m)) {
            throw std::invalid_argument("WeightFactor: " + description_ + " is not finite on the sample");
        }
        sup_ = std::max(sup_, m);
    });
}

WeightFactor WeightFactor::constant(int n, std::complex<double> c)
{
    std::ostringstream d;
    d << "constant(" << c.real() << "," << c.imag() << ")";
    WeightFactor w([c](const Point&) { return c; }, n, d.str());
    w.constant_ = c;
    return w;
}

Measure::Measure(Variant v, int n) : v_(std::move(v)), n_(n)
{
    terms_ = flatten();
    mass_ = integrate(*this, [](const Point&) { return 1.0; }, McSettings{4096, 0x6d617373ULL, 512});
}

MeasurePtr Measure::density(int n, RealField g, std::string label)
{
    return std::make_shared<Measure>(measure::Density{std::move(g), std::move(label)}, n);
}

MeasurePtr Measure::weighted(const RadialWeight& w, RealField factor, std::string label)
{
    if (label.empty()) {
        label = w.describe();
    }
    RealField g = factor ? RealField([w, factor](const Point& z) { return factor(z) * w(z); })
                         : RealField([w](const Point& z) { return w(z); });
    return density(w.dimension(), std::move(g), std::move(label));
}

MeasurePtr Measure::zero(int n) { return std::make_shared<Measure>(measure::Sum{}, n); }

MeasurePtr Measure::pushforward(MeasurePtr base, SymbolMap map, RealField factor, std::string label)
{
    const int n = base->dimension();
    if (map.dimension() != n) {
        throw std::invalid_argument("Measure::pushforward: dimensions differ");
    }
    return std::make_shared<Measure>(measure::Pushforward{std::move(base), std::move(map), std::move(factor), std::move(label)},
                                     n);
}

MeasurePtr Measure::restriction(MeasurePtr base, Region region, std::string label)
{
    const int n = base->dimension();
    return std::make_shared<Measure>(measure::Restriction{std::move(base), std::move(region), std::move(label)}, n);
}

MeasurePtr Measure::sum(std::vector<MeasurePtr> parts)
{
    if (parts.empty()) {
        throw std::invalid_argument("Measure::sum: use Measure::zero for the empty sum");
    }
    const int n = parts.front()->dimension();
    for (const auto& p : parts) {
        if (p->dimension() != n) {
            throw std::invalid_argument("Measure::sum: dimensions differ");
        }
    }
    return std::make_shared<Measure>(measure::Sum{std::move(parts)}, n);
}

std::vector<MeasureTerm> Measure::flatten() const
{
    std::vector<MeasureTerm> out;
    std::visit(overloaded{
                   [&](const measure::Density& d) { out.push_back({d.g, SymbolMap::identity(n_), {}}); },
                   [&](const measure::Pushforward& p) {
                       for (auto t : p.base->terms()) {
                           RealField weight = t.weight;
                           if (p.factor) {
                               // The factor lives on the base space, i.e. at t.map(z).
                               const bool plain = std::holds_alternative<symbol::Identity>(t.map.variant());
                               weight = [w = t.weight, f = p.factor, inner_map = t.map, plain](const Point& z) {
                                   const double base = w ? w(z) : 1.0;
                                   if (base == 0.0) {
                                       return 0.0;
                                   }
                                   return base * (plain ? f(z) : f(inner_map(z)));
                               };
                           }
                           SymbolMap map = std::holds_alternative<symbol::Identity>(t.map.variant())
                                               ? p.map
                                               : SymbolMap(symbol::Composite{{t.map, p.map}}, n_);
                           out.push_back({std::move(t.density), std::move(map), std::move(weight)});
                       }
                   },
                   [&](const measure::Restriction& r) {
                       for (auto t : r.base->terms()) {
                           t.weight = [w = t.weight, region = r.region, m = t.map](const Point& z) {
                               if (!region(m(z))) {
                                   return 0.0;
                               }
                               return w ? w(z) : 1.0;
                           };
                           out.push_back(std::move(t));
                       }
                   },
                   [&](const measure::Sum& s) {
                       for (const auto& p : s.parts) {
                           for (const auto& t : p->terms()) {
                               out.push_back(t);
                           }
                       }
                   },
               },
               v_);
    return out;
}

std::string Measure::describe() const
{
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const measure::Density& d) { out << "density(" << d.label << ")"; },
                   [&](const measure::Pushforward& p) {
                       out << "pushforward(" << p.base->describe() << ", " << p.map.describe();
                       if (!p.label.empty()) {
                           out << ", " << p.label;
                       }
                       out << ")";
                   },
                   [&](const measure::Restriction& r) { out << "restriction(" << r.base->describe() << ", " << r.label << ")"; },
                   [&](const measure::Sum& s) {
                       if (s.parts.empty()) {
                           out << "zero";
                       }
                       for (std::size_t i = 0; i < s.parts.size(); ++i) {
                           out << (i ? " + " : "") << s.parts[i]->describe();
                       }
                   },
               },
               v_);
    return out.str();
}

namespace {

double term_value(const MeasureTerm& t, const Point& z)
{
    const double w = t.weight ? t.weight(z) : 1.0;
    if (w == 0.0) {
        return 0.0;
    }
    return w * t.density(z);
}

Estimate finish(const McVector& est, double scale, double target_rel_se)
{
    Estimate e;
    e.value = scale * est.mean[0];
    e.se = scale * est.se[0];
    e.flagged = e.se > target_rel_se * std::abs(e.value);
    return e;
}

}  // namespace

Estimate integrate(const Measure& mu, const RealField& f, const McSettings& mc, double target_rel_se)
{
    const auto& terms = mu.terms();
    if (terms.empty()) {
        return {};
    }
    const int n = mu.dimension();
    const McVector est = stratified_means(mc, 1, 1, [&](Rng& rng, std::size_t, std::span<double> out) {
        const Point z = sample_ball(rng, n);
        double acc = 0.0;
        for (const auto& t : terms) {
            const double tv = term_value(t, z);
            if (tv != 0.0) {
                acc += tv * f(t.map(z));
            }
        }
        out[0] = acc;
    });
    return finish(est, 1.0, target_rel_se);
}

namespace {

// Sum over terms of the importance-sampled contribution of one unit-ball draw to mu(D(a, r)).
// The draw maps to w in the ellipsoid for terms with an inverse and is used directly as a
// uniform ball sample otherwise.
double ball_contribution(const std::vector<MeasureTerm>& terms, const EllipsoidParams& e, double tanh_r,
                         const Point& unit, const Point& w)
{
    double acc = 0.0;
    for (const auto& t : terms) {
        if (t.map.invertible()) {
            const auto z = t.map.inverse(w);
            if (!z || !inside_open_ball(*z)) {
                continue;
            }
            const double tv = term_value(t, *z);
            if (tv != 0.0) {
                acc += tv * e.volume() / t.map.jacobian(*z);
            }
        } else {
            const double tv = term_value(t, unit);
            if (tv != 0.0 && within_bergman(t.map(unit), e.z, tanh_r)) {
                acc += tv;
            }
        }
    }
    return acc;
}

}  // namespace

Estimate measure_of_ball(const Measure& mu, const Point& a, double r, const McSettings& mc, double target_rel_se)
{
    require_interior(a, "measure_of_ball");
    const EllipsoidParams e = bergman_ball(a, r);
    const auto& terms = mu.terms();
    if (terms.empty()) {
        return {};
    }
    const int n = mu.dimension();
    const double tr = std::tanh(r);
    const McVector est = stratified_means(mc, 1, 1, [&](Rng& rng, std::size_t, std::span<double> out) {
        const Point unit = sample_ball(rng, n);
        out[0] = ball_contribution(terms, e, tr, unit, e.map_from_unit_ball(unit));
    });
    return finish(est, 1.0, target_rel_se);
}

MeanValue mean_function(const Measure& mu, const RadialWeight& w, double r, double s, const Point& a,
                        const McSettings& mc, double target_rel_se)
{
    if (!(s > 0.0)) {
        throw std::domain_error("mean_function: s must be positive");
    }
    require_interior(a, "mean_function");
    const EllipsoidParams e = bergman_ball(a, r);
    const auto& terms = mu.terms();
    const int n = mu.dimension();
    const double tr = std::tanh(r);
    const McVector est = stratified_means(
        mc, 1, 2,
        [&](Rng& rng, std::size_t, std::span<double> out) {
            const Point unit = sample_ball(rng, n);
            const Point x = e.map_from_unit_ball(unit);
            out[0] = ball_contribution(terms, e, tr, unit, x);
            out[1] = w(x) * e.volume();
        },
        true);
    MeanValue m;
    m.numerator = est.mean[0];
    m.denominator = est.mean[1];
    if (!(m.denominator > 1e-300)) {
        throw std::overflow_error("mean_function: omega(D(a, r)) underflows");
    }
    const double ds = std::pow(m.denominator, s);
    m.value = m.numerator / ds;
    // Delta method on (N, D) -> N / D^s.
    const double gN = 1.0 / ds;
    const double gD = -s * m.value / m.denominator;
    const double var = gN * gN * est.covariance(0, 0) + 2.0 * gN * gD * est.covariance(0, 1) + gD * gD * est.covariance(1, 1);
    m.se = std::sqrt(std::max(0.0, var));
    m.flagged = m.se > target_rel_se * std::abs(m.value);
    return m;
}

std::vector<Point> boundary_grid(int n, int depth, int directions)
{
    if (n < 1 || depth < 1 || directions < 1) {
        throw std::domain_error("boundary_grid: n, depth and directions must be positive");
    }
    // Directions: e_1 first, then fixed deterministic unit vectors.
    std::vector<Point> dirs;
    Rng rng(0x64697273ULL);
    Point e1 = Point::Zero(n);
    e1(0) = 1.0;
    dirs.push_back(e1);
    while (static_cast<int>(dirs.size()) < directions) {
        dirs.push_back(sample_sphere(rng, n));
    }
    std::vector<Point> grid{Point::Zero(n)};
    for (int k = 1; k <= depth; ++k) {
        const double t = 1.0 - std::ldexp(1.0, -k);
        for (const auto& d : dirs) {
            grid.push_back(t * d);
        }
    }
    return grid;
}

MeanProfile mean_profile(const Measure& mu, const RadialWeight& w, double r, double s, std::vector<Point> centers,
                         const McSettings& mc)
{
    std::stable_sort(centers.begin(), centers.end(), [](const Point& x, const Point& y) { return x.norm() < y.norm(); });
    MeanProfile p;
    p.r = r;
    p.s = s;
    p.centers = std::move(centers);
    for (std::size_t i = 0; i < p.centers.size(); ++i) {
        McSettings local = mc;
        local.seed = derive_seed(mc.seed, i);
        p.values.push_back(mean_function(mu, w, r, s, p.centers[i], local));
    }
    return p;
}

double symbol_distance(const SymbolMap& phi, const SymbolMap& psi, const Point& z)
{
    const Point a = phi(z);
    const Point b = psi(z);
    if ((a - b).norm() == 0.0) {
        return 0.0;
    }
    // Images on the sphere pull in by the interior margin.
    auto pull = [](const Point& x) { return is_interior(x) ? x : Point((1.0 - 2.0 * kInteriorMargin) * x / x.norm()); };
    return pseudo_distance(pull(a), pull(b));
}

namespace {

MeasurePtr composite_sum(MeasurePtr a, MeasurePtr b) { return Measure::sum({std::move(a), std::move(b)}); }

}  // namespace

CompositeMeasure build_eta(const SymbolMap& phi, const SymbolMap& psi, const WeightFactor& u, const WeightFactor& v,
                           const MeasurePtr& mu, double q)
{
    if (!(q > 0.0)) {
        throw std::domain_error("build_eta: q must be positive");
    }
    auto part = [&](const SymbolMap& map, const WeightFactor& f, const char* label) {
        RealField factor = [phi, psi, f, q](const Point& z) {
            const double rho = symbol_distance(phi, psi, z);
            if (rho == 0.0) {
                return 0.0;
            }
            return std::pow(rho * std::abs(f(z)), q);
        };
        return Measure::pushforward(mu, map, std::move(factor), label);
    };
    CompositeMeasure c;
    c.phi_part = part(phi, u, "|rho u|^q");
    c.psi_part = part(psi, v, "|rho v|^q");
    c.total = composite_sum(c.phi_part, c.psi_part);
    return c;
}

CompositeMeasure build_sigma(const SymbolMap& phi, const SymbolMap& psi, const WeightFactor& u, const WeightFactor& v,
                             const MeasurePtr& mu, double q, double r)
{
    if (!(q > 0.0)) {
        throw std::domain_error("build_sigma: q must be positive");
    }
    if (!(r > 0.0 && r < 1.0)) {
        throw std::domain_error("build_sigma: r must lie in (0, 1)");
    }
    RealField factor = [phi, psi, u, v, q, r](const Point& z) {
        const double d = std::abs(u(z) - v(z));
        if (d == 0.0 || !(symbol_distance(phi, psi, z) < r)) {
            return 0.0;
        }
        return std::pow(d, q);
    };
    CompositeMeasure c;
    c.phi_part = Measure::pushforward(mu, phi, factor, "chi_G |u-v|^q");
    c.psi_part = Measure::pushforward(mu, psi, factor, "chi_G |u-v|^q");
    c.total = composite_sum(c.phi_part, c.psi_part);
    return c;
}

Estimate R_quantity(const SymbolMap& phi, const SymbolMap& psi, const WeightFactor& u, const WeightFactor& v,
                    const MeasurePtr& mu, double s, double r, double q, const Point& a, const Point& b,
                    const McSettings& mc)
{
    if (!(q > 0.0) || !(s > 0.0)) {
        throw std::domain_error("R_quantity: q and s must be positive");
    }
    require_interior(b, "R_quantity");
    auto rejected = std::make_shared<std::atomic<std::size_t>>(0);
    auto evaluated = std::make_shared<std::atomic<std::size_t>>(0);
    RealField factor = [phi, psi, u, v, q, s, b, rejected, evaluated](const Point& z) {
        evaluated->fetch_add(1, std::memory_order_relaxed);
        const std::complex<double> den = 1.0 - inner(psi(z), b);
        if (std::abs(den) < kContactTolerance) {
            rejected->fetch_add(1, std::memory_order_relaxed);
            return 0.0;
        }
        const std::complex<double> num = 1.0 - inner(phi(z), b);
        const std::complex<double> Qs = num == den ? std::complex<double>(1.0) : std::pow(num / den, s);
        const std::complex<double> diff = u(z) - v(z) * Qs;
        const double m = std::abs(diff);
        return m == 0.0 ? 0.0 : std::pow(m, q);
    };
    const auto nu = Measure::pushforward(mu, phi, std::move(factor), "|u - v Q_b^s|^q");
    rejected->store(0);
    evaluated->store(0);
    Estimate e = measure_of_ball(*nu, a, r, mc);
    const std::size_t total = evaluated->load();
    e.rejected_fraction = total == 0 ? 0.0 : static_cast<double>(rejected->load()) / static_cast<double>(total);
    return e;
}

}  // namespace bcl
