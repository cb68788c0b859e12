#include "bcl/holo.hpp"

#include "bcl/lattice.hpp"
#include "bcl/parallel.hpp"
#include "bcl/quadrature.hpp"
#include "bcl/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace bcl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::complex<double> one_minus_inner(const Point& z, const Point& a)
{
    const std::complex<double> d = 1.0 - inner(z, a);
    if (std::abs(d) < kSingularityTolerance) {
        throw NearSingularity("evaluate: |1 - <z, a>| below 1e-14");
    }
    return d;
}

std::string format_point(const Point& a)
{
    std::ostringstream s;
    s << "(";
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        s << (i ? ", " : "") << a(i).real();
        if (a(i).imag() != 0.0) {
            s << (a(i).imag() < 0 ? "-" : "+") << std::abs(a(i).imag()) << "i";
        }
    }
    s << ")";
    return s.str();
}

// phi_b on the sphere; |b| < 1 and |eta| = 1.
Point mobius_on_sphere(const Point& b, const Point& eta)
{
    const double bb = b.squaredNorm();
    const std::complex<double> eb = inner(eta, b);
    const Point p = (eb / bb) * b;
    const Point q = eta - p;
    const Point w = (b - p - std::sqrt(1.0 - bb) * q) / (1.0 - eb);
    return w / w.norm();
}

double poisson_szego(const Point& b, const Point& zeta, int n)
{
    const double d = std::norm(1.0 - inner(zeta, b));
    return std::pow((1.0 - b.squaredNorm()) / d, n);
}

std::vector<Point> usable_foci(const std::vector<Point>& foci)
{
    std::vector<Point> out;
    for (const auto& c : foci) {
        const double len = c.norm();
        if (len < 0.5 || len >= 1.0 - kInteriorMargin) {
            continue;
        }
        const bool seen = std::any_of(out.begin(), out.end(), [&](const Point& d) { return (d - c).norm() < 1e-12; });
        if (!seen) {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<Point> pull_back_foci(const std::vector<Point>& foci, const SymbolMap& map)
{
    std::vector<Point> out;
    if (!map.invertible()) {
        return out;
    }
    for (const auto& c : foci) {
        const auto z = map.inverse(c);
        if (z && is_interior(*z)) {
            out.push_back(*z);
        }
    }
    return out;
}

constexpr std::size_t kTailShells = 4;
constexpr double kTailFraction = 1e-3;

}  // namespace

HoloFunction::HoloFunction(Variant v, int n) : v_(std::move(v)), n_(n)
{
    if (n < 1) {
        throw std::domain_error("HoloFunction: dimension must be positive");
    }
    std::visit(overloaded{
                   [&](const fn::KernelPower& k) {
                       require_interior(k.a, "KernelPower");
                       if (k.a.size() != n || !(k.s > 0.0)) {
                           throw std::domain_error("KernelPower: needs a in B_n and s > 0");
                       }
                   },
                   [&](const fn::NormalizedTest& t) {
                       require_interior(t.a, "NormalizedTest");
                       if (t.a.size() != n || !(t.p > 0.0) || !(t.hat_a > 0.0)) {
                           throw std::domain_error("NormalizedTest: needs a in B_n, p > 0 and hat(a) > 0");
                       }
                   },
                   [&](const fn::LatticeSum& l) {
                       if (l.coeffs.size() != l.centers.size() || l.eval_centers.size() != l.centers.size() ||
                           l.log_scales.size() != l.centers.size()) {
                           throw std::domain_error("LatticeSum: size mismatch");
                       }
                   },
                   [&](const fn::Polynomial& p) {
                       if (p.exponents.size() != p.coeffs.size()) {
                           throw std::domain_error("Polynomial: size mismatch");
                       }
                       for (const auto& e : p.exponents) {
                           if (static_cast<int>(e.size()) != n ||
                               std::any_of(e.begin(), e.end(), [](int k) { return k < 0; })) {
                               throw std::domain_error("Polynomial: exponents must be nonnegative, one per coordinate");
                           }
                       }
                   },
                   [](const fn::Constant&) {},
                   [&](const fn::Coordinate& c) {
                       if (c.j < 1 || c.j > n) {
                           throw std::domain_error("Coordinate: index out of range");
                       }
                   },
               },
               v_);
}

HoloFunction HoloFunction::kernel_power(const Point& a, double s)
{
    return HoloFunction(fn::KernelPower{a, s}, static_cast<int>(a.size()));
}

HoloFunction HoloFunction::monomial(std::vector<int> exponent, std::complex<double> c)
{
    const int n = static_cast<int>(exponent.size());
    return HoloFunction(fn::Polynomial{{std::move(exponent)}, {c}}, n);
}

HoloFunction HoloFunction::normalized_test(const Point& a, const RadialWeight& w, double p, std::optional<double> gamma)
{
    const int n = static_cast<int>(a.size());
    const double g = gamma ? *gamma : n * (doubling_diagnostics(w).lambda0 + 1.0);
    return HoloFunction(fn::NormalizedTest{a, g, p, w.hat(a.norm())}, n);
}

std::complex<double> HoloFunction::operator()(const Point& z) const
{
    return std::visit(
        overloaded{
            [&](const fn::KernelPower& k) { return std::pow(one_minus_inner(z, k.a), -k.s); },
            [&](const fn::NormalizedTest& t) {
                const double s = 1.0 - t.a.squaredNorm();
                const double e = (t.gamma + n_) / t.p;
                const std::complex<double> d = one_minus_inner(z, t.a);
                const double log_scale = -std::log(t.hat_a) / t.p - n_ * std::log(s) / t.p;
                return std::exp(log_scale + e * (std::log(s) - std::log(d)));
            },
            [&](const fn::LatticeSum& l) {
                std::complex<double> acc = 0.0;
                for (std::size_t k = 0; k < l.coeffs.size(); ++k) {
                    if (l.coeffs[k] == 0.0) {
                        continue;
                    }
                    const std::complex<double> d = one_minus_inner(z, l.eval_centers[k]);
                    acc += l.coeffs[k] * std::exp(l.log_scales[k] - l.t * std::log(d));
                }
                return acc;
            },
            [&](const fn::Polynomial& p) {
                std::complex<double> acc = 0.0;
                for (std::size_t m = 0; m < p.coeffs.size(); ++m) {
                    std::complex<double> term = p.coeffs[m];
                    for (int i = 0; i < n_; ++i) {
                        for (int k = 0; k < p.exponents[m][static_cast<std::size_t>(i)]; ++k) {
                            term *= z(i);
                        }
                    }
                    acc += term;
                }
                return acc;
            },
            [](const fn::Constant& c) { return c.c; },
            [&](const fn::Coordinate& c) { return z(c.j - 1); },
        },
        v_);
}

std::vector<Point> HoloFunction::foci() const
{
    return std::visit(overloaded{
                          [](const fn::KernelPower& k) { return std::vector<Point>{k.a}; },
                          [](const fn::NormalizedTest& t) { return std::vector<Point>{t.a}; },
                          [](const fn::LatticeSum& l) { return l.eval_centers; },
                          [](const auto&) { return std::vector<Point>{}; },
                      },
                      v_);
}

std::string HoloFunction::describe() const
{
    std::ostringstream s;
    std::visit(overloaded{
                   [&](const fn::KernelPower& k) { s << "(1 - <z, " << format_point(k.a) << ">)^-" << k.s; },
                   [&](const fn::NormalizedTest& t) {
                       s << "f_a, a = " << format_point(t.a) << ", gamma = " << t.gamma << ", p = " << t.p;
                   },
                   [&](const fn::LatticeSum& l) {
                       s << "lattice sum, " << l.coeffs.size() << " atoms, t = " << l.t << ", p = " << l.p;
                   },
                   [&](const fn::Polynomial& p) {
                       for (std::size_t m = 0; m < p.coeffs.size(); ++m) {
                           s << (m ? " + " : "") << p.coeffs[m].real();
                           if (p.coeffs[m].imag() != 0.0) {
                               s << (p.coeffs[m].imag() < 0 ? "-" : "+") << std::abs(p.coeffs[m].imag()) << "i";
                           }
                           for (int i = 0; i < n_; ++i) {
                               const int k = p.exponents[m][static_cast<std::size_t>(i)];
                               if (k > 0) {
                                   s << " z_" << (i + 1);
                                   if (k > 1) {
                                       s << "^" << k;
                                   }
                               }
                           }
                       }
                   },
                   [&](const fn::Constant& c) { s << c.c.real() << (c.c.imag() < 0 ? "-" : "+") << std::abs(c.c.imag()) << "i"; },
                   [&](const fn::Coordinate& c) { s << "z_" << c.j; },
               },
               v_);
    return s.str();
}

MeasurableFunction MeasurableFunction::from(const HoloFunction& h)
{
    return {[h](const Point& z) { return h(z); }, h.dimension(), h.foci(), h.describe()};
}

std::complex<double> evaluate(const HoloFunction& f, const Point& z)
{
    require_interior(z, "evaluate");
    if (z.size() != f.dimension()) {
        throw std::domain_error("evaluate: dimension mismatch");
    }
    return f(z);
}

std::complex<double> evaluate(const MeasurableFunction& f, const Point& z)
{
    require_interior(z, "evaluate");
    if (z.size() != f.n) {
        throw std::domain_error("evaluate: dimension mismatch");
    }
    const std::complex<double> v = f(z);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw std::domain_error("evaluate: non-finite value");
    }
    return v;
}

std::vector<double> polar_nodes(const PolarSettings& settings)
{
    return graded_unit_rule(settings.radial_nodes, settings.shells).nodes;
}

PolarResult polar_integrate(int n, const std::vector<Point>& foci, std::size_t outputs, const PolarIntegrand& h,
                            const PolarSettings& settings)
{
    const QuadratureRule rule = graded_unit_rule(settings.radial_nodes, settings.shells);
    const std::size_t nodes = rule.nodes.size();
    std::vector<double> radial(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        radial[i] = 2.0 * n * std::pow(rule.nodes[i], 2 * n - 1) * rule.weights[i];
    }
    // The integrand is held at its last-node value on the remaining annulus.
    const double edge = 1.0 - std::ldexp(1.0, -static_cast<int>(settings.shells) - 1);
    radial.back() += -std::expm1(2.0 * n * std::log(edge));
    const std::size_t tail_start = nodes - std::min(nodes, kTailShells * settings.radial_nodes);
    const std::vector<Point> centers = usable_foci(foci);
    const std::size_t components = 1 + centers.size();

    const McSettings mc{settings.sphere_samples, settings.seed, settings.chunk};
    const McVector est = stratified_means(mc, components, 2 * outputs, [&](Rng& rng, std::size_t st, std::span<double> out) {
        Point zeta = sample_sphere(rng, n);
        if (st > 0) {
            zeta = mobius_on_sphere(centers[st - 1], zeta);
        }
        double density = 1.0;
        for (const auto& c : centers) {
            density += poisson_szego(c, zeta, n);
        }
        density /= static_cast<double>(components);
        std::vector<double> vals(outputs, 0.0);
        for (std::size_t i = 0; i < nodes; ++i) {
            std::fill(vals.begin(), vals.end(), 0.0);
            h(Point(rule.nodes[i] * zeta), i, vals);
            const double f = radial[i] / density;
            for (std::size_t o = 0; o < outputs; ++o) {
                out[o] += f * vals[o];
                if (i >= tail_start) {
                    out[outputs + o] += f * vals[o];
                }
            }
        }
    });

    PolarResult r;
    r.rho = rule.nodes;
    for (std::size_t o = 0; o < outputs; ++o) {
        r.value.push_back(est.mean[o]);
        r.se.push_back(est.se[o]);
        const double total = std::abs(est.mean[o]);
        r.divergent.push_back(total > 0.0 && std::abs(est.mean[outputs + o]) > kTailFraction * total ? 1 : 0);
    }
    return r;
}

namespace {

NormResult root(double M, double se, double p, bool divergent)
{
    NormResult r;
    r.divergent = divergent;
    if (M > 0.0) {
        r.value = std::pow(M, 1.0 / p);
        r.se = r.value * se / (p * M);
    }
    return r;
}

}  // namespace

std::vector<std::vector<NormResult>> bergman_norms(const HoloFunction& f, const std::vector<RadialWeight>& weights,
                                                   const std::vector<double>& ps, const PolarSettings& settings)
{
    for (double p : ps) {
        if (!(p > 0.0)) {
            throw std::domain_error("bergman_norm: p must be positive");
        }
    }
    for (const auto& w : weights) {
        if (w.dimension() != f.dimension()) {
            throw std::domain_error("bergman_norm: weight dimension differs from the function's");
        }
    }
    const std::vector<double> rho = polar_nodes(settings);
    const std::size_t W = weights.size(), P = ps.size();
    std::vector<double> table(rho.size() * W);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        for (std::size_t k = 0; k < W; ++k) {
            table[i * W + k] = weights[k](rho[i]);
        }
    }
    const PolarResult pr = polar_integrate(
        f.dimension(), f.foci(), W * P,
        [&](const Point& z, std::size_t node, std::span<double> out) {
            const double a = std::abs(f(z));
            if (a == 0.0) {
                return;
            }
            const double la = std::log(a);
            for (std::size_t j = 0; j < P; ++j) {
                const double ap = std::exp(ps[j] * la);
                for (std::size_t k = 0; k < W; ++k) {
                    out[k * P + j] = table[node * W + k] * ap;
                }
            }
        },
        settings);
    std::vector<std::vector<NormResult>> out(W, std::vector<NormResult>(P));
    for (std::size_t k = 0; k < W; ++k) {
        for (std::size_t j = 0; j < P; ++j) {
            const std::size_t o = k * P + j;
            out[k][j] = root(pr.value[o], pr.se[o], ps[j], pr.divergent[o] != 0);
        }
    }
    return out;
}

NormResult bergman_norm(const HoloFunction& f, const RadialWeight& w, double p, const PolarSettings& settings)
{
    return bergman_norms(f, {w}, {p}, settings)[0][0];
}

namespace {

struct Integral {
    double value = 0.0;
    double se = 0.0;
    bool divergent = false;
};

Integral lq_integral(const MeasurableFunction& f, const Measure& mu, double q, const PolarSettings& settings)
{
    if (!(q > 0.0)) {
        throw std::domain_error("lq_norm: q must be positive");
    }
    if (f.n != mu.dimension()) {
        throw std::domain_error("lq_norm: dimension mismatch");
    }
    Integral total;
    double var = 0.0;
    const auto& terms = mu.terms();
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const MeasureTerm& term = terms[t];
        PolarSettings s = settings;
        s.seed = t == 0 ? settings.seed : derive_seed(settings.seed, t);
        const PolarResult pr = polar_integrate(
            f.n, pull_back_foci(f.foci, term.map), 1,
            [&](const Point& z, std::size_t, std::span<double> out) {
                const double w = term.weight ? term.weight(z) : 1.0;
                if (w == 0.0) {
                    return;
                }
                const double g = term.density(z);
                if (g == 0.0) {
                    return;
                }
                const double a = std::abs(f(term.map(z)));
                if (a == 0.0) {
                    return;
                }
                out[0] = std::exp(q * std::log(a)) * w * g;
            },
            s);
        total.value += pr.value[0];
        var += pr.se[0] * pr.se[0];
        total.divergent = total.divergent || pr.divergent[0] != 0;
    }
    total.se = std::sqrt(var);
    return total;
}

}  // namespace

NormResult lq_norm(const MeasurableFunction& f, const Measure& mu, double q, const PolarSettings& settings)
{
    const Integral I = lq_integral(f, mu, q, settings);
    return root(I.value, I.se, q, I.divergent);
}

MeasurableFunction apply_difference(const WeightFactor& u, const WeightFactor& v, const SymbolMap& phi,
                                    const SymbolMap& psi, const HoloFunction& f)
{
    const int n = f.dimension();
    if (phi.dimension() != n || psi.dimension() != n) {
        throw std::domain_error("apply_difference: dimension mismatch");
    }
    MeasurableFunction out;
    out.n = n;
    out.f = [u, v, phi, psi, f](const Point& z) { return u(z) * f(phi(z)) - v(z) * f(psi(z)); };
    out.foci = pull_back_foci(f.foci(), phi);
    for (auto& c : pull_back_foci(f.foci(), psi)) {
        out.foci.push_back(std::move(c));
    }
    out.description = "u f(phi) - v f(psi), f = " + f.describe();
    return out;
}

HoloFunction make_lattice_sum(std::vector<std::complex<double>> coeffs, std::vector<Point> centers,
                              std::vector<Point> eval_centers, double t, const RadialWeight& w, double p,
                              std::optional<DoublingDiagnostics> diagnostics)
{
    if (centers.empty()) {
        throw std::domain_error("make_lattice_sum: needs at least one center");
    }
    if (eval_centers.empty()) {
        eval_centers = centers;
    }
    if (coeffs.size() != centers.size() || eval_centers.size() != centers.size()) {
        throw std::domain_error("make_lattice_sum: coefficients, centers and eval centers differ in length");
    }
    if (!(p > 0.0) || !(t > 0.0)) {
        throw std::domain_error("make_lattice_sum: needs p > 0 and t > 0");
    }
    const int n = static_cast<int>(centers.front().size());
    fn::LatticeSum l;
    l.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.size(); ++k) {
        require_interior(centers[k], "make_lattice_sum");
        require_interior(eval_centers[k], "make_lattice_sum");
        require_same_dimension(centers[k], centers.front(), "make_lattice_sum");
        require_same_dimension(eval_centers[k], centers.front(), "make_lattice_sum");
        for (std::size_t j = 0; j < k; ++j) {
            const double d = (centers[j] - centers[k]).norm() == 0.0 ? 0.0 : bergman_distance(centers[j], centers[k]);
            if (d == 0.0) {
                std::ostringstream msg;
                msg << "make_lattice_sum: centers " << j << " and " << k << " coincide; the sequence is not separated";
                throw std::domain_error(msg.str());
            }
            l.min_separation = std::min(l.min_separation, d);
        }
    }
    const DoublingDiagnostics d = diagnostics ? *diagnostics : doubling_diagnostics(w);
    l.exponent_gate_ok = t > n + (d.beta_est + d.lambda0 * n + n) / p;
    for (const auto& a : centers) {
        const double s = 1.0 - a.squaredNorm();
        l.log_scales.push_back((t - n / p) * std::log(s) - std::log(w.hat(a.norm())) / p);
    }
    l.coeffs = std::move(coeffs);
    l.centers = std::move(centers);
    l.eval_centers = std::move(eval_centers);
    l.t = t;
    l.p = p;
    return HoloFunction(std::move(l), n);
}

OscillationRatio oscillation_ratio(const HoloFunction& f, const Point& a, const Point& b, double r1, double r2,
                                   const RadialWeight& w, const RadialWeight& W, double p, double q,
                                   const McSettings& mc)
{
    if (!(0.0 < r2 && r2 < r1 && r1 < 1.0)) {
        throw std::domain_error("oscillation_ratio: needs 0 < r2 < r1 < 1");
    }
    if (!(p > 0.0 && q > 0.0)) {
        throw std::domain_error("oscillation_ratio: needs p, q > 0");
    }
    require_interior(a, "oscillation_ratio");
    require_interior(b, "oscillation_ratio");
    if (!(bergman_distance(a, b) < r2)) {
        throw std::domain_error("oscillation_ratio: b lies outside D(a, r2)");
    }
    const int n = f.dimension();
    const EllipsoidParams e = bergman_ball(a, r1);
    const McVector est = stratified_means(mc, 1, 1, [&](Rng& rng, std::size_t, std::span<double> out) {
        const Point z = e.map_from_unit_ball(sample_ball(rng, n));
        out[0] = std::pow(std::abs(f(z)), p) * W(z);
    });
    OscillationRatio r;
    r.integral = e.volume() * est.mean[0];
    r.integral_se = e.volume() * est.se[0];
    if ((a - b).norm() == 0.0) {
        return r;
    }
    const double num = std::pow(std::abs(f(a) - f(b)), q);
    if (num == 0.0) {
        return r;
    }
    const double scale = std::pow(pseudo_distance(a, b), q) *
                         std::pow(std::pow(1.0 - a.norm(), n) * w.hat(a.norm()), -q / p);
    r.ratio = num / (scale * r.integral);
    r.se = r.ratio * r.integral_se / r.integral;
    return r;
}

HatMuCheck hat_mu_check(const HoloFunction& f, const Measure& mu, const RadialWeight& w, const RadialWeight& W,
                        double r, double p, double q, const HatMuSettings& settings)
{
    if (!(0.0 < p && p <= q)) {
        throw std::domain_error("hat_mu_check: needs 0 < p <= q");
    }
    const int n = f.dimension();
    HatMuCheck c;
    const Integral lhs = lq_integral(MeasurableFunction::from(f), mu, q, settings.norms);
    c.lhs = lhs.value;
    c.lhs_se = lhs.se;
    const NormResult norm = bergman_norm(f, w, p, settings.norms);

    // Outer integral over the ball from a mixture of uniform and Mobius-moved uniform samples.
    const std::vector<Point> centers = usable_foci(f.foci());
    const std::size_t components = 1 + centers.size();
    const double s = q / p;
    const McSettings outer{settings.outer_samples, derive_seed(settings.norms.seed, 0x6f75746572ULL), settings.inner.chunk};
    const McVector est = stratified_means(outer, components, 1, [&](Rng& rng, std::size_t st, std::span<double> out) {
        Point z = sample_ball(rng, n);
        if (st > 0) {
            z = mobius_transform(centers[st - 1], z);
        }
        if (!is_interior(z)) {
            return;
        }
        double density = 1.0;
        for (const auto& a : centers) {
            density += std::pow((1.0 - a.squaredNorm()) / std::norm(1.0 - inner(z, a)), n + 1);
        }
        density /= static_cast<double>(components);
        const double fz = std::pow(std::abs(f(z)), p);
        if (fz == 0.0) {
            return;
        }
        McSettings inner_mc = settings.inner;
        inner_mc.seed = rng.next();
        const MeanValue m = mean_function(mu, w, r, s, z, inner_mc);
        out[0] = fz * W(z) * m.value / density;
    });
    const double factor = norm.value > 0.0 ? std::pow(norm.value, q - p) : (q == p ? 1.0 : 0.0);
    c.rhs = factor * est.mean[0];
    const double rel_norm = norm.value > 0.0 ? (q - p) * norm.se / norm.value : 0.0;
    const double rel_I = est.mean[0] > 0.0 ? est.se[0] / est.mean[0] : 0.0;
    c.rhs_se = std::abs(c.rhs) * std::hypot(rel_norm, rel_I);
    if (c.rhs > 0.0) {
        c.ratio = c.lhs / c.rhs;
        const double rel_lhs = c.lhs > 0.0 ? c.lhs_se / c.lhs : 0.0;
        c.ratio_se = c.ratio * std::hypot(rel_lhs, std::hypot(rel_norm, rel_I));
    }
    return c;
}

std::vector<Point> battery_directions(int n)
{
    std::vector<Point> dirs;
    Point e1 = Point::Zero(n);
    e1(0) = 1.0;
    dirs.push_back(e1);
    Point d2 = Point::Zero(n);
    d2(0) += 1.0;
    d2(n - 1) += std::complex<double>(0.0, 1.0);
    dirs.push_back(d2 / d2.norm());
    Point d3(n);
    for (int i = 0; i < n; ++i) {
        d3(i) = std::polar(1.0 + 0.5 * i, 2.0 + 1.3 * i);
    }
    dirs.push_back(d3 / d3.norm());
    return dirs;
}

std::vector<BatteryEntry> battery(int n, const RadialWeight& w, double p, std::optional<DoublingDiagnostics> diagnostics)
{
    const DoublingDiagnostics d = diagnostics ? *diagnostics : doubling_diagnostics(w);
    const double gamma = n * (d.lambda0 + 1.0);
    std::vector<BatteryEntry> out;
    out.push_back({"1", HoloFunction::constant(n, 1.0)});
    out.push_back({"z_1", HoloFunction::coordinate(n, 1)});
    for (int k = 2; k <= 6; ++k) {
        std::vector<int> e(static_cast<std::size_t>(n), 0);
        e[0] = k;
        out.push_back({"z_1^" + std::to_string(k), HoloFunction::monomial(e)});
    }
    {
        fn::Polynomial poly;
        std::vector<int> zero(static_cast<std::size_t>(n), 0), lin = zero, cub = zero;
        lin[0] = 1;
        cub[static_cast<std::size_t>(n - 1)] += 3;
        poly.exponents = {zero, lin, cub};
        poly.coeffs = {1.0, 0.5, 1.0 / 3.0};
        out.push_back({"1 + z_1/2 + z_n^3/3", HoloFunction(poly, n)});
    }
    out.push_back({"f_a, |a| = 0", HoloFunction::normalized_test(Point::Zero(n), w, p, gamma)});
    const auto dirs = battery_directions(n);
    for (double t : {0.5, 0.9, 0.99}) {
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            std::ostringstream label;
            label << "f_a, |a| = " << t << ", direction " << (j + 1);
            out.push_back({label.str(), HoloFunction::normalized_test(t * dirs[j], w, p, gamma), t >= 0.9});
        }
    }
    const double t_atom = n + (d.beta_est + d.lambda0 * n + n) / p + 0.5;
    {
        std::vector<Point> centers;
        std::vector<std::complex<double>> coeffs;
        for (int k = 1; k <= 4; ++k) {
            centers.push_back((1.0 - std::ldexp(1.0, -k)) * dirs[0]);
            coeffs.emplace_back(1.0 / k);
        }
        out.push_back({"lattice sum, b_k = a_k", make_lattice_sum(coeffs, centers, {}, t_atom, w, p, d)});
    }
    {
        std::vector<Point> centers, evals;
        std::vector<std::complex<double>> coeffs;
        const double radii[] = {0.6, 0.8, 0.9, 0.95};
        for (int k = 0; k < 4; ++k) {
            const Point a = radii[k] * dirs[1];
            centers.push_back(a);
            evals.push_back(perturbed_point(a, frame_for(a), 0, 1.2));
            coeffs.emplace_back((k % 2 ? -1.0 : 1.0) / std::sqrt(k + 1.0));
        }
        out.push_back({"lattice sum, b_k = a_k^{1,N}", make_lattice_sum(coeffs, centers, evals, t_atom, w, p, d)});
    }
    return out;
}

}  // namespace bcl
