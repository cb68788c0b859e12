#include "bcl/weights.hpp"

#include "bcl/quadrature.hpp"
#include "bcl/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bcl {

namespace {

bool is_nonnegative_integer(double x) { return x >= 0.0 && std::abs(x - std::round(x)) < 1e-12; }

double binomial(int n, int k)
{
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

// Deepest dyadic shell whose endpoints stay distinct from 1 in double precision.
constexpr std::size_t kMaxShells = 48;

// Per-panel contributions over [0, 1/2] and dyadic shells 1..shells.
std::vector<double> shell_contributions(const std::function<double(double)>& integrand, double rel_tol,
                                        std::size_t shells)
{
    shells = std::min(shells, kMaxShells);
    std::vector<double> parts;
    parts.reserve(shells + 1);
    parts.push_back(integrate_adaptive(integrand, 0.0, 0.5, rel_tol, 0.0).value);
    for (std::size_t k = 1; k <= shells; ++k) {
        const double lo = 1.0 - std::ldexp(1.0, -static_cast<int>(k));
        const double hi = 1.0 - std::ldexp(1.0, -static_cast<int>(k) - 1);
        parts.push_back(integrate_adaptive(integrand, lo, hi, rel_tol, 0.0).value);
    }
    return parts;
}

}  // namespace

RadialWeight::RadialWeight(WeightVariant variant, int n) : variant_(std::move(variant)), n_(n)
{
    if (n < 1) {
        throw std::invalid_argument("RadialWeight: dimension must be positive");
    }
    if (auto* s = std::get_if<StandardAlpha>(&variant_)) {
        if (!(s->alpha > -1.0) || !std::isfinite(s->alpha)) {
            throw std::invalid_argument("RadialWeight: StandardAlpha needs alpha > -1");
        }
        normalizer_ = std::exp(std::lgamma(n + s->alpha + 1.0) - std::lgamma(n + 1.0) - std::lgamma(s->alpha + 1.0));
        total_mass_ = 1.0;
        return;
    }
    if (auto* p = std::get_if<PowerLog>(&variant_)) {
        if (!(p->alpha > -1.0) || !std::isfinite(p->alpha) || !std::isfinite(p->b)) {
            throw std::invalid_argument("RadialWeight: PowerLog needs alpha > -1 and finite b");
        }
    } else {
        auto& t = std::get<Tabulated>(variant_);
        if (t.r.size() != t.values.size() || t.r.size() < 2) {
            throw std::invalid_argument("RadialWeight: Tabulated needs at least two (r, value) pairs");
        }
        for (std::size_t i = 0; i < t.r.size(); ++i) {
            if (!(t.r[i] >= 0.0 && t.r[i] < 1.0) || (i > 0 && !(t.r[i] > t.r[i - 1]))) {
                throw std::invalid_argument("RadialWeight: Tabulated nodes must increase strictly within [0, 1)");
            }
            if (!(t.values[i] > 0.0) || !std::isfinite(t.values[i])) {
                throw std::invalid_argument("RadialWeight: Tabulated values must be positive and finite");
            }
        }
        if (t.r.front() > 0.0) {
            t.r.insert(t.r.begin(), 0.0);
            t.values.insert(t.values.begin(), t.values.front());
        }
        log_values_.resize(t.values.size());
        std::transform(t.values.begin(), t.values.end(), log_values_.begin(), [](double v) { return std::log(v); });
        const std::size_t m = t.r.size() - 1;
        if (t.tail_exponent) {
            tail_exponent_ = *t.tail_exponent;
        } else {
            tail_exponent_ = (log_values_[m] - log_values_[m - 1]) / (std::log1p(-t.r[m]) - std::log1p(-t.r[m - 1]));
        }
        if (!(tail_exponent_ > -1.0) || !std::isfinite(tail_exponent_)) {
            throw std::invalid_argument("RadialWeight: Tabulated tail exponent must exceed -1 (weight not integrable)");
        }
        suffix_.assign(m + 1, 0.0);
        suffix_[m] = t.values[m] * (1.0 - t.r[m]) / (tail_exponent_ + 1.0);
        for (std::size_t i = m; i-- > 0;) {
            const double d = t.r[i + 1] - t.r[i];
            const double k = (log_values_[i + 1] - log_values_[i]) / d;
            const double seg = std::abs(k * d) < 1e-300 ? d * t.values[i] : t.values[i] * std::expm1(k * d) / k;
            suffix_[i] = suffix_[i + 1] + seg;
        }
    }
    const double two_n = 2.0 * n_;
    total_mass_ = two_n * integrate_radial(*this, [two_n](double rho) { return std::pow(rho, two_n - 1.0); });
    if (!(total_mass_ > 0.0) || !std::isfinite(total_mass_)) {
        throw std::invalid_argument("RadialWeight: total mass is not finite and positive");
    }
}

bool RadialWeight::has_closed_form() const
{
    const auto* s = std::get_if<StandardAlpha>(&variant_);
    return s != nullptr && is_nonnegative_integer(s->alpha);
}

double RadialWeight::operator()(double r) const
{
    if (const auto* s = std::get_if<StandardAlpha>(&variant_)) {
        if (s->alpha == 0.0) {
            return normalizer_;
        }
        return normalizer_ * std::pow((1.0 - r) * (1.0 + r), s->alpha);
    }
    if (const auto* p = std::get_if<PowerLog>(&variant_)) {
        const double x = 1.0 - r;
        return std::pow(x, p->alpha) * std::pow(1.0 - std::log(x), p->b);
    }
    const auto& t = std::get<Tabulated>(variant_);
    const std::size_t m = t.r.size() - 1;
    if (r >= t.r[m]) {
        return t.values[m] * std::pow((1.0 - r) / (1.0 - t.r[m]), tail_exponent_);
    }
    const auto it = std::upper_bound(t.r.begin(), t.r.end(), r);
    const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - t.r.begin() - 1, 0));
    const double f = (r - t.r[i]) / (t.r[i + 1] - t.r[i]);
    return std::exp(log_values_[i] + f * (log_values_[i + 1] - log_values_[i]));
}

double RadialWeight::hat_tabulated(double r) const
{
    const auto& t = std::get<Tabulated>(variant_);
    const std::size_t m = t.r.size() - 1;
    if (r >= t.r[m]) {
        return t.values[m] * (1.0 - t.r[m]) / (tail_exponent_ + 1.0) *
               std::pow((1.0 - r) / (1.0 - t.r[m]), tail_exponent_ + 1.0);
    }
    const auto it = std::upper_bound(t.r.begin(), t.r.end(), r);
    const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - t.r.begin() - 1, 0));
    const double k = (log_values_[i + 1] - log_values_[i]) / (t.r[i + 1] - t.r[i]);
    const double d = t.r[i + 1] - r;
    const double at_r = (*this)(r);
    const double seg = std::abs(k * d) < 1e-300 ? d * at_r : at_r * std::expm1(k * d) / k;
    return seg + suffix_[i + 1];
}

double RadialWeight::hat(double r) const
{
    if (r >= 1.0) {
        return 0.0;
    }
    const double h = 1.0 - r;
    if (const auto* s = std::get_if<StandardAlpha>(&variant_)) {
        const double a = s->alpha;
        if (is_nonnegative_integer(a)) {
            // int_0^h x^a (2-x)^a dx expanded binomially in (2-x)^a.
            const int ia = static_cast<int>(std::round(a));
            double sum = 0.0;
            for (int k = 0; k <= ia; ++k) {
                const double sign = (k % 2 == 0) ? 1.0 : -1.0;
                sum += sign * binomial(ia, k) * std::ldexp(1.0, ia - k) * std::pow(h, ia + k + 1) / (ia + k + 1);
            }
            return normalizer_ * sum;
        }
        // x = h t^{1/(a+1)} absorbs the endpoint singularity of x^a.
        const double e = 1.0 / (a + 1.0);
        auto g = [h, a, e](double t) { return std::pow(2.0 - h * std::pow(t, e), a); };
        return normalizer_ * std::pow(h, a + 1.0) * e * integrate_adaptive(g, 0.0, 1.0, 1e-12).value;
    }
    if (const auto* p = std::get_if<PowerLog>(&variant_)) {
        const double e = 1.0 / (p->alpha + 1.0);
        const double base = 1.0 - std::log(h);
        auto g = [base, e, p](double y) { return std::exp(-y) * std::pow(base + y * e, p->b); };
        // y = -log t; the integrand decays like e^-y, so [0, 120] is exhaustive.
        constexpr std::array<double, 6> breaks{0.0, 2.0, 8.0, 24.0, 48.0, 120.0};
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            total += integrate_adaptive(g, breaks[i], breaks[i + 1], 1e-12).value;
        }
        return std::pow(h, p->alpha + 1.0) * e * total;
    }
    return hat_tabulated(r);
}

std::string RadialWeight::describe() const
{
    std::ostringstream out;
    if (const auto* s = std::get_if<StandardAlpha>(&variant_)) {
        out << "standard(alpha=" << s->alpha << ")";
    } else if (const auto* p = std::get_if<PowerLog>(&variant_)) {
        out << "power-log(alpha=" << p->alpha << ", b=" << p->b << ")";
    } else {
        out << "tabulated(" << std::get<Tabulated>(variant_).r.size() << " nodes)";
    }
    return out.str();
}

double hat_omega(const RadialWeight& w, double r)
{
    if (!(r >= 0.0 && r <= 1.0)) {
        throw std::domain_error("hat_omega: r must lie in [0, 1]");
    }
    return w.hat(r);
}

double integrate_radial(const RadialWeight& w, const std::function<double(double)>& g, double rel_tol,
                        std::size_t shells)
{
    const auto parts = shell_contributions([&](double rho) { return w(rho) * g(rho); }, rel_tol, shells);
    double total = 0.0;
    for (double p : parts) {
        total += p;
    }
    const double edge = 1.0 - std::ldexp(1.0, -static_cast<int>(parts.size()));
    return total + g(edge) * w.hat(edge);
}

std::vector<double> dyadic_grid(int depth)
{
    std::vector<double> grid;
    for (int k = 0; k <= depth; ++k) {
        grid.push_back(1.0 - std::ldexp(1.0, -k));
    }
    return grid;
}

DoublingDiagnostics doubling_diagnostics(const RadialWeight& w, const std::vector<double>& grid)
{
    if (grid.size() < 4) {
        throw std::invalid_argument("doubling_diagnostics: grid needs at least four points");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] < 1.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw std::invalid_argument("doubling_diagnostics: grid must increase strictly within [0, 1)");
        }
    }
    DoublingDiagnostics d;
    std::vector<double> hats(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        hats[i] = w.hat(grid[i]);
        d.doubling_sup = std::max(d.doubling_sup, hats[i] / w.hat(0.5 * (1.0 + grid[i])));
    }
    for (double K = 2.0; K <= 1048576.0; K *= 2.0) {
        double c = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            c = std::min(c, hats[i] / w.hat(1.0 - (1.0 - grid[i]) / K));
        }
        d.reverse_pair = {c, K};
        if (c > 1.0) {
            break;
        }
    }

    const std::size_t tail = grid.size() / 2;
    d.lambda_est = std::numeric_limits<double>::infinity();
    d.beta_est = -std::numeric_limits<double>::infinity();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = tail; i < grid.size(); ++i) {
        const double x = std::log1p(-grid[i]);
        const double y = std::log(hats[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        if (i + 1 < grid.size()) {
            const double slope = std::log(hats[i] / hats[i + 1]) / (std::log1p(-grid[i]) - std::log1p(-grid[i + 1]));
            d.lambda_est = std::min(d.lambda_est, slope);
            d.beta_est = std::max(d.beta_est, slope);
        }
    }
    const double m = static_cast<double>(grid.size() - tail);
    d.regression_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    d.C_upper = 0.0;
    d.C_lower = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double ratio = hats[i] / hats[j];
            const double x = (1.0 - grid[i]) / (1.0 - grid[j]);
            d.C_upper = std::max(d.C_upper, ratio / std::pow(x, d.beta_est));
            d.C_lower = std::min(d.C_lower, ratio / std::pow(x, d.lambda_est));
        }
    }
    d.lambda0 = d.beta_est + 1.0;
    return d;
}

RadialWeight twisted_weight(const RadialWeight& w)
{
    if (const auto* s = std::get_if<StandardAlpha>(&w.variant()); s != nullptr && s->alpha == 0.0) {
        return RadialWeight(StandardAlpha{0.0}, w.dimension());
    }
    Tabulated t;
    for (int j = 0; j < 32; ++j) {
        t.r.push_back(j / 64.0);
    }
    // Sixteen nodes per octave of 1-r, down to 1 - 2^-40.
    for (int k = 16; k <= 640; ++k) {
        t.r.push_back(1.0 - std::exp2(-k / 16.0));
    }
    for (double r : t.r) {
        t.values.push_back(w.hat(r) / (1.0 - r));
    }
    return RadialWeight(std::move(t), w.dimension());
}

BallMass ball_mass(const RadialWeight& w, const Point& a, double r, BallRegion region, const McSettings& mc,
                   double target_rel_se)
{
    require_interior(a, "ball_mass");
    const Eigen::Index n = a.size();
    if (n != w.dimension()) {
        throw std::invalid_argument("ball_mass: weight and point dimensions differ");
    }
    BallMass out;
    const double len = a.norm();
    out.comparator = std::pow(1.0 - len, static_cast<double>(n)) * w.hat(len);

    if (region == BallRegion::BergmanBall) {
        const EllipsoidParams e = bergman_ball(a, r);
        const McVector est = stratified_means(mc, 1, 1, [&](Rng& rng, std::size_t, std::span<double> v) {
            v[0] = w(e.map_from_unit_ball(sample_ball(rng, n)).norm());
        });
        out.value = e.volume() * est.mean[0];
        out.se = e.volume() * est.se[0];
    } else if (len == 0.0) {
        out.value = w.total_mass();
        out.se = 0.0;
    } else {
        // In the frame with xi = e_1 the block lies in {|1-z_1| < delta} x {|z'|^2 < 2 delta}.
        const double delta = 1.0 - len;
        const auto frame = frame_for(a);
        const double side = std::sqrt(2.0 * delta);
        const double box = static_cast<double>(n) * delta * delta * std::pow(2.0 * delta, static_cast<double>(n - 1));
        const McVector est = stratified_means(mc, 1, 1, [&](Rng& rng, std::size_t, std::span<double> v) {
            Point local(n);
            local(0) = 1.0 + delta * sample_ball(rng, 1)(0);
            if (n > 1) {
                local.tail(n - 1) = side * sample_ball(rng, n - 1);
            }
            const double rad = local.norm();
            if (rad < 1.0 && std::abs(1.0 - local(0)) < delta) {
                v[0] = w(rad);
            }
        });
        out.value = box * est.mean[0];
        out.se = box * est.se[0];
    }
    out.flagged = out.se > target_rel_se * out.value;
    return out;
}

double sphere_kernel_average(int n, double c, double x)
{
    if (!(x >= 0.0 && x < 1.0)) {
        throw std::domain_error("sphere_kernel_average: requires 0 <= x < 1");
    }
    const double x2 = x * x;
    double term = 1.0;
    double sum = 1.0;
    for (long k = 0; k < 50000000; ++k) {
        const double ratio = (c + k) * (c + k) / ((k + 1.0) * (n + k)) * x2;
        term *= ratio;
        sum += term;
        if (term < 1e-17 * sum && ratio < 1.0) {
            break;
        }
    }
    return sum;
}

KernelIntegral kernel_integral(const RadialWeight& w, const Point& a, double lambda, double t,
                               std::optional<DoublingDiagnostics> diagnostics)
{
    require_interior(a, "kernel_integral");
    const int n = w.dimension();
    if (a.size() != n) {
        throw std::invalid_argument("kernel_integral: weight and point dimensions differ");
    }
    if (!diagnostics) {
        diagnostics = doubling_diagnostics(w);
    }
    KernelIntegral out;
    out.out_of_theory = !(lambda > diagnostics->lambda0) || !(t == 0.0 || t > diagnostics->beta_est);
    const double len = a.norm();
    const double c = 0.5 * (lambda * n + n);
    const double two_n = 2.0 * n;
    auto integrand = [&](double rho) {
        return two_n * std::pow(rho, two_n - 1.0) * w(rho) * std::pow((1.0 - rho) * (1.0 + rho), -t) *
               sphere_kernel_average(n, c, rho * len);
    };
    const auto parts = shell_contributions(integrand, 1e-9, kMaxShells);
    const std::size_t kShells = parts.size() - 1;
    double total = 0.0;
    for (double p : parts) {
        total += p;
    }
    // Geometric decay of the last shells extrapolates the uncovered tail.
    double log_ratio = 0.0;
    constexpr std::size_t kTrend = 8;
    for (std::size_t k = kShells - kTrend; k < kShells; ++k) {
        log_ratio += std::log2(parts[k + 1] / parts[k]);
    }
    log_ratio /= kTrend;
    out.divergent = !(log_ratio < -0.02);
    if (!out.divergent) {
        const double q = std::exp2(log_ratio);
        total += parts.back() * q / (1.0 - q);
    }
    out.value = total;
    out.proxy = w.hat(len) / std::pow(1.0 - len, lambda * n + t);
    return out;
}

}  // namespace bcl
