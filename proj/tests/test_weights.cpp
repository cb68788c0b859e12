#include "bcl/quadrature.hpp"
#include "bcl/weights.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace bcl;

namespace {

Point along_e1(int n, double t)
{
    Point p = Point::Zero(n);
    p(0) = t;
    return p;
}

// Log-log slope of ratios against 1/(1-|a|) by least squares.
double loglog_slope(const std::vector<double>& radii, const std::vector<double>& values)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double x = std::log(1.0 - radii[i]);
        const double y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST_CASE("hat omega closed forms")
{
    for (int n : {1, 2, 3}) {
        const auto w = RadialWeight::standard(0.0, n);
        CHECK(hat_omega(w, 0.25) == doctest::Approx(0.75).epsilon(1e-14));
        CHECK(hat_omega(w, 1.0) == 0.0);
    }
    // c_1 = 2 and 2 (s - s^3/3) evaluated on [0, 1].
    const auto w1 = RadialWeight::standard(1.0, 1);
    CHECK(hat_omega(w1, 0.0) == doctest::Approx(2.0 * (1.0 - 1.0 / 3.0)).epsilon(1e-14));
    CHECK(hat_omega(w1, 1.0) == 0.0);
    CHECK_THROWS_AS(hat_omega(w1, -0.1), std::domain_error);
    CHECK_THROWS_AS(hat_omega(w1, 1.1), std::domain_error);
}

TEST_CASE("hat omega by quadrature for non-integer exponents")
{
    // alpha = 1/2, n = 1: c = 3/2 and int (1-s^2)^{1/2} = (s sqrt(1-s^2) + asin s)/2.
    const auto w = RadialWeight::standard(0.5, 1);
    for (double r : {0.0, 0.3, 0.9, 0.999, 1.0 - 1e-6}) {
        const double anti = 0.5 * (r * std::sqrt(1.0 - r * r) + std::asin(r));
        const double expected = 1.5 * (std::numbers::pi / 4.0 - anti);
        CHECK(w.hat(r) == doctest::Approx(expected).epsilon(1e-8));
    }
    // (1-r)(1 - log(1-r)) integrates to 2h - h log h with h = 1 - r.
    const RadialWeight pl(PowerLog{0.0, 1.0}, 1);
    for (double r : {0.0, 0.5, 0.99, 1.0 - 1e-9}) {
        const double h = 1.0 - r;
        CHECK(pl.hat(r) == doctest::Approx(2.0 * h - h * std::log(h)).epsilon(1e-8));
    }
    const RadialWeight pa(PowerLog{1.5, 0.0}, 2);
    CHECK(pa.hat(0.7) == doctest::Approx(std::pow(0.3, 2.5) / 2.5).epsilon(1e-10));
}

TEST_CASE("hat omega is nonincreasing")
{
    const std::vector<RadialWeight> ws{RadialWeight::standard(2.0, 2), RadialWeight::standard(-0.5, 1),
                                       RadialWeight(PowerLog{0.3, -2.0}, 1), twisted_weight(RadialWeight::standard(1.0, 2))};
    for (const auto& w : ws) {
        double prev = w.hat(0.0);
        for (int k = 1; k <= 400; ++k) {
            const double r = 1.0 - std::exp2(-k / 10.0);
            const double h = w.hat(r);
            CHECK(h <= prev * (1.0 + 1e-12));
            CHECK(h >= 0.0);
            prev = h;
        }
        CHECK(w.hat(1.0) == 0.0);
    }
}

TEST_CASE("tabulated weights")
{
    Tabulated t;
    for (int i = 0; i <= 999; ++i) {
        t.r.push_back(i / 1000.0);
        t.values.push_back(std::exp(i / 1000.0));
    }
    t.tail_exponent = 0.0;
    const RadialWeight w(t, 1);
    // e^r is reproduced exactly by log-linear interpolation; the tail is flat at e^{0.999}.
    const double last = std::exp(0.999);
    CHECK(w(0.4567) == doctest::Approx(std::exp(0.4567)).epsilon(1e-12));
    CHECK(w.hat(0.3) == doctest::Approx(last - std::exp(0.3) + last * 0.001).epsilon(1e-12));

    Tabulated bad;
    bad.r = {0.0, 0.5};
    bad.values = {1.0, -1.0};
    CHECK_THROWS_AS(RadialWeight(bad, 1), std::invalid_argument);
    Tabulated spiky;
    spiky.r = {0.0, 0.5, 0.9};
    spiky.values = {1.0, 10.0, 1e4};
    CHECK_THROWS_AS(RadialWeight(spiky, 1), std::invalid_argument);
    CHECK_THROWS_AS(RadialWeight::standard(-1.0, 1), std::invalid_argument);
}

TEST_CASE("total mass")
{
    CHECK(RadialWeight::standard(2.0, 3).total_mass() == 1.0);
    // (1-r) in n = 1: 2 int_0^1 (1-r) r dr = 1/3.
    const RadialWeight pl(PowerLog{1.0, 0.0}, 1);
    CHECK(pl.total_mass() == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("doubling diagnostics")
{
    const auto d0 = doubling_diagnostics(RadialWeight::standard(0.0, 1));
    CHECK(d0.doubling_sup == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d0.reverse_pair.K == 2.0);
    CHECK(d0.reverse_pair.C == doctest::Approx(2.0).epsilon(1e-9));

    const auto w1 = RadialWeight::standard(1.0, 1);
    const double r = 1.0 - std::exp2(-20.0);
    CHECK(w1.hat(r) / w1.hat(0.5 * (1.0 + r)) == doctest::Approx(4.0).epsilon(0.02));

    for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
        for (int n : {1, 2}) {
            const auto d = doubling_diagnostics(RadialWeight::standard(alpha, n));
            CHECK(d.lambda_est <= d.beta_est);
            CHECK(d.lambda_est >= alpha + 1.0 - 0.05);
            CHECK(d.beta_est <= alpha + 1.0 + 0.05);
            CHECK(d.doubling_sup >= 1.0);
            CHECK(d.reverse_pair.C > 1.0);
            CHECK(std::isfinite(d.C_upper));
            CHECK(d.C_lower > 0.0);
            CHECK(d.lambda0 == doctest::Approx(d.beta_est + 1.0));
        }
    }
    CHECK_THROWS_AS(doubling_diagnostics(RadialWeight::standard(0.0, 1), {0.5, 0.4, 0.6, 0.7}), std::invalid_argument);
}

TEST_CASE("twisted weight")
{
    const auto w0 = twisted_weight(RadialWeight::standard(0.0, 2));
    for (double r : {0.0, 0.3, 0.999}) {
        CHECK(w0(r) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const auto w1 = twisted_weight(RadialWeight::standard(1.0, 1));
    auto oracle = [](double r) { return 2.0 * ((1.0 - r) - (1.0 - r * r * r) / 3.0) / (1.0 - r); };
    for (double r : {0.0, 0.25, 1.0 - std::exp2(-2.0), 1.0 - std::exp2(-10.0)}) {
        CHECK(w1(r) == doctest::Approx(oracle(r)).epsilon(1e-9));
    }
    for (double r : {0.1234, 0.777, 0.99, 0.9995}) {
        CHECK(w1(r) == doctest::Approx(oracle(r)).epsilon(1e-3));
    }
    for (double alpha : {0.0, 1.0, 2.0}) {
        const auto w = RadialWeight::standard(alpha, 2);
        const auto W = twisted_weight(w);
        double lo = 1e300, hi = 0;
        for (int i = 0; i <= 999; ++i) {
            const double r = i / 1000.0;
            const double q = W.hat(r) / w.hat(r);
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        MESSAGE("alpha " << alpha << ": W-hat / omega-hat in [" << lo << ", " << hi << "]");
        CHECK(lo >= 0.25);
        CHECK(hi <= 4.0);
    }
}

TEST_CASE("ball mass")
{
    McSettings mc;
    mc.samples = 20000;
    for (int n : {1, 2, 3}) {
        const auto w = RadialWeight::standard(0.0, n);
        const auto m = ball_mass(w, Point(Point::Zero(n)), 0.8, BallRegion::BergmanBall, mc);
        CHECK(m.value == doctest::Approx(std::pow(std::tanh(0.8), 2.0 * n)).epsilon(1e-12));
        const auto block = ball_mass(w, Point(Point::Zero(n)), 0.8, BallRegion::CarlesonBlock, mc);
        CHECK(block.value == 1.0);
    }
    // Block at a = 1/2 in the disc: lens between |z| < 1 and |1 - z| < 1/2, area over pi.
    {
        const double R = 1.0, r = 0.5, d = 1.0;
        const double lens = r * r * std::acos((d * d + r * r - R * R) / (2 * d * r)) +
                            R * R * std::acos((d * d + R * R - r * r) / (2 * d * R)) -
                            0.5 * std::sqrt((-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R));
        const auto m = ball_mass(RadialWeight::standard(0.0, 1), along_e1(1, 0.5), 1.0, BallRegion::CarlesonBlock, mc);
        CHECK(std::abs(m.value - lens / std::numbers::pi) < 4.0 * m.se);
    }
    for (double alpha : {0.0, 1.0, 2.0}) {
        for (auto region : {BallRegion::BergmanBall, BallRegion::CarlesonBlock}) {
            const auto w = RadialWeight::standard(alpha, 2);
            double lo = 1e300, hi = 0;
            std::vector<double> ratios;
            for (double t : {0.0, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999, 0.9999}) {
                const auto m = ball_mass(w, along_e1(2, t), 0.8, region, mc);
                CHECK_FALSE(m.flagged);
                ratios.push_back(m.value / m.comparator);
                lo = std::min(lo, ratios.back());
                hi = std::max(hi, ratios.back());
            }
            MESSAGE("alpha " << alpha << " region " << static_cast<int>(region) << ": ratio in [" << lo << ", " << hi << "]");
            CHECK(lo > 0.0);
            CHECK(std::isfinite(hi));
            // The ratio settles as |a| -> 1.
            CHECK(ratios.back() == doctest::Approx(ratios[ratios.size() - 2]).epsilon(0.05));
        }
    }
}

TEST_CASE("sphere kernel average")
{
    CHECK(sphere_kernel_average(1, 1.0, 0.6) == doctest::Approx(1.0 / (1.0 - 0.36)).epsilon(1e-13));
    // Circle average by the trapezoid rule, spectrally accurate for periodic integrands.
    auto circle = [](double c, double x) {
        const int m = 4096;
        double s = 0;
        for (int k = 0; k < m; ++k) {
            const double th = 2 * std::numbers::pi * k / m;
            s += std::pow(std::norm(1.0 - x * std::polar(1.0, th)), -c);
        }
        return s / m;
    };
    CHECK(sphere_kernel_average(1, 1.7, 0.9) == doctest::Approx(circle(1.7, 0.9)).epsilon(1e-10));
    // In n = 2 the first coordinate of a uniform sphere point is uniform in the disc.
    auto disc = [](double c, double x) {
        const auto radial = [&](double rho) {
            const int m = 2048;
            double s = 0;
            for (int k = 0; k < m; ++k) {
                s += std::pow(std::norm(1.0 - x * rho * std::polar(1.0, 2 * std::numbers::pi * k / m)), -c);
            }
            return 2.0 * rho * s / m;
        };
        // Gauss-Legendre in rho on [0, 1].
        const auto rule = gauss_legendre(64, 0.0, 1.0);
        double s = 0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            s += rule.weights[i] * radial(rule.nodes[i]);
        }
        return s;
    };
    CHECK(sphere_kernel_average(2, 1.3, 0.7) == doctest::Approx(disc(1.3, 0.7)).epsilon(1e-9));
    CHECK_THROWS_AS(sphere_kernel_average(1, 1.0, 1.0), std::domain_error);
}

TEST_CASE("kernel integral")
{
    const auto w0 = RadialWeight::standard(0.0, 2);
    const auto k0 = kernel_integral(w0, Point(Point::Zero(2)), 3.0, 0.0);
    CHECK(k0.value == doctest::Approx(1.0).epsilon(1e-8));

    // Flatness of integral / proxy as |a| -> 1.
    std::vector<double> radii;
    for (int i = 0; i < 9; ++i) {
        radii.push_back(1.0 - 0.5 * std::pow(0.02, i / 8.0));
    }
    for (double alpha : {0.0, 1.0}) {
        const auto w = RadialWeight::standard(alpha, 1);
        const auto d = doubling_diagnostics(w);
        for (double extra : {0.25, 0.5}) {
            std::vector<double> ratios;
            for (double t : radii) {
                const auto k = kernel_integral(w, along_e1(1, t), d.lambda0 + extra, 0.0, d);
                CHECK_FALSE(k.out_of_theory);
                CHECK_FALSE(k.divergent);
                ratios.push_back(k.value / k.proxy);
            }
            const double slope = loglog_slope(radii, ratios);
            MESSAGE("alpha " << alpha << " lambda0+" << extra << ": slope " << slope);
            CHECK(std::abs(slope) < 0.1);
        }
    }

    // Past beta the radial integral of omega / (1-|z|^2)^t diverges; it is flagged.
    const auto w1 = RadialWeight::standard(1.0, 1);
    const auto d1 = doubling_diagnostics(w1);
    const auto kd = kernel_integral(w1, along_e1(1, 0.5), d1.lambda0 + 0.5, d1.beta_est + 0.5, d1);
    CHECK(kd.divergent);
    CHECK_FALSE(kd.out_of_theory);
    // Below the integrability threshold the one-sided bound holds with a fixed constant.
    double hi = 0;
    for (double t : radii) {
        const auto k = kernel_integral(w1, along_e1(1, t), d1.lambda0 + 0.5, 0.5, d1);
        CHECK_FALSE(k.divergent);
        CHECK(k.out_of_theory);
        hi = std::max(hi, k.value / k.proxy);
    }
    CHECK(hi < 10.0);
    CHECK(kernel_integral(w1, along_e1(1, 0.5), 0.5, 0.0, d1).out_of_theory);
}
