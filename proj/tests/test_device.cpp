#include "memchua/device.hpp"
#include "memchua/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace memchua;

namespace {

DevicePoly reference_poly()
{
    return DevicePoly(kReferenceCoeffs, -kReferenceVSetMag, kReferenceVStop);
}

std::vector<IVSample> synthesize(const DevicePoly::Coefficients& c, double lo, double hi, int n)
{
    std::vector<IVSample> out;
    for (int k = 0; k < n; ++k) {
        const double v = lo + (hi - lo) * k / (n - 1);
        out.push_back({v, oracle::current_terms(c, v)});
    }
    return out;
}

}  // namespace

TEST_CASE("eval_current matches term-by-term evaluation")
{
    const auto poly = reference_poly();
    CHECK(eval_current(poly, 0.0) == 0.0);
    // Frozen from the term-by-term oracle.
    CHECK(eval_current(poly, 0.9) == doctest::Approx(1.35282573e-5).epsilon(1e-8));
    CHECK(std::abs(eval_current(poly, 0.9) - 1.35283e-5) < 1e-9);
    CHECK(std::abs(eval_current(poly, -0.9) - -1.98479e-5) < 1e-9);

    for (double v = -1.5; v <= 3.0; v += 0.0625) {
        CHECK(eval_current(poly, v) == doctest::Approx(oracle::current_terms(kReferenceCoeffs, v)).epsilon(1e-12));
    }
}

TEST_CASE("eval_current is linear in the coefficients and zero at the origin")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coeff(-1e-5, 1e-5);
    std::uniform_real_distribution<double> volt(-2.0, 3.0);
    std::uniform_real_distribution<double> scale(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        DevicePoly::Coefficients c{coeff(rng), coeff(rng), coeff(rng), coeff(rng), coeff(rng)};
        const DevicePoly poly(c, -1.0, 2.0);
        const double v = volt(rng);
        const double s = scale(rng);
        CHECK(eval_current(poly, 0.0) == 0.0);
        CHECK(eval_current(poly.scaled(s), v) == doctest::Approx(s * eval_current(poly, v)).epsilon(1e-12));
    }
}

TEST_CASE("eval_conductance matches central differences")
{
    const auto poly = reference_poly();
    for (double v = -1.0; v <= 2.5; v += 0.25) {
        const double h = 1e-5;
        const double fd = (eval_current(poly, v + h) - eval_current(poly, v - h)) / (2 * h);
        CHECK(eval_conductance(poly, v) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("DevicePoly window invariant")
{
    CHECK_THROWS_AS(DevicePoly(kReferenceCoeffs, 0.0, 1.0), Error);
    CHECK_THROWS_AS(DevicePoly(kReferenceCoeffs, -1.0, 0.0), Error);
    CHECK_THROWS_AS(DevicePoly(kReferenceCoeffs, 1.0, -1.0), Error);
    CHECK_NOTHROW(DevicePoly(kReferenceCoeffs, -1.0, 1.0));
}

TEST_CASE("small_signal_conductance")
{
    CHECK(small_signal_conductance(reference_poly()) == 1.91e-6);
    CHECK(small_signal_conductance(DevicePoly({0, 0, 0, 0, 0}, -1, 1)) == 0.0);
    CHECK(small_signal_conductance(reference_poly().scaled(3.0)) == doctest::Approx(3.0 * 1.91e-6));
}

TEST_CASE("fit_poly recovers noiseless coefficients")
{
    const auto samples = synthesize(kReferenceCoeffs, -0.9, 2.6, 50);
    const auto fit = fit_poly(samples, -0.9, 2.6);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(std::abs(fit.poly.coeffs()[k] - kReferenceCoeffs[k]) <= 1e-8 * std::abs(kReferenceCoeffs[k]));
    }
    CHECK(fit.samples_used == 50);
    CHECK(fit.rms_residual < 1e-18);
    CHECK(fit.poly.v_min() == -0.9);
    CHECK(fit.poly.v_max() == 2.6);
}

TEST_CASE("fit_poly round-trip property over random coefficient vectors")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mag(-6.0, -4.0);
    std::bernoulli_distribution sign(0.5);
    std::uniform_real_distribution<double> volt(-1.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        DevicePoly::Coefficients c{};
        for (double& x : c) {
            x = (sign(rng) ? 1.0 : -1.0) * std::pow(10.0, mag(rng));
        }
        std::vector<IVSample> samples;
        const int n = 5 + trial % 20;
        for (int k = 0; k < n; ++k) {
            double v = 0.0;
            while (v == 0.0) {
                v = volt(rng);
            }
            samples.push_back({v, oracle::current_terms(c, v)});
        }
        const auto fit = fit_poly(samples, -1.0, 2.0);
        for (std::size_t k = 0; k < 5; ++k) {
            CHECK(std::abs(fit.poly.coeffs()[k] - c[k]) <= 1e-8 * std::abs(c[k]));
        }
    }
}

TEST_CASE("fit_poly zero target gives zero coefficients")
{
    std::vector<IVSample> samples;
    for (int k = 1; k <= 10; ++k) {
        samples.push_back({0.2 * k - 1.0 + 0.01, 0.0});
    }
    const auto fit = fit_poly(samples, -1.0, 2.0);
    for (double c : fit.poly.coeffs()) {
        CHECK(c == 0.0);
    }
    CHECK(fit.rms_residual == 0.0);
    CHECK(fit.max_abs_residual == 0.0);
}

TEST_CASE("fit_poly rejects underdetermined and singular systems")
{
    const auto three = synthesize(kReferenceCoeffs, -0.5, 1.5, 3);
    try {
        (void)fit_poly(three, -0.9, 2.6);
        FAIL("expected underdetermined");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::underdetermined);
    }

    // Repeated voltages and zeros do not count.
    std::vector<IVSample> repeated{{0.0, 0.0}, {0.5, 1e-6}, {0.5, 1e-6}, {1.0, 3e-6}, {1.0, 3e-6}, {1.5, 5e-6}, {-0.5, -1e-6}};
    try {
        (void)fit_poly(repeated, -0.9, 2.6);
        FAIL("expected underdetermined");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::underdetermined);
    }

    // Samples outside the window are ignored.
    auto outside = synthesize(kReferenceCoeffs, 3.0, 4.0, 20);
    CHECK_THROWS_AS((void)fit_poly(outside, -0.9, 2.6), Error);

    // Five distinct voltages packed within 1e-9 V make the scaled system singular.
    std::vector<IVSample> packed;
    for (int k = 0; k < 5; ++k) {
        const double v = 1.0 + 1e-9 * k;
        packed.push_back({v, oracle::current_terms(kReferenceCoeffs, v)});
    }
    try {
        (void)fit_poly(packed, -0.9, 2.6);
        FAIL("expected singular");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::singular);
        CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
}

TEST_CASE("default fit window keeps a margin from the switching edge")
{
    const auto w = default_fit_window(1.2, 2.6);
    CHECK(w.v_min == doctest::Approx(-1.08));
    CHECK(w.v_max == 2.6);
}

TEST_CASE("DeviceState and StateTable invariants")
{
    CHECK_THROWS_AS(DeviceState(0.0, 1.2, 2.6, kReferenceCoeffs), Error);
    CHECK_THROWS_AS(DeviceState(1e5, -1.2, 2.6, kReferenceCoeffs), Error);
    CHECK_THROWS_AS(DeviceState(1e5, 1.2, 0.0, kReferenceCoeffs), Error);

    const DeviceState s(1e5, 1.2, 2.6, kReferenceCoeffs);
    CHECK(s.poly().v_min() == -1.2);
    CHECK(s.poly().v_max() == 2.6);

    CHECK_THROWS_AS(StateTable({}), Error);
    CHECK_THROWS_AS(StateTable({s, s}), Error);
}

TEST_CASE("state_at: identity, exact rows and scaling law")
{
    const DeviceState ref(4e5, 1.2, 2.6, kReferenceCoeffs);
    const StateTable single({ref});
    CHECK(state_at(single, 4e5) == ref);

    const auto half = state_at(single, 2e5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(half.poly().coeffs()[k] == doctest::Approx(2.0 * kReferenceCoeffs[k]).epsilon(1e-15));
    }
    CHECK(half.v_set_mag() == 1.2);
    CHECK(half.r_prog() == 2e5);

    CHECK_THROWS_AS((void)state_at(single, 0.0), Error);
    CHECK_THROWS_AS((void)state_at(single, -5.0), Error);
}

TEST_CASE("state_at interpolates log-linearly between rows")
{
    DevicePoly::Coefficients lo_c{1e-5, 0, 1e-5, 0, 0};
    DevicePoly::Coefficients hi_c{1e-6, 0, 3e-5, 0, 1e-6};
    const DeviceState lo(1e4, 0.8, 2.0, lo_c);
    const DeviceState hi(1e6, 1.6, 2.8, hi_c);
    const StateTable table({lo, hi});

    CHECK(state_at(table, 1e4) == lo);
    CHECK(state_at(table, 1e6) == hi);

    const auto mid = state_at(table, 1e5);  // geometric midpoint
    CHECK(mid.v_set_mag() == doctest::Approx(1.2));
    CHECK(mid.v_stop() == doctest::Approx(2.4));
    CHECK(mid.poly().p(1) == doctest::Approx(5.5e-6));
    CHECK(mid.poly().p(3) == doctest::Approx(2e-5));

    // Outside: scaled from the nearest row, window kept.
    const auto above = state_at(table, 2e6);
    CHECK(above.poly().p(3) == doctest::Approx(1.5e-5));
    CHECK(above.v_set_mag() == 1.6);
    const auto below = state_at(table, 5e3);
    CHECK(below.poly().p(1) == doctest::Approx(2e-5));
    CHECK(below.v_set_mag() == 0.8);
}

TEST_CASE("state_at reproduces table rows bit-for-bit")
{
    std::vector<DeviceState> rows;
    for (int k = 0; k < 6; ++k) {
        const double r = 1e5 * std::pow(1.7, k);
        rows.emplace_back(r, 0.9 + 0.1 * k, 2.0 + 0.1 * k,
                          DevicePoly::Coefficients{1e-6 / (k + 1), 1e-7 * k, 1e-5, -1e-6 * k, 1e-6});
    }
    const StateTable table(rows);
    for (const auto& row : table.states()) {
        CHECK(state_at(table, row.r_prog()) == row);
    }
}

TEST_CASE("reference state uses the 0.1 V read resistance")
{
    const auto s = reference_state();
    CHECK(s.r_prog() == doctest::Approx(0.1 / oracle::current_terms(kReferenceCoeffs, 0.1)).epsilon(1e-14));
    CHECK(s.r_prog() == doctest::Approx(470128.7).epsilon(1e-6));
    CHECK(s.v_set_mag() == kReferenceVSetMag);
    CHECK(s.v_stop() == kReferenceVStop);
}
