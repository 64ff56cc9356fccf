#include "memchua/circuit.hpp"
#include "memchua/error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

using namespace memchua;

namespace {

std::vector<std::complex<double>> eigen_oracle(const Matrix3& m)
{
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            a(r, c) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
    }
    Eigen::EigenSolver<Eigen::Matrix3d> es(a);
    std::vector<std::complex<double>> out(es.eigenvalues().begin(), es.eigenvalues().end());
    std::ranges::sort(out, [](auto x, auto y) { return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag(); });
    return out;
}

CircuitParams odd_cubic(double gn_minus_g)
{
    const double g = 1e-4;
    return CircuitParams(1e-8, 1e-7, 0.4, g, g + gn_minus_g, DevicePoly({0, 0, 1e-5, 0, 0}, -1.2, 2.6));
}

}  // namespace

TEST_CASE("nonlinear block current")
{
    const auto table_rn = CircuitParams(fixture::kC1, fixture::kC2, 0.41, 1.0 / 7643.0, 1.0 / 6856.0,
                                        fixture::reference_poly());
    CHECK(nonlinear_current(table_rn, 0.0) == 0.0);
    const double i = nonlinear_current(table_rn, 0.9);
    CHECK(i == doctest::Approx(-1.1775e-4).epsilon(1e-3));
    CHECK(std::abs(i - (-0.9 / 7643.0)) < 0.005 * std::abs(0.9 / 7643.0));

    const auto p = fixture::designed();
    CHECK(nonlinear_conductance(p, 0.0) == doctest::Approx(1.91e-6 - 1.0 / fixture::kRN));
}

TEST_CASE("existence condition")
{
    CHECK(existence_condition(fixture::designed()));
    const auto passive = CircuitParams(1e-8, 1e-7, 0.4, 1e-4, 0.0, fixture::reference_poly());
    CHECK_FALSE(existence_condition(passive));
    // Boundary g_n = g + p1 is excluded.
    const double g = 1.0 / 8.0;
    const auto boundary = CircuitParams(1e-8, 1e-7, 0.4, g, g + 0.25, DevicePoly({0.25, 0, 0, 0, 0}, -1, 1));
    CHECK_FALSE(existence_condition(boundary));
}

TEST_CASE("vector field examples")
{
    const auto p = fixture::designed();
    CHECK(vector_field(p, {0, 0, 0}) == StateVector{0, 0, 0});
    const auto f = vector_field(p, {0, 1, 0});
    CHECK(f.v1 == doctest::Approx(p.g() / p.c1()));
    CHECK(f.v2 == doctest::Approx(-p.g() / p.c2()));
    CHECK(f.i_l == doctest::Approx(-1.0 / p.l()));

    // At the bisection-oracle root near 0.9 V every component is negligible.
    const auto roots = oracle::bisect_roots(
        [&](double v) { return nonlinear_current(p, v) + p.g() * v; }, 0.5, 1.5);
    REQUIRE(roots.size() == 1);
    const double v = roots.front();
    const auto r = vector_field(p, {v, 0, -p.g() * v});
    CHECK(std::abs(r.v1) < 1e-6 * p.g() * v / p.c1());
    CHECK(std::abs(r.v2) < 1e-6 * p.g() * v / p.c2());
    CHECK(r.i_l == 0.0);
}

TEST_CASE("CircuitParams rejects nonphysical values")
{
    const auto poly = fixture::reference_poly();
    CHECK_THROWS_AS(CircuitParams(0.0, 1e-7, 0.4, 1e-4, 1e-4, poly), Error);
    CHECK_THROWS_AS(CircuitParams(1e-8, -1e-7, 0.4, 1e-4, 1e-4, poly), Error);
    CHECK_THROWS_AS(CircuitParams(1e-8, 1e-7, 0.0, 1e-4, 1e-4, poly), Error);
    CHECK_THROWS_AS(CircuitParams(1e-8, 1e-7, 0.4, -1e-4, 1e-4, poly), Error);
    CHECK_THROWS_AS(CircuitParams(1e-8, 1e-7, 0.4, 1e-4, -1e-4, poly), Error);
}

TEST_CASE("jacobian structure and finite-difference agreement")
{
    const auto p = fixture::designed();
    const auto j0 = jacobian(p, {0, 0, 0});
    const auto j1 = jacobian(p, {0.7, -0.3, 2e-5});
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (r == 0 && c == 0) {
                continue;
            }
            CHECK(j0[r][c] == j1[r][c]);
        }
    }

    // Trace at P0 vanishes by construction of G_N.
    CHECK(std::abs(trace(j0)) < 1e-9 * p.g() / p.c1());

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> v(-1.1, 2.4);
    std::uniform_real_distribution<double> i(-3e-4, 3e-4);
    const double i_to_v = p.g();
    for (int trial = 0; trial < 100; ++trial) {
        const StateVector s{v(rng), v(rng), i(rng)};
        const auto j = jacobian(p, s);
        const double h = 1e-6;
        const std::array<StateVector, 3> dirs{StateVector{h, 0, 0}, StateVector{0, h, 0},
                                              StateVector{0, 0, h * i_to_v}};
        for (int c = 0; c < 3; ++c) {
            const auto fp = vector_field(p, s + dirs[c]);
            const auto fm = vector_field(p, s - dirs[c]);
            const double step = c == 2 ? 2 * h * i_to_v : 2 * h;
            const std::array<double, 3> fd{(fp.v1 - fm.v1) / step, (fp.v2 - fm.v2) / step,
                                           (fp.i_l - fm.i_l) / step};
            for (int r = 0; r < 3; ++r) {
                const double scale = std::max({std::abs(j[r][0]), std::abs(j[r][1]), std::abs(j[r][2])});
                CHECK(std::abs(j[r][c] - fd[r]) <= 1e-5 * scale);
            }
        }
    }
}

TEST_CASE("closed-form eigenvalues agree with a general eigensolver")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> e(-3.0, 3.0);
    for (int trial = 0; trial < 300; ++trial) {
        Matrix3 m{};
        for (auto& row : m) {
            for (double& x : row) {
                x = e(rng) * std::pow(10.0, trial % 7);
            }
        }
        const auto ours = eigenvalues(m);
        const auto ref = eigen_oracle(m);
        double radius = 0.0;
        for (const auto& x : ref) {
            radius = std::max(radius, std::abs(x));
        }
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(std::abs(ours[k] - ref[k]) <= 1e-8 * radius);
        }
    }

    // Repeated and degenerate spectra.
    CHECK(std::abs(solve_monic_cubic(0, 0, 0)[0]) == 0.0);
    const auto triple = solve_monic_cubic(-6, 12, -8);  // (x-2)^3
    for (const auto& x : triple) {
        CHECK(std::abs(x - 2.0) < 1e-4);
    }
    const auto mixed = solve_monic_cubic(-1, 1, -1);  // (x-1)(x^2+1)
    CHECK(mixed[0].real() == doctest::Approx(1.0));
    CHECK(std::abs(mixed[1].imag()) == doctest::Approx(1.0));
}

TEST_CASE("equilibria of the designed circuit")
{
    const auto p = fixture::designed();
    const auto eq = find_equilibria(p);
    REQUIRE(eq.size() == 3);
    CHECK(eq[0].label == EquilibriumLabel::p_minus);
    CHECK(eq[1].label == EquilibriumLabel::p0);
    CHECK(eq[2].label == EquilibriumLabel::p_plus);
    CHECK(eq[1].state.v1 == 0.0);
    CHECK(eq[2].state.v1 == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(eq[0].state.v1 == doctest::Approx(fixture::kPMinus).epsilon(1e-8));

    // Same roots as an independent bisection on i_R(v) + g v.
    const auto roots = oracle::bisect_roots([&](double v) { return nonlinear_current(p, v) + p.g() * v; }, -1.55, 2.95,
                                            45001);
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == doctest::Approx(eq[0].state.v1).epsilon(1e-10));
    CHECK(roots[2] == doctest::Approx(eq[2].state.v1).epsilon(1e-10));

    for (const auto& e : eq) {
        CHECK(e.state.v2 == 0.0);
        CHECK(e.state.i_l == -p.g() * e.state.v1);
        CHECK(std::abs(nonlinear_current(p, e.state.v1) + p.g() * e.state.v1) < 1e-12);
        const auto f = vector_field(p, e.state);
        CHECK(std::abs(f.v1) < 1e-9 * p.g() * 0.9 / p.c1());
        CHECK(std::abs(f.v2) < 1e-9 * p.g() * 0.9 / p.c2());
        CHECK(e.in_window);
        CHECK(classify_stability(e).unstable);
        CHECK_FALSE(e.stable);
        CHECK(classify_stability(e).saddle_focus);
    }
}

TEST_CASE("odd cubic device: symmetric roots and a failed existence condition")
{
    const auto eq = find_equilibria(odd_cubic(8.1e-6));
    REQUIRE(eq.size() == 3);
    CHECK(eq[2].state.v1 == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(std::abs(eq[0].state.v1 + eq[2].state.v1) < 1e-13);

    const auto none = find_equilibria(odd_cubic(-1e-6));
    REQUIRE(none.size() == 1);
    CHECK(none[0].label == EquilibriumLabel::p0);
}

TEST_CASE("out-of-window roots are flagged, not dropped")
{
    // Roots at +-2.5 V with a window of [-1.2, 2.6]: -2.5 lies outside the 10% margin, +2.5 inside the window.
    const double g = 1e-4;
    const auto p = CircuitParams(1e-8, 1e-7, 0.4, g, g + 1e-5 * 6.25, DevicePoly({0, 0, 1e-5, 0, 0}, -2.2, 2.6));
    const auto eq = find_equilibria(p);
    REQUIRE(eq.size() == 3);
    CHECK_FALSE(eq[0].in_window);
    CHECK(eq[2].in_window);
}

TEST_CASE("stability classification")
{
    // Passive RLC: lambda^3 + (a+b) lambda^2 + lambda/(L C2) + G/(C1 L C2), a = G/C1, b = G/C2.
    // All coefficients positive and (a+b)/(L C2) > G/(C1 L C2): Routh-Hurwitz stable.
    const auto lin = fixture::linear_rlc();
    const double a = lin.g() / lin.c1();
    const double b = lin.g() / lin.c2();
    const double k1 = 1.0 / (lin.l() * lin.c2());
    const double k0 = lin.g() / (lin.c1() * lin.l() * lin.c2());
    REQUIRE((a + b) * k1 > k0);

    const auto eq = find_equilibria(lin);
    REQUIRE(eq.size() == 1);
    const auto verdict = classify_stability(eq[0]);
    CHECK_FALSE(verdict.unstable);
    CHECK(eq[0].stable);
    for (const auto& x : eq[0].eigenvalues) {
        CHECK(x.real() < 0.0);
    }
    // Frozen from numpy.linalg.eigvals on the same matrix.
    CHECK(verdict.max_real_part == doctest::Approx(-70.21009279).epsilon(1e-8));

    // Same spectrum from the analytic characteristic polynomial.
    const auto analytic = solve_monic_cubic(a + b, k1, k0);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(analytic[k] - eq[0].eigenvalues[k]) < 1e-6 * std::abs(analytic[k]));
    }

    const auto designed = find_equilibria(fixture::designed());
    CHECK(classify_stability(designed[1]).unstable);
    CHECK(classify_stability(designed[2]).unstable);
    // Eigen oracle on P+.
    const auto ref = eigen_oracle(jacobian(fixture::designed(), designed[2].state));
    CHECK(ref[0].real() > 0.0);
}

TEST_CASE("reduced negative conductance stabilizes P+")
{
    // g_n lowered by 8% moves P+ to about 0.27 V where the focus becomes attracting.
    const auto p = fixture::designed().with_g_n(0.92 / fixture::kRN);
    const auto eq = find_equilibria(p);
    REQUIRE(eq.size() == 3);
    CHECK(eq[2].state.v1 == doctest::Approx(0.2739583541975702).epsilon(1e-8));
    CHECK(eq[2].stable);
    CHECK(eigen_oracle(jacobian(p, eq[2].state))[0].real() == doctest::Approx(-323.34882097208003).epsilon(1e-6));
}
