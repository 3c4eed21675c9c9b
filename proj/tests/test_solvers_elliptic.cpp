#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fedonet/evaluation.hpp"
#include "fedonet/fft.hpp"
#include "fedonet/rng.hpp"
#include "fedonet/solvers.hpp"

#include <cmath>
#include <numbers>

using namespace fedonet;

TEST_CASE("grf_2d: determinism and zero mean") {
    const Matrix a = sample_grf_2d(32, 3.0, 3.0, 9);
    const Matrix b = sample_grf_2d(32, 3.0, 3.0, 9);
    CHECK((a == b));
    CHECK(a.rows() == 32);

    // spatial average of the mean field is consistent with zero; probe
    // points are held to a looser multiple of their standard error
    const int n_draws = 1000;
    Matrix mean = Matrix::Zero(32, 32);
    double point_var = 0.0;
    for (int s = 0; s < n_draws; ++s) {
        const Matrix f = sample_grf_2d(32, 3.0, 3.0, mix_seed(100, static_cast<std::uint64_t>(s)));
        mean += f;
        point_var += f(5, 9) * f(5, 9);
    }
    mean /= static_cast<double>(n_draws);
    point_var /= static_cast<double>(n_draws);
    const double se = std::sqrt(point_var / n_draws);
    CHECK(std::abs(mean.mean()) <= 3.0 * se);
    CHECK(std::abs(mean(5, 9)) <= 4.0 * se);
    CHECK(std::abs(mean(20, 3)) <= 4.0 * se);
}

TEST_CASE("grf_2d: mode coefficients carry the prescribed variance") {
    // E|u_hat(k)|^2 = ((2 pi)^2 |k|^2 + tau^2)^(-alpha) in the convention
    // f_j = sum_k u_hat(k) exp(2 pi i j k / n)
    const int n = 32;
    const double alpha = 3.0, tau = 3.0;
    const int n_draws = 2000;
    double var10 = 0.0, var22 = 0.0;
    for (int s = 0; s < n_draws; ++s) {
        const Matrix f = sample_grf_2d(n, alpha, tau, mix_seed(55, static_cast<std::uint64_t>(s)));
        fft::cvec a(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = fft::cdouble(f(i, j), 0.0);
        fft::dft2(a, n);
        var10 += std::norm(a[static_cast<std::size_t>(1) * n + 0]) / (static_cast<double>(n) * n * n * n);
        var22 += std::norm(a[static_cast<std::size_t>(2) * n + 2]) / (static_cast<double>(n) * n * n * n);
    }
    var10 /= n_draws;
    var22 /= n_draws;
    const double pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    CHECK(var10 == doctest::Approx(std::pow(pi2 * 1.0 + tau * tau, -alpha)).epsilon(0.15));
    CHECK(var22 == doctest::Approx(std::pow(pi2 * 8.0 + tau * tau, -alpha)).epsilon(0.15));
}

TEST_CASE("grf_2d: shell energies track the covariance law") {
    const int n = 32;
    const double alpha = 3.0, tau = 3.0;
    const int n_draws = 200;
    std::vector<double> avg(static_cast<std::size_t>(n / 2) + 1, 0.0);
    for (int s = 0; s < n_draws; ++s) {
        const auto e =
            energy_spectrum_2d(sample_grf_2d(n, alpha, tau, mix_seed(7, static_cast<std::uint64_t>(s))));
        for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += e[k];
    }
    for (auto& v : avg) v /= static_cast<double>(n_draws);

    // analytic oracle: expected shell energy is the sum of sigma_k^2 over
    // the same lattice shells
    std::vector<double> want(avg.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        const int k1 = i <= n / 2 ? i : i - n;
        for (int j = 0; j < n; ++j) {
            const int k2 = j <= n / 2 ? j : j - n;
            if (k1 == 0 && k2 == 0) continue;
            const double lam = 4.0 * std::numbers::pi * std::numbers::pi *
                                   (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2) +
                               tau * tau;
            int shell = static_cast<int>(
                std::lround(std::hypot(static_cast<double>(k1), static_cast<double>(k2))));
            shell = std::min(shell, n / 2);
            want[static_cast<std::size_t>(shell)] += std::pow(lam, -alpha);
        }
    }
    for (int k : {2, 4, 8}) {
        const double got_ratio = avg[static_cast<std::size_t>(2 * k)] / avg[static_cast<std::size_t>(k)];
        const double want_ratio = want[static_cast<std::size_t>(2 * k)] / want[static_cast<std::size_t>(k)];
        CHECK(got_ratio == doctest::Approx(want_ratio).epsilon(0.20));
    }
}

TEST_CASE("poisson: zero forcing gives the zero solution") {
    const Matrix u = solve_poisson_fd(Matrix::Zero(32, 32));
    CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("poisson: manufactured solution at n=128 within 1e-3") {
    const int n = 128;
    const double h = 1.0 / static_cast<double>(n - 1);
    Matrix f(n, n), exact(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double sx = std::sin(std::numbers::pi * i * h);
            const double sy = std::sin(std::numbers::pi * j * h);
            exact(i, j) = sx * sy;
            f(i, j) = -2.0 * std::numbers::pi * std::numbers::pi * sx * sy;
        }
    const Matrix u = solve_poisson_fd(f);
    const double rel = std::sqrt((u - exact).squaredNorm() / exact.squaredNorm());
    CHECK(rel <= 1e-3);
    // boundary rows stay exactly zero
    CHECK(u.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(u.col(n - 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("poisson: symmetric forcing gives a symmetric solution") {
    const int n = 48;
    Matrix f = sample_grf_2d(n, 3.0, 3.0, 17);
    f = 0.5 * (f + f.transpose().eval());
    const Matrix u = solve_poisson_fd(f);
    CHECK((u - u.transpose().eval()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("poisson: factorization reuse matches one-shot solves") {
    PoissonSolver solver(32);
    const Matrix f = sample_grf_2d(32, 3.0, 3.0, 23);
    const Matrix a = solver.solve(f);
    const Matrix b = solve_poisson_fd(f);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("naca mask: symmetric airfoil is symmetric about the chord row") {
    const int n = 256;
    const auto mask = naca_airfoil_mask(0.0, 0.4, 0.12, n);
    // the chord sits on the grid center line (n-1)/2, between rows: j pairs
    // with n-1-j exactly
    int mismatches = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n / 2; ++j)
            if (mask[static_cast<std::size_t>(i) * n + j] !=
                mask[static_cast<std::size_t>(i) * n + (n - 1 - j)])
                ++mismatches;
    CHECK(mismatches == 0);
}

TEST_CASE("naca mask: interior is nonempty and touches no boundary pixel") {
    const int n = 256;
    for (double m : {0.0, 0.05, 0.09}) {
        const auto mask = naca_airfoil_mask(m, 0.4, 0.2, n);
        std::int64_t count = 0;
        for (auto v : mask) count += v;
        CHECK(count > 0);
        bool boundary_clear = true;
        for (int i = 0; i < n; ++i)
            if (mask[static_cast<std::size_t>(i) * n + 0] || mask[static_cast<std::size_t>(i) * n + n - 1] ||
                mask[static_cast<std::size_t>(0) * n + i] || mask[static_cast<std::size_t>(n - 1) * n + i])
                boundary_clear = false;
        CHECK(boundary_clear);
    }
}

TEST_CASE("naca mask: area grows with thickness") {
    auto area = [](double t) {
        const auto mask = naca_airfoil_mask(0.04, 0.4, t, 256);
        std::int64_t count = 0;
        for (auto v : mask) count += v;
        return count;
    };
    const auto a1 = area(0.1), a2 = area(0.2), a3 = area(0.4);
    CHECK(a1 < a2);
    CHECK(a2 < a3);
}

TEST_CASE("naca mask: parameter validation") {
    CHECK_THROWS_AS(naca_airfoil_mask(0.05, 0.0, 0.2, 256), std::invalid_argument);
    CHECK_THROWS_AS(naca_airfoil_mask(0.05, 1.0, 0.2, 256), std::invalid_argument);
    CHECK_THROWS_AS(naca_airfoil_mask(0.05, 0.4, 0.0, 256), std::invalid_argument);
}

TEST_CASE("sdf: centered disk matches the analytic signed distance") {
    const int n = 256;
    const double radius = 64.0;
    const double c = 0.5 * (n - 1);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::hypot(i - c, j - c) <= radius) mask[static_cast<std::size_t>(i) * n + j] = 1;
    const Matrix s = signed_distance_field(mask, n);

    double smax = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) smax = std::max(smax, std::abs(s(i, j)));
    CHECK(smax == 1.0);  // normalization is exact

    // the farthest point from the disk is a grid corner
    const double raw_max = std::hypot(c, c) - radius;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double expect = std::hypot(i - c, j - c) - radius;
            worst = std::max(worst, std::abs(s(i, j) * raw_max - expect));
        }
    CHECK(worst <= 1.5);

    // sign convention: positive outside, negative inside; the zero level
    // set sits within one pixel of the mask boundary
    CHECK(s(0, 0) > 0.0);
    CHECK(s(n / 2, n / 2) < 0.0);
    for (int i = 1; i + 1 < n; ++i)
        for (int j = 1; j + 1 < n; ++j) {
            if (!mask[static_cast<std::size_t>(i) * n + j]) continue;
            const bool edge = !mask[static_cast<std::size_t>(i - 1) * n + j] ||
                              !mask[static_cast<std::size_t>(i + 1) * n + j] ||
                              !mask[static_cast<std::size_t>(i) * n + j - 1] ||
                              !mask[static_cast<std::size_t>(i) * n + j + 1];
            if (edge) CHECK(std::abs(s(i, j)) * raw_max <= 1.0 + 1e-9);
        }
}

TEST_CASE("sdf: rejects single-region masks") {
    std::vector<std::uint8_t> all_one(16 * 16, 1);
    std::vector<std::uint8_t> all_zero(16 * 16, 0);
    CHECK_THROWS_AS(signed_distance_field(all_one, 16), std::invalid_argument);
    CHECK_THROWS_AS(signed_distance_field(all_zero, 16), std::invalid_argument);
}
