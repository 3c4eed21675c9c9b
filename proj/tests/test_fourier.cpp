#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fedonet/fourier.hpp"
#include "fedonet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace fedonet;

TEST_CASE("frequency matrix shape, determinism, validation") {
    const FreqMatrix f = sample_frequency_matrix(4, 2, 1.0, 1);
    CHECK(f.B.rows() == 4);
    CHECK(f.B.cols() == 2);
    const FreqMatrix g = sample_frequency_matrix(4, 2, 1.0, 1);
    CHECK((f.B == g.B));
    CHECK_THROWS_AS(sample_frequency_matrix(0, 2, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_frequency_matrix(4, 0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_frequency_matrix(4, 2, 0.0, 1), std::invalid_argument);
}

TEST_CASE("entries follow N(0, sigma^2): Monte-Carlo std") {
    const FreqMatrix f = sample_frequency_matrix(100000, 1, 3.0, 12);
    const double std_hat = std::sqrt(f.B.array().square().mean());
    CHECK(std_hat >= 2.97);
    CHECK(std_hat <= 3.03);
}

TEST_CASE("embedding at zero and the quarter-period point") {
    const FreqMatrix f = sample_frequency_matrix(5, 3, 2.0, 3);
    const Vector phi0 = fourier_embed(f, Vector::Zero(3));
    for (int i = 0; i < 5; ++i) {
        CHECK(phi0(i) == 0.0);
        CHECK(phi0(5 + i) == doctest::Approx(std::numbers::sqrt2));
    }

    FreqMatrix single;
    single.B = Matrix::Ones(1, 1);
    single.sigma = 1.0;
    Vector zeta(1);
    zeta << 0.25;  // 2 pi B zeta = pi/2
    const Vector phi = fourier_embed(single, zeta);
    CHECK(phi(0) == doctest::Approx(std::numbers::sqrt2));
    CHECK(std::abs(phi(1)) < 1e-15);
}

TEST_CASE("norm invariant ||phi||^2 == 2M at machine precision") {
    Rng rng(9);
    for (int m : {1, 16, 128}) {
        const FreqMatrix f = sample_frequency_matrix(m, 2, 7.0, 100 + m);
        for (int rep = 0; rep < 50; ++rep) {
            Vector zeta(2);
            zeta << rng.uniform01(), rng.uniform01();
            const Vector phi = fourier_embed(f, zeta);
            CHECK(std::abs(phi.squaredNorm() - 2.0 * m) <= 1e-12 * 2.0 * m);
        }
    }
}

TEST_CASE("batch embedding agrees with the single-vector path") {
    const FreqMatrix f = sample_frequency_matrix(8, 2, 4.0, 5);
    Rng rng(6);
    Matrix coords(10, 2);
    for (int i = 0; i < coords.size(); ++i) coords.data()[i] = rng.uniform01();
    const Matrix batch = fourier_embed_batch(f, coords);
    for (int r = 0; r < 10; ++r) {
        const Vector one = fourier_embed(f, coords.row(r).transpose());
        CHECK((batch.row(r).transpose() - one).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("kernel symmetry is exact") {
    const FreqMatrix f = sample_frequency_matrix(32, 2, 5.0, 8);
    Rng rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        Vector a(2), b(2);
        a << rng.uniform01(), rng.uniform01();
        b << rng.uniform01(), rng.uniform01();
        const double kab = fourier_embed(f, a).dot(fourier_embed(f, b));
        const double kba = fourier_embed(f, b).dot(fourier_embed(f, a));
        CHECK(kab == kba);
    }
}

TEST_CASE("kernel depends on the coordinate shift only (d=1, Monte-Carlo)") {
    // average k(0.1,0.3) and k(0.4,0.6) over 50 fresh draws of B
    const int m = 64;
    double k1 = 0.0, k2 = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const FreqMatrix f = sample_frequency_matrix(m, 1, 5.0, 1000 + seed);
        Vector a(1), b(1), c(1), d(1);
        a << 0.1;
        b << 0.3;
        c << 0.4;
        d << 0.6;
        k1 += fourier_embed(f, a).dot(fourier_embed(f, b));
        k2 += fourier_embed(f, c).dot(fourier_embed(f, d));
    }
    k1 /= 50.0;
    k2 /= 50.0;
    CHECK(std::abs(k1 - k2) <= 0.05 * 2.0 * m);
}

TEST_CASE("whitening diagnostic: near-identity second moments") {
    // M=64, d=2, sigma=5: the Appendix-style Monte-Carlo bound
    const FreqMatrix f = sample_frequency_matrix(64, 2, 5.0, 4);
    const double dev = whitening_diagnostic(f, 100000, 11);
    CHECK(dev <= 0.05);

    // M=1, d=1, sigma=10: diagonal entries within 0.02 of 1
    const FreqMatrix g = sample_frequency_matrix(1, 1, 10.0, 3);
    Rng rng(14);
    double s2 = 0.0, c2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        Vector zeta(1);
        zeta << rng.uniform01();
        const Vector phi = fourier_embed(g, zeta);
        s2 += phi(0) * phi(0);
        c2 += phi(1) * phi(1);
    }
    CHECK(std::abs(s2 / n - 1.0) <= 0.02);
    CHECK(std::abs(c2 / n - 1.0) <= 0.02);
}

TEST_CASE("whitening deviation shrinks with more samples (median of 3 repeats)") {
    const FreqMatrix f = sample_frequency_matrix(16, 2, 5.0, 21);
    auto median3 = [&](std::int64_t n) {
        double d[3];
        for (int r = 0; r < 3; ++r) d[r] = whitening_diagnostic(f, n, 50 + static_cast<std::uint64_t>(r));
        std::sort(d, d + 3);
        return d[1];
    };
    CHECK(median3(40000) <= median3(10000));
}
