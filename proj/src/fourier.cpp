#include "fedonet/fourier.hpp"

#include "fedonet/rng.hpp"

#include <cmath>
#include <numbers>

namespace fedonet {

FreqMatrix sample_frequency_matrix(int mapping_size, int coord_dim, double sigma, std::uint64_t seed) {
    if (mapping_size < 1) throw std::invalid_argument("sample_frequency_matrix: M must be >= 1");
    if (coord_dim < 1) throw std::invalid_argument("sample_frequency_matrix: d must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("sample_frequency_matrix: sigma must be positive");

    FreqMatrix f;
    f.sigma = sigma;
    f.seed = seed;
    f.B.resize(mapping_size, coord_dim);
    Rng rng(seed);
    for (int i = 0; i < mapping_size; ++i)
        for (int j = 0; j < coord_dim; ++j) f.B(i, j) = sigma * rng.normal();
    return f;
}

Vector fourier_embed(const FreqMatrix& freq, const Vector& zeta) {
    if (zeta.size() != freq.coord_dim())
        throw std::invalid_argument("fourier_embed: coordinate dimension mismatch");
    const int m = freq.mapping_size();
    const Vector angles = 2.0 * std::numbers::pi * (freq.B * zeta);
    Vector phi(2 * m);
    const double s2 = std::numbers::sqrt2;
    for (int i = 0; i < m; ++i) {
        phi(i) = s2 * std::sin(angles(i));
        phi(m + i) = s2 * std::cos(angles(i));
    }
    return phi;
}

Matrix fourier_embed_batch(const FreqMatrix& freq, const Matrix& coords) {
    if (coords.cols() != freq.coord_dim())
        throw std::invalid_argument("fourier_embed_batch: coordinate dimension mismatch");
    const int m = freq.mapping_size();
    const Matrix angles = 2.0 * std::numbers::pi * (coords * freq.B.transpose());
    Matrix phi(coords.rows(), 2 * m);
    phi.leftCols(m) = std::numbers::sqrt2 * angles.array().sin();
    phi.rightCols(m) = std::numbers::sqrt2 * angles.array().cos();
    return phi;
}

double whitening_diagnostic(const FreqMatrix& freq, std::int64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("whitening_diagnostic: n_samples must be >= 1");
    const int d = freq.coord_dim();
    const int m = freq.mapping_size();
    Rng rng(seed);

    Vector sin2 = Vector::Zero(m), cos2 = Vector::Zero(m), cross = Vector::Zero(m);
    const std::int64_t block = 4096;
    Matrix zeta(block, d);
    std::int64_t done = 0;
    while (done < n_samples) {
        const std::int64_t take = std::min(block, n_samples - done);
        for (std::int64_t r = 0; r < take; ++r)
            for (int c = 0; c < d; ++c) zeta(r, c) = rng.uniform01();
        const Matrix angles =
            2.0 * std::numbers::pi * (zeta.topRows(take) * freq.B.transpose());
        const Matrix s = angles.array().sin();
        const Matrix c = angles.array().cos();
        sin2 += s.array().square().colwise().sum().matrix().transpose();
        cos2 += c.array().square().colwise().sum().matrix().transpose();
        cross += (s.array() * c.array()).colwise().sum().matrix().transpose();
        done += take;
    }
    const double inv_n = 1.0 / static_cast<double>(n_samples);
    double dev = 0.0;
    for (int i = 0; i < m; ++i) {
        dev = std::max(dev, std::abs(2.0 * sin2(i) * inv_n - 1.0));
        dev = std::max(dev, std::abs(2.0 * cos2(i) * inv_n - 1.0));
        dev = std::max(dev, std::abs(2.0 * cross(i) * inv_n));
    }
    return dev;
}

}  // namespace fedonet
