#pragma once

#include "fedonet/nn.hpp"

#include <cstdint>

namespace fedonet {

// Gaussian frequency matrix of the random Fourier feature map. Frozen after
// creation; the seed is kept so checkpoints can reproduce it.
struct FreqMatrix {
    Matrix B;  // (M, d), entries i.i.d. N(0, sigma^2)
    double sigma = 0.0;
    std::uint64_t seed = 0;

    int mapping_size() const { return static_cast<int>(B.rows()); }
    int coord_dim() const { return static_cast<int>(B.cols()); }
};

FreqMatrix sample_frequency_matrix(int mapping_size, int coord_dim, double sigma, std::uint64_t seed);

// phi(zeta) = sqrt(2) * [sin(2 pi B zeta); cos(2 pi B zeta)], sines first.
// The sqrt(2) factor makes E[phi phi^T] approach the identity for uniform
// zeta; ||phi||^2 == 2M pointwise. Callers normalize coordinates to [0,1]
// per axis beforehand.
Vector fourier_embed(const FreqMatrix& freq, const Vector& zeta);

// Row-per-coordinate batch version: (q, d) -> (q, 2M).
Matrix fourier_embed_batch(const FreqMatrix& freq, const Matrix& coords);

// Monte-Carlo whitening check over n_samples uniform draws on [0,1]^d:
// max deviation of the per-row second-moment blocks from the identity,
// i.e. max over rows i of |E[2 sin^2] - 1|, |E[2 cos^2] - 1|, |E[2 sin cos]|.
// Cross-row correlations are excluded: they vanish in expectation over B
// but not for a fixed draw (two near-duplicate rows correlate at ~1), so
// the full-matrix max-abs is not a meaningful whitening measure.
double whitening_diagnostic(const FreqMatrix& freq, std::int64_t n_samples, std::uint64_t seed);

}  // namespace fedonet
