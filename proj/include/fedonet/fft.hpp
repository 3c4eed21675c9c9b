#pragma once

#include <complex>
#include <vector>

namespace fedonet::fft {

using cdouble = std::complex<double>;
using cvec = std::vector<cdouble>;

// In-place forward DFT, unnormalized: X_k = sum_j x_j exp(-2*pi*i*j*k/n).
// Radix-2 for power-of-two lengths, Bluestein otherwise.
void dft(cvec& a);

// In-place inverse DFT including the 1/n factor.
void idft(cvec& a);

cvec dft_real(const std::vector<double>& x);

// Row-major n x n 2-D transforms (rows then columns).
void dft2(cvec& a, int n);
void idft2(cvec& a, int n);

bool is_pow2(std::size_t n);

}  // namespace fedonet::fft
