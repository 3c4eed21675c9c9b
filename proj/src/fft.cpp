#include "fedonet/fft.hpp"

#include <numbers>
#include <stdexcept>

namespace fedonet::fft {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace {

// Iterative radix-2 Cooley-Tukey, n a power of two.
void fft_pow2(cvec& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cdouble wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                cdouble u = a[i + j];
                cdouble v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein chirp-z transform for arbitrary n, built on the radix-2 path.
void fft_bluestein(cvec& a, bool inverse) {
    const std::size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    cvec chirp(n);
    for (std::size_t j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the argument small for large j.
        const std::size_t j2 = (j * j) % (2 * n);
        const double ang = sign * std::numbers::pi * static_cast<double>(j2) / static_cast<double>(n);
        chirp[j] = cdouble(std::cos(ang), std::sin(ang));
    }

    cvec b(m, cdouble(0, 0)), c(m, cdouble(0, 0));
    for (std::size_t j = 0; j < n; ++j) b[j] = a[j] * chirp[j];
    c[0] = std::conj(chirp[0]);
    for (std::size_t j = 1; j < n; ++j) c[j] = c[m - j] = std::conj(chirp[j]);

    fft_pow2(b, false);
    fft_pow2(c, false);
    for (std::size_t j = 0; j < m; ++j) b[j] *= c[j];
    fft_pow2(b, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < n; ++j) a[j] = b[j] * scale * chirp[j];
}

void transform(cvec& a, bool inverse) {
    if (a.size() <= 1) return;
    if (is_pow2(a.size()))
        fft_pow2(a, inverse);
    else
        fft_bluestein(a, inverse);
}

}  // namespace

void dft(cvec& a) { transform(a, false); }

void idft(cvec& a) {
    transform(a, true);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (auto& x : a) x *= scale;
}

cvec dft_real(const std::vector<double>& x) {
    cvec a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = cdouble(x[i], 0.0);
    dft(a);
    return a;
}

void dft2(cvec& a, int n) {
    if (a.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("dft2: size mismatch");
    cvec row(n), col(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) row[j] = a[static_cast<std::size_t>(i) * n + j];
        dft(row);
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = row[j];
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = a[static_cast<std::size_t>(i) * n + j];
        dft(col);
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + j] = col[i];
    }
}

void idft2(cvec& a, int n) {
    if (a.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("idft2: size mismatch");
    cvec row(n), col(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) row[j] = a[static_cast<std::size_t>(i) * n + j];
        idft(row);
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = row[j];
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = a[static_cast<std::size_t>(i) * n + j];
        idft(col);
        for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + j] = col[i];
    }
}

}  // namespace fedonet::fft
