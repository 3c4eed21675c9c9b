#include "fedonet/solvers.hpp"

#include "fedonet/fft.hpp"
#include "fedonet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace fedonet {

using fft::cdouble;
using fft::cvec;

namespace {

constexpr double kPi = std::numbers::pi;

// Signed integer frequency for DFT index j of length n.
inline int signed_freq(int j, int n) { return j <= n / 2 ? j : j - n; }

// Spectral coefficients in the convention u_j = sum_k c_k exp(2 pi i j k / n).
cvec phys_to_spec(const Vector& u) {
    const int n = static_cast<int>(u.size());
    cvec c(n);
    for (int j = 0; j < n; ++j) c[j] = cdouble(u(j), 0.0);
    fft::dft(c);
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : c) x *= inv;
    return c;
}

Vector spec_to_phys(const cvec& c) {
    cvec a = c;
    fft::idft(a);
    const double n = static_cast<double>(c.size());
    Vector u(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) u(static_cast<Eigen::Index>(j)) = a[j].real() * n;
    return u;
}

void zero_high_modes(cvec& c, int cutoff) {
    const int n = static_cast<int>(c.size());
    for (int j = 0; j < n; ++j)
        if (std::abs(signed_freq(j, n)) > cutoff) c[j] = cdouble(0.0, 0.0);
}

bool all_finite(const cvec& c) {
    for (const auto& x : c)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

}  // namespace

// --- Gaussian random fields ------------------------------------------------

Matrix sample_grf_2d(int n, double alpha, double tau, std::uint64_t seed) {
    if (n < 8) throw std::invalid_argument("sample_grf_2d: n must be >= 8");
    Rng rng(seed);
    cvec a(static_cast<std::size_t>(n) * n);
    for (auto& x : a) x = cdouble(rng.normal(), 0.0);
    fft::dft2(a, n);
    // Filtering white noise keeps the Hermitian symmetry exact, so the
    // synthesized field is real. E|W(k)|^2 = n^2, so the spectral
    // coefficient sigma_k * W(k) / n has the prescribed variance; the
    // trailing factor n combines 1/n with the n^2 of the inverse transform.
    for (int i = 0; i < n; ++i) {
        const double k1 = static_cast<double>(signed_freq(i, n));
        for (int j = 0; j < n; ++j) {
            const double k2 = static_cast<double>(signed_freq(j, n));
            double sigma_k = 0.0;
            if (i != 0 || j != 0) {
                const double lam = 4.0 * kPi * kPi * (k1 * k1 + k2 * k2) + tau * tau;
                sigma_k = std::pow(lam, -alpha / 2.0);
            }
            a[static_cast<std::size_t>(i) * n + j] *= sigma_k;
        }
    }
    fft::idft2(a, n);
    Matrix f(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f(i, j) = a[static_cast<std::size_t>(i) * n + j].real() * static_cast<double>(n);
    return f;
}

Vector sample_burgers_ic(int nx, std::uint64_t seed) {
    if (nx < 8 || !fft::is_pow2(static_cast<std::size_t>(nx)))
        throw std::invalid_argument("sample_burgers_ic: nx must be a power of two >= 8");
    Rng rng(seed);
    cvec c(static_cast<std::size_t>(nx), cdouble(0.0, 0.0));
    // Modes drawn in ascending k; the Nyquist mode is left at zero (its
    // amplitude is ~1e-9 under this covariance).
    for (int k = 1; k < nx / 2; ++k) {
        const double om = 2.0 * kPi * static_cast<double>(k);
        const double sigma_k = 25.0 * std::pow(om * om + 25.0, -2.0);
        const double re = rng.normal() * sigma_k / std::numbers::sqrt2;
        const double im = rng.normal() * sigma_k / std::numbers::sqrt2;
        c[static_cast<std::size_t>(k)] = cdouble(re, im);
        c[static_cast<std::size_t>(nx - k)] = cdouble(re, -im);
    }
    return spec_to_phys(c);
}

// --- Poisson ----------------------------------------------------------------

PoissonSolver::PoissonSolver(int n) : n_(n), h_(1.0 / static_cast<double>(n - 1)) {
    if (n < 3) throw std::invalid_argument("PoissonSolver: n must be >= 3");
    const int m = n - 2;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(5) * m * m);
    auto id = [m](int i, int j) { return i * m + j; };
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            trips.emplace_back(id(i, j), id(i, j), 4.0);
            if (i > 0) trips.emplace_back(id(i, j), id(i - 1, j), -1.0);
            if (i < m - 1) trips.emplace_back(id(i, j), id(i + 1, j), -1.0);
            if (j > 0) trips.emplace_back(id(i, j), id(i, j - 1), -1.0);
            if (j < m - 1) trips.emplace_back(id(i, j), id(i, j + 1), -1.0);
        }
    }
    Eigen::SparseMatrix<double> a(m * m, m * m);
    a.setFromTriplets(trips.begin(), trips.end());
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) throw SolverError("PoissonSolver: factorization failed");
}

Matrix PoissonSolver::solve(const Matrix& f) const {
    if (f.rows() != n_ || f.cols() != n_)
        throw std::invalid_argument("PoissonSolver: forcing grid size mismatch");
    if (!f.allFinite()) throw std::invalid_argument("PoissonSolver: forcing must be finite");
    const int m = n_ - 2;
    const double h2 = h_ * h_;
    Vector b(m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) b(i * m + j) = -h2 * f(i + 1, j + 1);
    Vector x = llt_.solve(b);

    Matrix u = Matrix::Zero(n_, n_);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) u(i + 1, j + 1) = x(i * m + j);

    double resid = 0.0;
    for (int i = 1; i < n_ - 1; ++i)
        for (int j = 1; j < n_ - 1; ++j) {
            const double lhs = 4.0 * u(i, j) - u(i - 1, j) - u(i + 1, j) - u(i, j - 1) - u(i, j + 1);
            resid = std::max(resid, std::abs(lhs - (-h2 * f(i, j))));
        }
    const double bnorm = b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
    if (resid > 1e-10 * bnorm && resid > 0.0)
        throw SolverError("PoissonSolver: residual " + std::to_string(resid) + " exceeds tolerance " +
                          std::to_string(1e-10 * bnorm));
    return u;
}

Matrix solve_poisson_fd(const Matrix& f) {
    PoissonSolver solver(static_cast<int>(f.rows()));
    return solver.solve(f);
}

// --- Burgers ----------------------------------------------------------------

Matrix solve_burgers(const Vector& s, double nu, int nt) {
    const int nx = static_cast<int>(s.size());
    if (nx < 8) throw std::invalid_argument("solve_burgers: nx must be >= 8");
    if (!(nu > 0.0)) throw std::invalid_argument("solve_burgers: nu must be positive");
    if (nt < 2) throw std::invalid_argument("solve_burgers: nt must be >= 2");

    const int cutoff = nx / 3;
    const double dx = 1.0 / static_cast<double>(nx);
    const double save_dt = 1.0 / static_cast<double>(nt - 1);
    const double dt_max = 0.25 * dx * dx / nu;
    const int substeps = static_cast<int>(std::ceil(save_dt / dt_max));
    const double dt = save_dt / static_cast<double>(substeps);

    std::vector<double> wavenum(static_cast<std::size_t>(nx));
    for (int j = 0; j < nx; ++j) wavenum[static_cast<std::size_t>(j)] = 2.0 * kPi * signed_freq(j, nx);

    auto rhs = [&](const cvec& c) {
        cvec da = c;
        zero_high_modes(da, cutoff);
        Vector u = spec_to_phys(da);
        Vector w = u.array().square();
        cvec wh = phys_to_spec(w);
        zero_high_modes(wh, cutoff);
        cvec out(static_cast<std::size_t>(nx));
        for (int j = 0; j < nx; ++j) {
            const double k = wavenum[static_cast<std::size_t>(j)];
            // -1/2 d/dx (u^2) + nu u_xx
            out[static_cast<std::size_t>(j)] =
                cdouble(0.0, -0.5 * k) * wh[static_cast<std::size_t>(j)] -
                nu * k * k * c[static_cast<std::size_t>(j)];
        }
        return out;
    };

    cvec c = phys_to_spec(s);
    Matrix traj(nt, nx);
    traj.row(0) = s.transpose();
    cvec k1, k2, k3, k4, tmp(static_cast<std::size_t>(nx));
    for (int snap = 1; snap < nt; ++snap) {
        for (int step = 0; step < substeps; ++step) {
            k1 = rhs(c);
            for (int j = 0; j < nx; ++j) tmp[j] = c[j] + 0.5 * dt * k1[j];
            k2 = rhs(tmp);
            for (int j = 0; j < nx; ++j) tmp[j] = c[j] + 0.5 * dt * k2[j];
            k3 = rhs(tmp);
            for (int j = 0; j < nx; ++j) tmp[j] = c[j] + dt * k3[j];
            k4 = rhs(tmp);
            for (int j = 0; j < nx; ++j)
                c[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if (!all_finite(c))
            throw SolverError("solve_burgers: non-finite state at snapshot " + std::to_string(snap));
        traj.row(snap) = spec_to_phys(c).transpose();
    }
    return traj;
}

// --- Lorenz systems ----------------------------------------------------------

Matrix integrate_lorenz63_from(const Eigen::Vector3d& init, double T, int nsteps, double sigma,
                               double rho, double beta) {
    if (!init.allFinite()) throw std::invalid_argument("integrate_lorenz63: state must be finite");
    if (nsteps < 2) throw std::invalid_argument("integrate_lorenz63: nsteps must be >= 2");
    const double dt = T / static_cast<double>(nsteps - 1);
    auto rhs = [&](const Eigen::Vector3d& v) {
        return Eigen::Vector3d(sigma * (v.y() - v.x()), v.x() * (rho - v.z()) - v.y(),
                               v.x() * v.y() - beta * v.z());
    };
    Eigen::Vector3d v = init;
    Matrix traj(nsteps, 3);
    traj.row(0) = v.transpose();
    for (int i = 1; i < nsteps; ++i) {
        const Eigen::Vector3d k1 = rhs(v);
        const Eigen::Vector3d k2 = rhs(v + 0.5 * dt * k1);
        const Eigen::Vector3d k3 = rhs(v + 0.5 * dt * k2);
        const Eigen::Vector3d k4 = rhs(v + dt * k3);
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        traj.row(i) = v.transpose();
    }
    return traj;
}

Matrix integrate_lorenz63(double x0, double T, int nsteps, double sigma, double rho, double beta) {
    return integrate_lorenz63_from(Eigen::Vector3d(x0, 12.0, 12.0), T, nsteps, sigma, rho, beta);
}

Matrix integrate_lorenz96(const Vector& x0, double forcing, double dt, int nsteps, int keep) {
    const int n = static_cast<int>(x0.size());
    if (n < 4) throw std::invalid_argument("integrate_lorenz96: need at least 4 sites");
    if (keep < 1 || keep > nsteps + 1)
        throw std::invalid_argument("integrate_lorenz96: keep must be in [1, nsteps+1]");
    auto rhs = [&](const Vector& x) {
        Vector d(n);
        for (int i = 0; i < n; ++i) {
            const int ip1 = (i + 1) % n;
            const int im1 = (i - 1 + n) % n;
            const int im2 = (i - 2 + n) % n;
            d(i) = (x(ip1) - x(im2)) * x(im1) - x(i) + forcing;
        }
        return d;
    };
    Vector x = x0;
    Matrix out(keep, n);
    const int first_kept = nsteps - keep + 1;
    if (first_kept == 0) out.row(0) = x.transpose();
    for (int step = 1; step <= nsteps; ++step) {
        const Vector k1 = rhs(x);
        const Vector k2 = rhs(x + 0.5 * dt * k1);
        const Vector k3 = rhs(x + 0.5 * dt * k2);
        const Vector k4 = rhs(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite())
            throw SolverError("integrate_lorenz96: non-finite state at step " + std::to_string(step));
        if (step >= first_kept) out.row(step - first_kept) = x.transpose();
    }
    return out;
}

// --- Allen-Cahn ---------------------------------------------------------------

Vector ac_initial_series(const double (&a)[3], const double (&b)[3], int nx) {
    if (nx < 8) throw std::invalid_argument("ac_initial_series: nx must be >= 8");
    Vector s(nx);
    for (int j = 0; j < nx; ++j) {
        // exact endpoints and midpoint: x = (2j - nx)/nx
        const double x = static_cast<double>(2 * j - nx) / static_cast<double>(nx);
        double v = 0.0;
        for (int k = 1; k <= 3; ++k) {
            const double xp = std::pow(x, 2 * k);
            v += a[k - 1] * xp * std::cos(k * kPi * x) + b[k - 1] * xp * std::sin(k * kPi * x);
        }
        s(j) = v;
    }
    return s;
}

Vector sample_ac_initial(std::uint64_t seed, int nx) {
    Rng rng(seed);
    double a[3], b[3];
    for (int k = 0; k < 3; ++k) {
        a[k] = rng.uniform01();
        b[k] = rng.uniform01();
    }
    return ac_initial_series(a, b, nx);
}

Matrix solve_allen_cahn(const Vector& s, double eps, double dt, int nt) {
    const int nx = static_cast<int>(s.size());
    if (nx < 8) throw std::invalid_argument("solve_allen_cahn: nx must be >= 8");
    const double dx = 2.0 / static_cast<double>(nx);
    if (eps * dt / (dx * dx) > 0.5)
        throw std::invalid_argument("solve_allen_cahn: eps*dt/dx^2 violates explicit stability");
    Vector u = s, lap(nx);
    Matrix traj(nt, nx);
    for (int step = 1; step <= nt; ++step) {
        for (int j = 0; j < nx; ++j) {
            const int jm = (j - 1 + nx) % nx;
            const int jp = (j + 1) % nx;
            lap(j) = (u(jm) - 2.0 * u(j) + u(jp)) / (dx * dx);
        }
        u += dt * (eps * lap.array() + 5.0 * u.array() - 5.0 * u.array().cube()).matrix();
        if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 10.0)
            throw SolverError("solve_allen_cahn: blow-up at step " + std::to_string(step));
        traj.row(step - 1) = u.transpose();
    }
    return traj;
}

// --- Kuramoto-Sivashinsky -------------------------------------------------------

Vector ks_initial_series(const double (&coeff)[4], int nx, double length_scale) {
    if (nx < 8) throw std::invalid_argument("ks_initial_series: nx must be >= 8");
    const double dx = 2.0 * kPi * length_scale / static_cast<double>(nx);
    Vector u0(nx);
    for (int j = 0; j < nx; ++j) {
        const double x = dx * static_cast<double>(j);
        double v = 0.0;
        for (int n = 1; n <= 4; ++n) v += coeff[n - 1] * std::sin(n * x / length_scale);
        u0(j) = v;
    }
    return u0;
}

Vector sample_ks_initial(std::uint64_t seed, int nx, double length_scale) {
    Rng rng(seed);
    double coeff[4];
    for (double& c : coeff) c = rng.normal();
    return ks_initial_series(coeff, nx, length_scale);
}

Matrix solve_ks(const Vector& u0, double length_scale, double horizon, int nt, double dt_inner) {
    const int nx = static_cast<int>(u0.size());
    if (nx < 16) throw std::invalid_argument("solve_ks: nx must be >= 16");
    if (nt < 2) throw std::invalid_argument("solve_ks: nt must be >= 2");
    const double save_dt = horizon / static_cast<double>(nt - 1);
    const double ratio = save_dt / dt_inner;
    const int stride = static_cast<int>(std::lround(ratio));
    if (stride < 1 || std::abs(ratio - stride) > 1e-9)
        throw std::invalid_argument("solve_ks: save interval must be an integer multiple of dt_inner");

    const int cutoff = nx / 3;
    const double h = dt_inner;
    std::vector<double> q(static_cast<std::size_t>(nx));
    for (int j = 0; j < nx; ++j)
        q[static_cast<std::size_t>(j)] = static_cast<double>(signed_freq(j, nx)) / length_scale;

    // Kassam-Trefethen contour evaluation of the ETDRK4 phi weights; the
    // mean over the circle |r|=1 removes the cancellation near hL ~ 0.
    const int n_contour = 64;
    std::vector<double> e_full(q.size()), e_half(q.size()), fq(q.size()), f1(q.size()), f2(q.size()),
        f3(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double lin = q[j] * q[j] - q[j] * q[j] * q[j] * q[j];
        e_full[j] = std::exp(h * lin);
        e_half[j] = std::exp(0.5 * h * lin);
        cdouble aq(0, 0), a1(0, 0), a2(0, 0), a3(0, 0);
        for (int m = 0; m < n_contour; ++m) {
            const double ang = kPi * (static_cast<double>(m) + 0.5) / n_contour;
            const cdouble lr = h * lin + cdouble(std::cos(ang), std::sin(ang));
            const cdouble elr = std::exp(lr);
            const cdouble lr2 = lr * lr, lr3 = lr2 * lr;
            aq += (std::exp(lr / 2.0) - 1.0) / lr;
            a1 += (-4.0 - lr + elr * (4.0 - 3.0 * lr + lr2)) / lr3;
            a2 += (2.0 + lr + elr * (-2.0 + lr)) / lr3;
            a3 += (-4.0 - 3.0 * lr - lr2 + elr * (4.0 - lr)) / lr3;
        }
        // The contour is symmetric about the real axis, so the mean is real.
        fq[j] = h * 2.0 * aq.real() / (2.0 * n_contour);
        f1[j] = h * 2.0 * a1.real() / (2.0 * n_contour);
        f2[j] = h * 2.0 * a2.real() / (2.0 * n_contour);
        f3[j] = h * 2.0 * a3.real() / (2.0 * n_contour);
    }

    auto nonlin = [&](const cvec& c) {
        cvec da = c;
        zero_high_modes(da, cutoff);
        Vector u = spec_to_phys(da);
        Vector w = u.array().square();
        cvec wh = phys_to_spec(w);
        zero_high_modes(wh, cutoff);
        for (std::size_t j = 0; j < wh.size(); ++j) wh[j] *= cdouble(0.0, -0.5 * q[j]);
        return wh;
    };

    cvec v = phys_to_spec(u0);
    Matrix traj(nt, nx);
    traj.row(0) = u0.transpose();
    const std::size_t m = v.size();
    cvec nv, na, nb, nc, av(m), bv(m), cv(m);
    for (int snap = 1; snap < nt; ++snap) {
        for (int step = 0; step < stride; ++step) {
            nv = nonlin(v);
            for (std::size_t j = 0; j < m; ++j) av[j] = e_half[j] * v[j] + fq[j] * nv[j];
            na = nonlin(av);
            for (std::size_t j = 0; j < m; ++j) bv[j] = e_half[j] * v[j] + fq[j] * na[j];
            nb = nonlin(bv);
            for (std::size_t j = 0; j < m; ++j)
                cv[j] = e_half[j] * av[j] + fq[j] * (2.0 * nb[j] - nv[j]);
            nc = nonlin(cv);
            for (std::size_t j = 0; j < m; ++j)
                v[j] = e_full[j] * v[j] + f1[j] * nv[j] + 2.0 * f2[j] * (na[j] + nb[j]) + f3[j] * nc[j];
        }
        if (!all_finite(v))
            throw SolverError("solve_ks: non-finite spectrum at snapshot " + std::to_string(snap));
        traj.row(snap) = spec_to_phys(v).transpose();
    }
    return traj;
}

// --- Eikonal / SDF ----------------------------------------------------------

namespace {

struct Point {
    double x, y;
};

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
    auto cross = [](const Point& o, const Point& p, const Point& q) {
        return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    };
    const double d1 = cross(c, d, a), d2 = cross(c, d, b);
    const double d3 = cross(a, b, c), d4 = cross(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

// 1-D squared distance transform (lower envelope of parabolas).
void dt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
           std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int qi = 1; qi < n; ++qi) {
        double s = ((f[qi] + qi * qi) - (f[v[k]] + v[k] * v[k])) / (2.0 * qi - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[qi] + qi * qi) - (f[v[k]] + v[k] * v[k])) / (2.0 * qi - 2.0 * v[k]);
        }
        ++k;
        v[k] = qi;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int qi = 0; qi < n; ++qi) {
        while (z[k + 1] < qi) ++k;
        const double dx = qi - v[k];
        d[qi] = dx * dx + f[v[k]];
    }
}

// Squared EDT of the source set {pixels where inside(p) is true}.
std::vector<double> edt_sq(const std::vector<std::uint8_t>& mask, int n, std::uint8_t source_value) {
    const double inf = 1e18;
    std::vector<double> g(static_cast<std::size_t>(n) * n);
    for (std::size_t p = 0; p < g.size(); ++p) g[p] = (mask[p] == source_value) ? 0.0 : inf;

    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    // columns (along j) then rows (along i); mask index is i*n + j
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) f[j] = g[static_cast<std::size_t>(i) * n + j];
        dt_1d(f, d, v, z);
        for (int j = 0; j < n; ++j) g[static_cast<std::size_t>(i) * n + j] = d[j];
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) f[i] = g[static_cast<std::size_t>(i) * n + j];
        dt_1d(f, d, v, z);
        for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i) * n + j] = d[i];
    }
    return g;
}

}  // namespace

std::vector<std::uint8_t> naca_airfoil_mask(double camber, double camber_pos, double thickness, int n) {
    if (n < 16) throw std::invalid_argument("naca_airfoil_mask: grid too small");
    if (!(camber >= 0.0) || !(camber_pos > 0.0 && camber_pos < 1.0) || !(thickness > 0.0))
        throw std::invalid_argument("naca_airfoil_mask: parameters out of range");

    const int n_chord = 512;
    std::vector<Point> upper(n_chord), lower(n_chord);
    for (int i = 0; i < n_chord; ++i) {
        // cosine clustering concentrates samples at the leading edge
        const double x = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(i) / (n_chord - 1)));
        double yc, dyc;
        if (x < camber_pos) {
            yc = camber / (camber_pos * camber_pos) * (2.0 * camber_pos * x - x * x);
            dyc = 2.0 * camber / (camber_pos * camber_pos) * (camber_pos - x);
        } else {
            const double om = 1.0 - camber_pos;
            yc = camber / (om * om) * ((1.0 - 2.0 * camber_pos) + 2.0 * camber_pos * x - x * x);
            dyc = 2.0 * camber / (om * om) * (camber_pos - x);
        }
        // the -0.1036 coefficient closes the trailing edge; pin the roundoff
        // residue at x=1 to exactly zero so the outline does not cross itself
        const double yt = x >= 1.0 ? 0.0
                                   : 5.0 * thickness *
                                         (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * x * x +
                                          0.2843 * x * x * x - 0.1036 * x * x * x * x);
        const double theta = std::atan(dyc);
        upper[static_cast<std::size_t>(i)] = {x - yt * std::sin(theta), yc + yt * std::cos(theta)};
        lower[static_cast<std::size_t>(i)] = {x + yt * std::sin(theta), yc - yt * std::cos(theta)};
    }

    std::vector<Point> poly;
    poly.reserve(2 * static_cast<std::size_t>(n_chord));
    for (int i = n_chord - 1; i >= 0; --i) poly.push_back(upper[static_cast<std::size_t>(i)]);
    for (int i = 1; i < n_chord; ++i) poly.push_back(lower[static_cast<std::size_t>(i)]);
    // drop duplicated closing vertex (the trailing edge is closed: y_t(1) = 0)
    while (poly.size() > 2 && poly.back().x == poly.front().x && poly.back().y == poly.front().y)
        poly.pop_back();

    const std::size_t ne = poly.size();
    for (std::size_t a = 0; a < ne; ++a) {
        for (std::size_t b = a + 2; b < ne; ++b) {
            if (a == 0 && b == ne - 1) continue;  // adjacent around the wrap
            if (segments_intersect(poly[a], poly[(a + 1) % ne], poly[b], poly[(b + 1) % ne]))
                throw std::invalid_argument("naca_airfoil_mask: self-intersecting outline");
        }
    }

    double xmin = poly[0].x, xmax = poly[0].x, ymin = poly[0].y, ymax = poly[0].y;
    for (const auto& pt : poly) {
        xmin = std::min(xmin, pt.x);
        xmax = std::max(xmax, pt.x);
        ymin = std::min(ymin, pt.y);
        ymax = std::max(ymax, pt.y);
    }
    const double extent = std::max(xmax - xmin, ymax - ymin);
    const double scale = 0.5 * static_cast<double>(n - 1) / extent;
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double gc = 0.5 * static_cast<double>(n - 1);
    for (auto& pt : poly) {
        pt.x = gc + scale * (pt.x - cx);
        pt.y = gc + scale * (pt.y - cy);
    }

    // even-odd scanline fill over rows of constant y
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
    std::vector<double> crossings;
    for (int j = 0; j < n; ++j) {
        const double y = static_cast<double>(j);
        crossings.clear();
        for (std::size_t a = 0; a < ne; ++a) {
            const Point& p1 = poly[a];
            const Point& p2 = poly[(a + 1) % ne];
            if ((p1.y <= y && y < p2.y) || (p2.y <= y && y < p1.y))
                crossings.push_back(p1.x + (y - p1.y) * (p2.x - p1.x) / (p2.y - p1.y));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t c = 0; c + 1 < crossings.size(); c += 2) {
            const int i0 = std::max(0, static_cast<int>(std::ceil(crossings[c])));
            const int i1 = std::min(n - 1, static_cast<int>(std::floor(crossings[c + 1])));
            for (int i = i0; i <= i1; ++i) mask[static_cast<std::size_t>(i) * n + j] = 1;
        }
    }
    return mask;
}

Matrix signed_distance_field(const std::vector<std::uint8_t>& mask, int n) {
    if (mask.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("signed_distance_field: mask size mismatch");
    bool any0 = false, any1 = false;
    for (auto m : mask) {
        if (m == 0) any0 = true;
        else any1 = true;
    }
    if (!any0 || !any1)
        throw std::invalid_argument("signed_distance_field: mask must contain both regions");

    const std::vector<double> d2_in = edt_sq(mask, n, 1);   // distance to the shape
    const std::vector<double> d2_out = edt_sq(mask, n, 0);  // distance to the background
    Matrix s(n, n);
    double smax = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t p = static_cast<std::size_t>(i) * n + j;
            s(i, j) = std::sqrt(d2_in[p]) - std::sqrt(d2_out[p]);
            smax = std::max(smax, std::abs(s(i, j)));
        }
    s /= smax;
    return s;
}

}  // namespace fedonet
