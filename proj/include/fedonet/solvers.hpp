#pragma once

#include "fedonet/nn.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fedonet {

// Thrown when a time integrator or linear solve leaves its validity range
// (non-finite state, blow-up, unmet residual).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- Gaussian random fields ------------------------------------------------

// Periodic GRF on the unit torus with covariance (-Laplacian + tau^2 I)^(-alpha):
// the Fourier coefficient at integer wavenumber pair (k1, k2) has standard
// deviation ((2 pi)^2 (k1^2 + k2^2) + tau^2)^(-alpha/2); the mean mode is zero.
// Returned as an (n, n) nodal field, deterministic per seed.
Matrix sample_grf_2d(int n, double alpha, double tau, std::uint64_t seed);

// Periodic GRF on [0,1) for the Burgers initial condition:
// s ~ N(0, 25^2 (-Laplacian + 5^2 I)^(-4)), i.e. mode k has standard deviation
// 25 ((2 pi k)^2 + 25)^(-2). nx must be a power of two.
Vector sample_burgers_ic(int nx, std::uint64_t seed);

// --- Poisson ----------------------------------------------------------------

// Five-point finite differences for laplacian(u) = f on [0,1]^2 with
// homogeneous Dirichlet boundaries; interior rows solve
// (4 u_c - sum of neighbors)/h^2 = -f_c with h = 1/(n-1), boundary rows are
// identity with zero right-hand side. The factorization is reusable across
// right-hand sides of the same grid size.
class PoissonSolver {
public:
    explicit PoissonSolver(int n);
    // Solves for u given the forcing f (n, n); checks the residual
    // ||A u - b||_inf <= 1e-10 ||b||_inf and throws SolverError otherwise.
    Matrix solve(const Matrix& f) const;
    int size() const { return n_; }

private:
    int n_;
    double h_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

Matrix solve_poisson_fd(const Matrix& f);

// --- Time integrators -------------------------------------------------------

// Viscous Burgers on the periodic unit interval, t in [0,1]: Fourier
// pseudo-spectral in space (2/3-rule dealiased product), classical RK4 in
// time with dt <= 0.25 dx^2 / nu. Returns nt uniformly spaced snapshots
// (nt, nx) including t=0 and t=1; row 0 equals s.
Matrix solve_burgers(const Vector& s, double nu, int nt);

// Lorenz-63 with fixed-step classical RK4, dt = T/(nsteps-1). Returns
// (nsteps, 3) including t=0. The scalar form starts from (x0, 12, 12).
Matrix integrate_lorenz63_from(const Eigen::Vector3d& init, double T, int nsteps, double sigma = 10.0,
                               double rho = 28.0, double beta = 8.0 / 3.0);
Matrix integrate_lorenz63(double x0, double T, int nsteps, double sigma = 10.0, double rho = 28.0,
                          double beta = 8.0 / 3.0);

// Lorenz-96 with periodic index wrap, RK4 for nsteps steps of dt; returns
// the final `keep` states as (keep, N) (the state after step
// nsteps-keep+1 through the state after step nsteps).
Matrix integrate_lorenz96(const Vector& x0, double forcing, double dt, int nsteps, int keep);

// Allen-Cahn initial profile on x in [-1, 1): sum over k=1..3 of
// a_k x^(2k) cos(k pi x) + b_k x^(2k) sin(k pi x) with a_k, b_k ~ U(0,1).
Vector ac_initial_series(const double (&a)[3], const double (&b)[3], int nx);
Vector sample_ac_initial(std::uint64_t seed, int nx);

// Allen-Cahn u_t = eps u_xx - 5 u^3 + 5 u, periodic, explicit Euler with the
// second-difference Laplacian. Returns (nt, nx) snapshots at t = dt*j,
// j = 1..nt; aborts on |u| > 10.
Matrix solve_allen_cahn(const Vector& s, double eps, double dt, int nt);

// Kuramoto-Sivashinsky initial condition: sum over n=1..4 of
// C_n sin(n x / L), C_n ~ N(0,1), on the uniform periodic grid of
// [0, 2 pi L).
Vector ks_initial_series(const double (&coeff)[4], int nx, double length_scale);
Vector sample_ks_initial(std::uint64_t seed, int nx, double length_scale);

// Kuramoto-Sivashinsky u_t + u u_x + u_xx + u_xxxx = 0 on [0, 2 pi L) via
// ETDRK4 (exact linear propagator, 2/3-dealiased nonlinearity), inner step
// dt_inner. Returns (nt, nx) snapshots at uniform times including t=0; the
// save interval T/(nt-1) must be an integer multiple of dt_inner.
Matrix solve_ks(const Vector& u0, double length_scale, double horizon, int nt, double dt_inner = 0.05);

// --- Eikonal / SDF ----------------------------------------------------------

// Rasterized NACA 4-digit airfoil: closed upper+lower surface polygon with
// cosine-clustered chord samples, scaled to occupy the central 50% of the
// (n, n) grid. mask[i*n + j] = 1 inside, with i the x index and j the y
// index. Throws on a self-intersecting outline.
std::vector<std::uint8_t> naca_airfoil_mask(double camber, double camber_pos, double thickness, int n);

// Exact Euclidean distance transform (Felzenszwalb-Huttenlocher) of both
// regions, signed positive outside / negative inside, normalized so
// max |s| = 1. Rejects all-zero or all-one masks.
Matrix signed_distance_field(const std::vector<std::uint8_t>& mask, int n);

}  // namespace fedonet
