#include "fedonet/datagen.hpp"

#include "fedonet/rng.hpp"
#include "fedonet/solvers.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace fedonet {

namespace {

std::vector<std::int64_t> stride4_sensors(std::int64_t n) {
    std::vector<std::int64_t> s;
    for (std::int64_t i = 0; i < n; i += 4)
        for (std::int64_t j = 0; j < n; j += 4) s.push_back(i * n + j);
    return s;
}

std::vector<std::int64_t> all_sensors(std::int64_t n) {
    std::vector<std::int64_t> s(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
}

void set_resolution(BenchmarkSpec& spec, const std::string& key, double value) {
    const auto res = static_cast<std::int64_t>(std::llround(value));
    if (res < 2) throw std::invalid_argument("benchmark spec: resolution must be >= 2");
    auto set_axis = [&](std::vector<Axis>& axes, const std::string& name) {
        for (auto& a : axes)
            if (a.name == name) a.res = res;
    };
    switch (spec.id) {
        case BenchmarkId::Poisson2d:
        case BenchmarkId::Eikonal:
            if (key != "n") throw std::invalid_argument("unknown resolution key " + key);
            if (res % 4 != 0) throw std::invalid_argument("n must be divisible by 4");
            set_axis(spec.input_axes, "x");
            set_axis(spec.input_axes, "y");
            set_axis(spec.query_axes, "x");
            set_axis(spec.query_axes, "y");
            spec.sensor_indices = stride4_sensors(res);
            break;
        case BenchmarkId::Burgers1d:
        case BenchmarkId::AllenCahn:
        case BenchmarkId::Ks:
            if (key == "nx") {
                set_axis(spec.input_axes, "x");
                set_axis(spec.query_axes, "x");
                spec.sensor_indices = all_sensors(res);
            } else if (key == "nt") {
                set_axis(spec.query_axes, "t");
                if (spec.id == BenchmarkId::AllenCahn) {
                    const double dt = spec.param("dt");
                    for (auto& a : spec.query_axes)
                        if (a.name == "t") a.hi = dt * static_cast<double>(res);
                }
            } else {
                throw std::invalid_argument("unknown resolution key " + key);
            }
            break;
        case BenchmarkId::Lorenz63:
            if (key != "nsteps") throw std::invalid_argument("unknown resolution key " + key);
            set_axis(spec.query_axes, "t");
            break;
        case BenchmarkId::Lorenz96:
            if (key == "keep") {
                set_axis(spec.query_axes, "t");
            } else if (key == "nx") {
                set_axis(spec.input_axes, "site");
                set_axis(spec.query_axes, "site");
                spec.sensor_indices = all_sensors(res);
            } else {
                throw std::invalid_argument("unknown resolution key " + key);
            }
            break;
    }
}

}  // namespace

BenchmarkSpec make_benchmark_spec(BenchmarkId id, const std::map<std::string, double>& overrides) {
    BenchmarkSpec spec = default_benchmark_spec(id);
    for (const auto& [key, value] : overrides) {
        if (spec.params.count(key)) {
            spec.params[key] = value;
            if (id == BenchmarkId::AllenCahn && key == "dt") {
                for (auto& a : spec.query_axes)
                    if (a.name == "t") {
                        a.lo = value;
                        a.hi = value * static_cast<double>(a.res);
                    }
            }
            if (id == BenchmarkId::Ks && (key == "T" || key == "L")) {
                for (auto& a : spec.query_axes) {
                    if (a.name == "t" && key == "T") a.hi = value;
                    if (a.name == "x" && key == "L") a.hi = 2.0 * std::numbers::pi * value;
                }
                for (auto& a : spec.input_axes)
                    if (a.name == "x" && key == "L") a.hi = 2.0 * std::numbers::pi * value;
            }
            if (id == BenchmarkId::Lorenz63 && key == "T") {
                for (auto& a : spec.query_axes)
                    if (a.name == "t") a.hi = value;
            }
        } else {
            set_resolution(spec, key, value);
        }
    }
    return spec;
}

namespace {

struct SampleContext {
    const BenchmarkSpec& spec;
    const PoissonSolver* poisson;  // only for poisson2d
};

// Fills one (branch row, target block) pair from its seed. Throws
// SolverError when the underlying solve fails; the caller redraws.
void generate_sample(const SampleContext& ctx, std::uint64_t seed, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> branch,
                     std::span<double> target) {
    const BenchmarkSpec& spec = ctx.spec;
    auto copy_matrix_target = [&](const Matrix& m) {
        // solver outputs are (slow axis, fast axis) row-major, matching the
        // query enumeration order
        std::int64_t idx = 0;
        for (std::int64_t i = 0; i < m.rows(); ++i)
            for (std::int64_t j = 0; j < m.cols(); ++j) target[static_cast<std::size_t>(idx++)] = m(i, j);
    };
    auto sensors_from = [&](const auto& flat_field) {
        for (std::int64_t k = 0; k < spec.sensor_count(); ++k)
            branch(k) = flat_field[static_cast<std::size_t>(spec.sensor_indices[static_cast<std::size_t>(k)])];
    };

    switch (spec.id) {
        case BenchmarkId::Poisson2d: {
            const int n = static_cast<int>(spec.query_axes[0].res);
            const Matrix f = sample_grf_2d(n, spec.param("alpha"), spec.param("tau"), seed);
            const Matrix u = ctx.poisson->solve(f);
            for (std::int64_t k = 0; k < spec.sensor_count(); ++k) {
                const std::int64_t s = spec.sensor_indices[static_cast<std::size_t>(k)];
                branch(k) = f(s / n, s % n);
            }
            copy_matrix_target(u);
            break;
        }
        case BenchmarkId::Burgers1d: {
            const int nx = static_cast<int>(spec.input_axes[0].res);
            const int nt = static_cast<int>(spec.query_axes[0].res);
            const Vector s = sample_burgers_ic(nx, seed);
            const Matrix u = solve_burgers(s, spec.param("nu"), nt);
            // conservation holds on every sample, not just in tests
            const double mean0 = u.row(0).mean();
            double energy_prev = u.row(0).squaredNorm();
            for (int t = 1; t < nt; ++t) {
                if (std::abs(u.row(t).mean() - mean0) > 1e-8)
                    throw SolverError("burgers sample violates mean conservation");
                const double energy = u.row(t).squaredNorm();
                if (energy > energy_prev * (1.0 + 1e-12) + 1e-12)
                    throw SolverError("burgers sample violates energy decay");
                energy_prev = energy;
            }
            sensors_from(s);
            copy_matrix_target(u);
            break;
        }
        case BenchmarkId::Lorenz63: {
            Rng rng(seed);
            const double x0 = rng.uniform(spec.param("x0_lo"), spec.param("x0_hi"));
            const auto& t_axis = spec.query_axes[0];
            const Matrix traj = integrate_lorenz63(x0, t_axis.hi, static_cast<int>(t_axis.res),
                                                   spec.param("sigma"), spec.param("rho"),
                                                   spec.param("beta"));
            branch(0) = x0;
            copy_matrix_target(traj);
            break;
        }
        case BenchmarkId::Eikonal: {
            Rng rng(seed);
            const double m = rng.uniform(spec.param("m_lo"), spec.param("m_hi"));
            const double p = rng.uniform(spec.param("p_lo"), spec.param("p_hi"));
            const double t = rng.uniform(spec.param("t_lo"), spec.param("t_hi"));
            const int n = static_cast<int>(spec.query_axes[0].res);
            const auto mask = naca_airfoil_mask(m, p, t, n);
            const Matrix sdf = signed_distance_field(mask, n);
            for (std::int64_t k = 0; k < spec.sensor_count(); ++k)
                branch(k) = static_cast<double>(mask[static_cast<std::size_t>(
                    spec.sensor_indices[static_cast<std::size_t>(k)])]);
            copy_matrix_target(sdf);
            break;
        }
        case BenchmarkId::Lorenz96: {
            Rng rng(seed);
            const double forcing = spec.param("F");
            const double dt = spec.param("dt");
            const double noise = spec.param("ic_noise");
            const auto& t_axis = spec.query_axes[0];
            const int n_site = static_cast<int>(spec.query_axes[1].res);
            Vector x0(n_site);
            for (int i = 0; i < n_site; ++i) x0(i) = forcing + noise * rng.normal();
            const int burn_steps = static_cast<int>(std::llround(t_axis.lo / dt));
            const int window = static_cast<int>(t_axis.res) - 1;
            const Matrix traj =
                integrate_lorenz96(x0, forcing, dt, burn_steps + window, static_cast<int>(t_axis.res));
            // branch input is the first retained state (start of the window)
            branch = traj.row(0);
            copy_matrix_target(traj);
            break;
        }
        case BenchmarkId::AllenCahn: {
            const int nx = static_cast<int>(spec.input_axes[0].res);
            const int nt = static_cast<int>(spec.query_axes[0].res);
            const Vector s = sample_ac_initial(seed, nx);
            const Matrix u = solve_allen_cahn(s, spec.param("eps"), spec.param("dt"), nt);
            sensors_from(s);
            copy_matrix_target(u);
            break;
        }
        case BenchmarkId::Ks: {
            const int nx = static_cast<int>(spec.input_axes[0].res);
            const int nt = static_cast<int>(spec.query_axes[0].res);
            const Vector u0 = sample_ks_initial(seed, nx, spec.param("L"));
            const Matrix u = solve_ks(u0, spec.param("L"), spec.param("T"), nt, spec.param("dt_inner"));
            const double mean0 = u.row(0).mean();
            for (int t = 1; t < nt; ++t)
                if (std::abs(u.row(t).mean() - mean0) > 1e-8)
                    throw SolverError("ks sample violates mean conservation");
            sensors_from(u0);
            copy_matrix_target(u);
            break;
        }
    }

    for (std::int64_t k = 0; k < branch.size(); ++k)
        if (!std::isfinite(branch(k))) throw SolverError("non-finite branch input");
    for (double v : target)
        if (!std::isfinite(v)) throw SolverError("non-finite target value");
}

}  // namespace

Dataset generate_dataset(const BenchmarkSpec& spec, const GenerateOptions& opt) {
    if (opt.count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");
    Dataset ds;
    ds.spec = spec;
    ds.base_seed = opt.base_seed;
    ds.train_count = opt.train_count.value_or((opt.count * 9) / 10);
    if (ds.train_count < 0 || ds.train_count > opt.count)
        throw std::invalid_argument("generate_dataset: train_count out of range");
    ds.branch.resize(opt.count, spec.sensor_count());
    ds.coords = build_query_coords(spec);
    ds.targets.assign(static_cast<std::size_t>(opt.count) * ds.target_stride(), 0.0);
    ds.sample_seeds.assign(static_cast<std::size_t>(opt.count), 0);

    std::unique_ptr<PoissonSolver> poisson;
    if (spec.id == BenchmarkId::Poisson2d)
        poisson = std::make_unique<PoissonSolver>(static_cast<int>(spec.query_axes[0].res));
    const SampleContext ctx{spec, poisson.get()};

    constexpr int kMaxAttempts = 16;
    std::atomic<std::int64_t> next{0};
    std::atomic<std::uint64_t> redraws{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        while (true) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= opt.count) return;
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error) return;
            }
            bool done = false;
            for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
                const std::uint64_t seed = attempt == 0
                                               ? mix_seed(opt.base_seed, static_cast<std::uint64_t>(i))
                                               : mix_seed(opt.base_seed, static_cast<std::uint64_t>(i),
                                                          static_cast<std::uint64_t>(attempt));
                try {
                    generate_sample(ctx, seed, ds.branch.row(i), ds.target_mut(i));
                    ds.sample_seeds[static_cast<std::size_t>(i)] = seed;
                    done = true;
                } catch (const SolverError&) {
                    redraws.fetch_add(1);
                }
            }
            if (!done) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error)
                    first_error = std::make_exception_ptr(SolverError(
                        "generate_dataset: sample " + std::to_string(i) + " failed after " +
                        std::to_string(kMaxAttempts) + " attempts"));
                return;
            }
        }
    };

    const int n_threads = std::max(1, opt.threads);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    ds.redraw_count = redraws.load();
    return ds;
}

}  // namespace fedonet
