#include "fedonet/dataset.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fedonet {

const char* benchmark_name(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::Poisson2d: return "poisson2d";
        case BenchmarkId::Burgers1d: return "burgers1d";
        case BenchmarkId::Lorenz63: return "lorenz63";
        case BenchmarkId::Eikonal: return "eikonal";
        case BenchmarkId::Lorenz96: return "lorenz96";
        case BenchmarkId::AllenCahn: return "allen_cahn";
        case BenchmarkId::Ks: return "ks";
    }
    return "unknown";
}

std::optional<BenchmarkId> parse_benchmark(const std::string& name) {
    for (auto id : {BenchmarkId::Poisson2d, BenchmarkId::Burgers1d, BenchmarkId::Lorenz63,
                    BenchmarkId::Eikonal, BenchmarkId::Lorenz96, BenchmarkId::AllenCahn, BenchmarkId::Ks})
        if (name == benchmark_name(id)) return id;
    return std::nullopt;
}

std::int64_t BenchmarkSpec::query_count() const {
    std::int64_t q = 1;
    for (const auto& a : query_axes) q *= a.res;
    return q;
}

double BenchmarkSpec::param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end())
        throw std::invalid_argument(std::string("benchmark spec: missing parameter ") + key);
    return it->second;
}

namespace {

// Sensor layout for 2-D input grids: stride-4 subsampling along both axes.
std::vector<std::int64_t> stride4_sensors(std::int64_t n) {
    std::vector<std::int64_t> s;
    s.reserve(static_cast<std::size_t>((n / 4) * (n / 4)));
    for (std::int64_t i = 0; i < n; i += 4)
        for (std::int64_t j = 0; j < n; j += 4) s.push_back(i * n + j);
    return s;
}

std::vector<std::int64_t> all_sensors(std::int64_t n) {
    std::vector<std::int64_t> s(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
}

}  // namespace

BenchmarkSpec default_benchmark_spec(BenchmarkId id) {
    BenchmarkSpec s;
    s.id = id;
    switch (id) {
        case BenchmarkId::Poisson2d: {
            const std::int64_t n = 128;
            s.input_axes = {{"x", n, 0.0, 1.0, false}, {"y", n, 0.0, 1.0, false}};
            s.query_axes = s.input_axes;
            s.coord_col_of_axis = {0, 1};
            s.sensor_indices = stride4_sensors(n);
            s.params = {{"alpha", 3.0}, {"tau", 3.0}};
            break;
        }
        case BenchmarkId::Burgers1d: {
            const std::int64_t nx = 128, nt = 101;
            s.input_axes = {{"x", nx, 0.0, 1.0, true}};
            s.query_axes = {{"t", nt, 0.0, 1.0, false}, {"x", nx, 0.0, 1.0, true}};
            s.coord_col_of_axis = {1, 0};  // zeta = (x, t)
            s.sensor_indices = all_sensors(nx);
            s.params = {{"nu", 0.01}};
            break;
        }
        case BenchmarkId::Lorenz63: {
            s.input_axes = {{"ic", 1, 0.0, 1.0, true}};
            s.query_axes = {{"t", 1000, 0.0, 3.0, false}};
            s.coord_col_of_axis = {0};
            s.sensor_indices = {0};
            s.params = {{"sigma", 10.0}, {"rho", 28.0}, {"beta", 8.0 / 3.0},
                        {"x0_lo", 10.0}, {"x0_hi", 15.0}};
            s.out_channels = 3;
            break;
        }
        case BenchmarkId::Eikonal: {
            const std::int64_t n = 256;
            s.input_axes = {{"x", n, 0.0, 1.0, false}, {"y", n, 0.0, 1.0, false}};
            s.query_axes = s.input_axes;
            s.coord_col_of_axis = {0, 1};
            s.sensor_indices = stride4_sensors(n);
            s.params = {{"m_lo", 0.01}, {"m_hi", 0.09}, {"p_lo", 0.1},
                        {"p_hi", 0.7},  {"t_lo", 0.1},  {"t_hi", 0.4}};
            break;
        }
        case BenchmarkId::Lorenz96: {
            const std::int64_t n_site = 40, keep = 501;
            s.input_axes = {{"site", n_site, 0.0, 1.0, true}};
            s.query_axes = {{"t", keep, 10.0, 15.0, false}, {"site", n_site, 0.0, 1.0, true}};
            s.coord_col_of_axis = {0, 1};  // zeta = (t, i/N)
            s.sensor_indices = all_sensors(n_site);
            s.params = {{"F", 4.0}, {"dt", 0.01}, {"ic_noise", 1e-3}};
            break;
        }
        case BenchmarkId::AllenCahn: {
            const std::int64_t nx = 200, nt = 200;
            const double dt = 0.005;
            s.input_axes = {{"x", nx, -1.0, 1.0, true}};
            s.query_axes = {{"t", nt, dt, dt * static_cast<double>(nt), false},
                            {"x", nx, -1.0, 1.0, true}};
            s.coord_col_of_axis = {1, 0};  // zeta = (x, t)
            s.sensor_indices = all_sensors(nx);
            s.params = {{"eps", 1e-4}, {"dt", dt}};
            break;
        }
        case BenchmarkId::Ks: {
            const std::int64_t nx = 128, nt = 251;
            const double length_scale = 24.0;
            const double period = 2.0 * std::numbers::pi * length_scale;
            s.input_axes = {{"x", nx, 0.0, period, true}};
            s.query_axes = {{"t", nt, 0.0, 50.0, false}, {"x", nx, 0.0, period, true}};
            s.coord_col_of_axis = {1, 0};  // zeta = (x, t)
            s.sensor_indices = all_sensors(nx);
            s.params = {{"L", length_scale}, {"T", 50.0}, {"dt_inner", 0.05}};
            break;
        }
    }
    return s;
}

Matrix build_query_coords(const BenchmarkSpec& spec) {
    const std::int64_t q = spec.query_count();
    const int d = spec.coord_dim();
    Matrix coords(q, d);
    std::vector<std::int64_t> idx(spec.query_axes.size(), 0);
    for (std::int64_t row = 0; row < q; ++row) {
        for (std::size_t a = 0; a < spec.query_axes.size(); ++a)
            coords(row, spec.coord_col_of_axis[a]) = spec.query_axes[a].normalized(idx[a]);
        // row-major increment, last axis fastest
        for (int a = static_cast<int>(spec.query_axes.size()) - 1; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < spec.query_axes[static_cast<std::size_t>(a)].res)
                break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    return coords;
}

}  // namespace fedonet
