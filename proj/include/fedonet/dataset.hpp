#pragma once

#include "fedonet/nn.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fedonet {

enum class BenchmarkId : std::uint8_t {
    Poisson2d = 0,
    Burgers1d = 1,
    Lorenz63 = 2,
    Eikonal = 3,
    Lorenz96 = 4,
    AllenCahn = 5,
    Ks = 6,
};

const char* benchmark_name(BenchmarkId id);
std::optional<BenchmarkId> parse_benchmark(const std::string& name);

// One grid axis. Periodic axes place `res` nodes on [lo, hi) with step
// (hi-lo)/res; non-periodic axes include both endpoints with step
// (hi-lo)/(res-1).
struct Axis {
    std::string name;
    std::int64_t res = 0;
    double lo = 0.0;
    double hi = 1.0;
    bool periodic = false;

    double step() const { return (hi - lo) / static_cast<double>(periodic ? res : res - 1); }
    double value(std::int64_t idx) const { return lo + step() * static_cast<double>(idx); }
    double normalized(std::int64_t idx) const { return (value(idx) - lo) / (hi - lo); }
};

// Everything needed to generate and address one benchmark dataset.
// query_axes are listed in target-enumeration order (slowest index first);
// coord_col_of_axis maps each axis to its column in the coordinate vector
// (time-dependent benchmarks store zeta = (x, t) while enumerating t-major).
struct BenchmarkSpec {
    BenchmarkId id = BenchmarkId::Poisson2d;
    std::vector<Axis> input_axes;
    std::vector<Axis> query_axes;
    std::vector<int> coord_col_of_axis;
    std::vector<std::int64_t> sensor_indices;  // into the flattened input grid
    std::map<std::string, double> params;
    int out_channels = 1;

    std::int64_t sensor_count() const { return static_cast<std::int64_t>(sensor_indices.size()); }
    std::int64_t query_count() const;
    int coord_dim() const { return static_cast<int>(query_axes.size()); }
    double param(const std::string& key) const;
};

// The section 3 defaults for each benchmark.
BenchmarkSpec default_benchmark_spec(BenchmarkId id);

// Normalized query coordinates, (query_count, coord_dim).
Matrix build_query_coords(const BenchmarkSpec& spec);

struct Dataset {
    BenchmarkSpec spec;
    std::uint64_t base_seed = 0;
    std::int64_t train_count = 0;
    std::uint64_t redraw_count = 0;
    Matrix branch;                 // (count, sensor_count)
    Matrix coords;                 // (query_count, coord_dim), normalized, shared
    std::vector<double> targets;   // count * query_count * out_channels, row-major
    std::vector<std::uint64_t> sample_seeds;

    std::int64_t count() const { return branch.rows(); }
    std::int64_t test_count() const { return count() - train_count; }
    std::int64_t target_stride() const { return coords.rows() * spec.out_channels; }
    std::span<const double> target(std::int64_t i) const {
        return {targets.data() + i * target_stride(), static_cast<std::size_t>(target_stride())};
    }
    std::span<double> target_mut(std::int64_t i) {
        return {targets.data() + i * target_stride(), static_cast<std::size_t>(target_stride())};
    }
};

}  // namespace fedonet
