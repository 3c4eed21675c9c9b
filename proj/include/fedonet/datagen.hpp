#pragma once

#include "fedonet/dataset.hpp"

#include <map>
#include <optional>
#include <string>

namespace fedonet {

struct GenerateOptions {
    std::int64_t count = 1;
    std::uint64_t base_seed = 0;
    // Defaults to a 90/10 split by index.
    std::optional<std::int64_t> train_count;
    int threads = 1;
};

// Builds the default spec for `id` and applies `overrides`. Recognized keys
// are the benchmark's physical parameters plus its resolution knobs
// ("n", "nx", "nt", "nsteps", "keep"); unknown keys are rejected.
BenchmarkSpec make_benchmark_spec(BenchmarkId id, const std::map<std::string, double>& overrides);

// Deterministic dataset generation: the sample at index i is produced from
// seed mix(base_seed, i) regardless of thread count; failed solves are
// redrawn with mix(base_seed, i, attempt) and counted in redraw_count.
Dataset generate_dataset(const BenchmarkSpec& spec, const GenerateOptions& opt);

}  // namespace fedonet
