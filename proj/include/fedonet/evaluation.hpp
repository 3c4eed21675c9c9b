#pragma once

#include "fedonet/dataset.hpp"
#include "fedonet/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace fedonet {

// ||pred - truth||_2 / ||truth||_2 over the full grid. Throws on zero truth
// norm rather than dividing.
double relative_l2(std::span<const double> pred, std::span<const double> truth);

// Power spectrum from the unitary DFT, conjugate modes folded: bins
// k = 0..n/2, sum of E(k) equals the squared 2-norm of the field.
std::vector<double> energy_spectrum_1d(std::span<const double> field);

// Angle-integrated 2-D spectrum: shell sums over round(sqrt(k1^2+k2^2)),
// bins 0..n/2; corner modes beyond the Nyquist radius accumulate in the
// last bin so Parseval is preserved.
std::vector<double> energy_spectrum_2d(const Matrix& field);

struct SpectrumTable {
    std::vector<int> wavenumber;
    std::vector<double> truth;
    std::vector<double> pred;
};

SpectrumTable spectrum_compare_1d(std::span<const double> truth, std::span<const double> pred);
SpectrumTable spectrum_compare_2d(const Matrix& truth, const Matrix& pred);

// Absolute difference per grid point per channel.
std::vector<double> pointwise_error(std::span<const double> pred, std::span<const double> truth);

// Growing-prefix relative error over time; rows are time steps. Entries
// with a zero truth-prefix norm are NaN (undefined).
std::vector<double> cumulative_error(const Matrix& pred_traj, const Matrix& truth_traj);

enum class Split { Train, Test, All };

struct EvalReport {
    BenchmarkId benchmark = BenchmarkId::Poisson2d;
    std::string variant;
    std::vector<std::int64_t> sample_indices;   // dataset indices evaluated
    std::vector<double> per_sample_rel_l2;
    double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0, median = 0.0;
    std::int64_t best_index = -1, median_index = -1, worst_index = -1;  // dataset indices
};

EvalReport evaluate_model(const DeepOnetModel& model, const Dataset& ds, Split split);

void write_report_json(const EvalReport& report, const std::string& path);
void write_per_sample_csv(const EvalReport& report, const std::string& path);
void write_spectrum_csv(const SpectrumTable& table, const std::string& path);

}  // namespace fedonet
