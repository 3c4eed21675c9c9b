#include "fedonet/evaluation.hpp"

#include "fedonet/fft.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace fedonet {

double relative_l2(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("relative_l2: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (den == 0.0) throw std::invalid_argument("relative_l2: zero truth norm");
    return std::sqrt(num / den);
}

std::vector<double> energy_spectrum_1d(std::span<const double> field) {
    const int n = static_cast<int>(field.size());
    if (n < 4) throw std::invalid_argument("energy_spectrum_1d: need at least 4 points");
    const fft::cvec c = fft::dft_real(std::vector<double>(field.begin(), field.end()));
    std::vector<double> e(static_cast<std::size_t>(n / 2) + 1, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);  // unitary normalization
    e[0] = std::norm(c[0]) * inv_n;
    for (int k = 1; k < (n + 1) / 2; ++k)
        e[static_cast<std::size_t>(k)] =
            (std::norm(c[static_cast<std::size_t>(k)]) + std::norm(c[static_cast<std::size_t>(n - k)])) *
            inv_n;
    if (n % 2 == 0) e[static_cast<std::size_t>(n / 2)] = std::norm(c[static_cast<std::size_t>(n / 2)]) * inv_n;
    return e;
}

std::vector<double> energy_spectrum_2d(const Matrix& field) {
    const int n = static_cast<int>(field.rows());
    if (field.cols() != n) throw std::invalid_argument("energy_spectrum_2d: field must be square");
    fft::cvec a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = fft::cdouble(field(i, j), 0.0);
    fft::dft2(a, n);
    const int kmax = n / 2;
    std::vector<double> e(static_cast<std::size_t>(kmax) + 1, 0.0);
    const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
    for (int i = 0; i < n; ++i) {
        const int k1 = i <= n / 2 ? i : i - n;
        for (int j = 0; j < n; ++j) {
            const int k2 = j <= n / 2 ? j : j - n;
            int shell = static_cast<int>(std::lround(std::sqrt(static_cast<double>(k1) * k1 +
                                                               static_cast<double>(k2) * k2)));
            shell = std::min(shell, kmax);
            e[static_cast<std::size_t>(shell)] += std::norm(a[static_cast<std::size_t>(i) * n + j]) * inv_n2;
        }
    }
    return e;
}

SpectrumTable spectrum_compare_1d(std::span<const double> truth, std::span<const double> pred) {
    SpectrumTable t;
    t.truth = energy_spectrum_1d(truth);
    t.pred = energy_spectrum_1d(pred);
    t.wavenumber.resize(t.truth.size());
    for (std::size_t k = 0; k < t.truth.size(); ++k) t.wavenumber[k] = static_cast<int>(k);
    return t;
}

SpectrumTable spectrum_compare_2d(const Matrix& truth, const Matrix& pred) {
    SpectrumTable t;
    t.truth = energy_spectrum_2d(truth);
    t.pred = energy_spectrum_2d(pred);
    t.wavenumber.resize(t.truth.size());
    for (std::size_t k = 0; k < t.truth.size(); ++k) t.wavenumber[k] = static_cast<int>(k);
    return t;
}

std::vector<double> pointwise_error(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("pointwise_error: shape mismatch");
    std::vector<double> e(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) e[i] = std::abs(pred[i] - truth[i]);
    return e;
}

std::vector<double> cumulative_error(const Matrix& pred_traj, const Matrix& truth_traj) {
    if (pred_traj.rows() != truth_traj.rows() || pred_traj.cols() != truth_traj.cols())
        throw std::invalid_argument("cumulative_error: shape mismatch");
    std::vector<double> curve(static_cast<std::size_t>(pred_traj.rows()));
    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 0; t < pred_traj.rows(); ++t) {
        num += (pred_traj.row(t) - truth_traj.row(t)).squaredNorm();
        den += truth_traj.row(t).squaredNorm();
        curve[static_cast<std::size_t>(t)] =
            den > 0.0 ? std::sqrt(num / den) : std::numeric_limits<double>::quiet_NaN();
    }
    return curve;
}

EvalReport evaluate_model(const DeepOnetModel& model, const Dataset& ds, Split split) {
    if (model.config.sensor_count != ds.spec.sensor_count() ||
        model.config.coord_dim != ds.spec.coord_dim() ||
        model.config.out_channels != ds.spec.out_channels)
        throw std::invalid_argument("evaluate_model: model does not match the dataset benchmark");

    std::int64_t lo = 0, hi = ds.count();
    if (split == Split::Train) hi = ds.train_count;
    if (split == Split::Test) lo = ds.train_count;
    if (hi <= lo) throw std::invalid_argument("evaluate_model: empty split");

    EvalReport report;
    report.benchmark = ds.spec.id;
    report.variant = model.config.variant == Variant::Fedonet ? "fedonet" : "vanilla";

    // The trunk depends only on the (shared) query grid: evaluate it once.
    const Matrix trunk_out = mlp_forward_nocache(model.trunk, trunk_input(model, ds.coords));
    const std::int64_t q = ds.coords.rows();
    const int p = model.config.latent_p, c = model.config.out_channels;

    std::vector<double> pred(static_cast<std::size_t>(q * c));
    for (std::int64_t i = lo; i < hi; ++i) {
        const Matrix branch_out = mlp_forward_nocache(model.branch, ds.branch.row(i));
        for (int ch = 0; ch < c; ++ch) {
            const Vector vals =
                trunk_out.middleCols(ch * p, p) * branch_out.row(0).segment(ch * p, p).transpose();
            for (std::int64_t j = 0; j < q; ++j) pred[static_cast<std::size_t>(j * c + ch)] = vals(j);
        }
        report.sample_indices.push_back(i);
        report.per_sample_rel_l2.push_back(relative_l2(pred, ds.target(i)));
    }

    const auto& errs = report.per_sample_rel_l2;
    const std::size_t n = errs.size();
    double sum = 0.0;
    for (double e : errs) sum += e;
    report.mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (double e : errs) var += (e - report.mean) * (e - report.mean);
    report.stddev = std::sqrt(var / static_cast<double>(n));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return errs[a] < errs[b]; });
    report.min = errs[order.front()];
    report.max = errs[order.back()];
    const std::size_t mid = (n - 1) / 2;
    report.median = n % 2 == 1 ? errs[order[mid]] : 0.5 * (errs[order[mid]] + errs[order[mid + 1]]);
    report.best_index = report.sample_indices[order.front()];
    report.worst_index = report.sample_indices[order.back()];
    report.median_index = report.sample_indices[order[mid]];
    return report;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_report_json(const EvalReport& report, const std::string& path) {
    nlohmann::json j;
    j["benchmark"] = benchmark_name(report.benchmark);
    j["variant"] = report.variant;
    j["sample_count"] = report.per_sample_rel_l2.size();
    j["mean"] = report.mean;
    j["std"] = report.stddev;
    j["min"] = report.min;
    j["max"] = report.max;
    j["median"] = report.median;
    j["best_index"] = report.best_index;
    j["median_index"] = report.median_index;
    j["worst_index"] = report.worst_index;
    j["sample_indices"] = report.sample_indices;
    j["per_sample_rel_l2"] = report.per_sample_rel_l2;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

void write_per_sample_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_per_sample_csv: cannot open " + path);
    out << "sample_index,rel_l2\n";
    for (std::size_t i = 0; i < report.per_sample_rel_l2.size(); ++i)
        out << report.sample_indices[i] << "," << fmt_double(report.per_sample_rel_l2[i]) << "\n";
}

void write_spectrum_csv(const SpectrumTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_spectrum_csv: cannot open " + path);
    out << "k,e_truth,e_pred\n";
    for (std::size_t i = 0; i < table.wavenumber.size(); ++i)
        out << table.wavenumber[i] << "," << fmt_double(table.truth[i]) << ","
            << fmt_double(table.pred[i]) << "\n";
}

}  // namespace fedonet
