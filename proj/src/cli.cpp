#include "fedonet/cli.hpp"

#include "fedonet/datagen.hpp"
#include "fedonet/evaluation.hpp"
#include "fedonet/persistence.hpp"
#include "fedonet/rng.hpp"
#include "fedonet/solvers.hpp"
#include "fedonet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

namespace fedonet::cli {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FEDONET_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& kvs) {
    std::map<std::string, double> overrides;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("--param expects key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        std::size_t used = 0;
        const double value = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1)
            throw std::invalid_argument("--param " + key + ": value is not a number");
        overrides[key] = value;
    }
    return overrides;
}

// Post-generation invariant sweep over ~1% of the stored samples plus one
// cheap solver oracle per benchmark.
void invariant_summary(const Dataset& ds, std::ostream& out) {
    const std::int64_t checks = std::max<std::int64_t>(1, ds.count() / 100);
    std::int64_t checked = 0;
    bool ok = true;
    for (std::int64_t i = 0; i < ds.count(); i += std::max<std::int64_t>(1, ds.count() / checks)) {
        ++checked;
        const auto target = ds.target(i);
        for (double v : target)
            if (!std::isfinite(v)) ok = false;
        const auto& axes = ds.spec.query_axes;
        switch (ds.spec.id) {
            case BenchmarkId::Burgers1d:
            case BenchmarkId::Ks: {
                const std::int64_t nt = axes[0].res, nx = axes[1].res;
                double mean0 = 0.0;
                for (std::int64_t j = 0; j < nx; ++j) mean0 += target[static_cast<std::size_t>(j)];
                mean0 /= static_cast<double>(nx);
                for (std::int64_t t = 1; t < nt; ++t) {
                    double mean_t = 0.0;
                    for (std::int64_t j = 0; j < nx; ++j)
                        mean_t += target[static_cast<std::size_t>(t * nx + j)];
                    mean_t /= static_cast<double>(nx);
                    if (std::abs(mean_t - mean0) > 1e-8) ok = false;
                }
                break;
            }
            case BenchmarkId::Eikonal: {
                double mx = 0.0;
                for (double v : target) mx = std::max(mx, std::abs(v));
                if (std::abs(mx - 1.0) > 1e-12) ok = false;
                break;
            }
            default: break;
        }
    }
    out << "invariants: " << (ok ? "ok" : "FAILED") << " on " << checked << " sampled pair(s)\n";

    switch (ds.spec.id) {
        case BenchmarkId::Poisson2d: {
            const int n = static_cast<int>(ds.spec.query_axes[0].res);
            Matrix f(n, n);
            const double h = 1.0 / static_cast<double>(n - 1);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    f(i, j) = -2.0 * std::numbers::pi * std::numbers::pi *
                              std::sin(std::numbers::pi * i * h) * std::sin(std::numbers::pi * j * h);
            const Matrix u = solve_poisson_fd(f);
            double num = 0.0, den = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double exact =
                        std::sin(std::numbers::pi * i * h) * std::sin(std::numbers::pi * j * h);
                    num += (u(i, j) - exact) * (u(i, j) - exact);
                    den += exact * exact;
                }
            out << "solver oracle: manufactured-solution rel l2 = " << fmt(std::sqrt(num / den)) << "\n";
            break;
        }
        case BenchmarkId::Lorenz96: {
            const double forcing = ds.spec.param("F");
            const Vector x0 = Vector::Constant(static_cast<int>(ds.spec.input_axes[0].res), forcing);
            const Matrix traj = integrate_lorenz96(x0, forcing, ds.spec.param("dt"), 100, 101);
            out << "solver oracle: equilibrium residual = "
                << fmt((traj.rowwise() - x0.transpose()).cwiseAbs().maxCoeff()) << "\n";
            break;
        }
        case BenchmarkId::Lorenz63: {
            const double rho = ds.spec.param("rho"), beta = ds.spec.param("beta");
            const double fp = std::sqrt(beta * (rho - 1.0));
            Matrix traj = integrate_lorenz63_from(Eigen::Vector3d(fp, fp, rho - 1.0), 3.0, 100,
                                                  ds.spec.param("sigma"), rho, beta);
            traj.col(0).array() -= fp;
            traj.col(1).array() -= fp;
            traj.col(2).array() -= rho - 1.0;
            out << "solver oracle: fixed-point drift = " << fmt(traj.cwiseAbs().maxCoeff()) << "\n";
            break;
        }
        default:
            out << "solver oracle: covered by per-sample invariants\n";
            break;
    }
}

struct TrainFileConfig {
    std::vector<int> branch_hidden = {128, 128};
    std::vector<int> trunk_hidden = {128, 128};
    int latent_p = 128;
    Activation activation = Activation::Tanh;
    int embed_m = 128;
    double embed_sigma = 5.0;
    std::optional<std::uint64_t> embed_seed;
    std::uint64_t model_seed = 1;
    TrainConfig train;
};

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw std::invalid_argument("empty layer list");
    return out;
}

TrainFileConfig parse_train_config(const std::string& path) {
    TrainFileConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not readable: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);

        if (key == "branch_hidden") cfg.branch_hidden = parse_int_list(val);
        else if (key == "trunk_hidden") cfg.trunk_hidden = parse_int_list(val);
        else if (key == "latent_p") cfg.latent_p = std::stoi(val);
        else if (key == "activation") {
            if (val == "tanh") cfg.activation = Activation::Tanh;
            else if (val == "relu") cfg.activation = Activation::Relu;
            else throw std::invalid_argument("activation must be tanh or relu");
        } else if (key == "embed_m") cfg.embed_m = std::stoi(val);
        else if (key == "embed_sigma") cfg.embed_sigma = std::stod(val);
        else if (key == "embed_seed") cfg.embed_seed = std::stoull(val);
        else if (key == "model_seed") cfg.model_seed = std::stoull(val);
        else if (key == "batch_functions") cfg.train.batch_functions = std::stoi(val);
        else if (key == "queries_per_function") cfg.train.queries_per_function = std::stoi(val);
        else if (key == "lr") cfg.train.lr = std::stod(val);
        else if (key == "lr_schedule") {
            if (val == "constant") cfg.train.lr_schedule = LrSchedule::Constant;
            else if (val == "step") cfg.train.lr_schedule = LrSchedule::Step;
            else throw std::invalid_argument("lr_schedule must be constant or step");
        } else if (key == "gamma") cfg.train.gamma = std::stod(val);
        else if (key == "lr_every") cfg.train.lr_every = std::stoi(val);
        else if (key == "max_steps") cfg.train.max_steps = std::stoi(val);
        else if (key == "eval_every") cfg.train.eval_every = std::stoi(val);
        else if (key == "train_seed") cfg.train.seed = std::stoull(val);
        else throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key " + key);
    }
    return cfg;
}

ModelConfig build_model_config(const Dataset& ds, Variant variant, const TrainFileConfig& cfg) {
    ModelConfig mc;
    mc.variant = variant;
    mc.latent_p = cfg.latent_p;
    mc.out_channels = ds.spec.out_channels;
    mc.sensor_count = static_cast<int>(ds.spec.sensor_count());
    mc.coord_dim = ds.spec.coord_dim();
    mc.activation = cfg.activation;
    const int latent_width = mc.latent_p * mc.out_channels;
    mc.branch_layers.push_back(mc.sensor_count);
    for (int h : cfg.branch_hidden) mc.branch_layers.push_back(h);
    mc.branch_layers.push_back(latent_width);
    if (variant == Variant::Fedonet) {
        EmbedConfig embed;
        embed.mapping_size = cfg.embed_m;
        embed.sigma = cfg.embed_sigma;
        embed.seed = cfg.embed_seed.value_or(mix_seed(cfg.model_seed, 0x5EEDull));
        mc.embed = embed;
        mc.trunk_layers.push_back(2 * cfg.embed_m);
    } else {
        mc.trunk_layers.push_back(mc.coord_dim);
    }
    for (int h : cfg.trunk_hidden) mc.trunk_layers.push_back(h);
    mc.trunk_layers.push_back(latent_width);
    return mc;
}

Matrix field_matrix(const Dataset& ds, std::span<const double> values, int channel) {
    const auto& axes = ds.spec.query_axes;
    const std::int64_t rows = axes[0].res;
    const std::int64_t cols = axes.size() > 1 ? axes[1].res : 1;
    const int c = ds.spec.out_channels;
    Matrix m(rows, cols);
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < cols; ++j)
            m(i, j) = values[static_cast<std::size_t>((i * cols + j) * c + channel)];
    return m;
}

void write_fields_csv(const Dataset& ds, std::span<const double> truth, const Matrix& pred,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    const int c = ds.spec.out_channels;
    const int d = ds.spec.coord_dim();
    for (std::size_t a = 0; a < ds.spec.query_axes.size(); ++a) {
        // header columns in coordinate order
        for (std::size_t b = 0; b < ds.spec.query_axes.size(); ++b)
            if (ds.spec.coord_col_of_axis[b] == static_cast<int>(a))
                out << ds.spec.query_axes[b].name << ",";
    }
    for (int ch = 0; ch < c; ++ch)
        out << "truth_" << ch << ",pred_" << ch << ",abs_err_" << ch << (ch + 1 < c ? "," : "\n");
    for (std::int64_t j = 0; j < ds.coords.rows(); ++j) {
        for (int col = 0; col < d; ++col) {
            // de-normalize back to physical axis values
            for (std::size_t a = 0; a < ds.spec.query_axes.size(); ++a)
                if (ds.spec.coord_col_of_axis[a] == col) {
                    const auto& ax = ds.spec.query_axes[a];
                    out << fmt(ax.lo + ds.coords(j, col) * (ax.hi - ax.lo)) << ",";
                }
        }
        for (int ch = 0; ch < c; ++ch) {
            const double t = truth[static_cast<std::size_t>(j * c + ch)];
            const double p = pred(j, ch);
            out << fmt(t) << "," << fmt(p) << "," << fmt(std::abs(p - t)) << (ch + 1 < c ? "," : "\n");
        }
    }
}

void write_stratum_outputs(const Dataset& ds, const DeepOnetModel& model, std::int64_t sample,
                           const std::string& stratum, const std::string& dir, bool spectra) {
    const Matrix pred = predict_field(model, ds.branch.row(sample).transpose(), ds.coords);
    const auto truth = ds.target(sample);
    write_fields_csv(ds, truth, pred, dir + "/fields_" + stratum + ".csv");

    const auto& axes = ds.spec.query_axes;
    const int c = ds.spec.out_channels;
    const bool has_time = !axes.empty() && axes[0].name == "t";
    if (has_time) {
        const std::int64_t nt = axes[0].res;
        const std::int64_t width = ds.coords.rows() / nt * c;
        Matrix pf(nt, width), tf(nt, width);
        for (std::int64_t t = 0; t < nt; ++t)
            for (std::int64_t w = 0; w < width; ++w) {
                pf(t, w) = pred(t * (width / c) + w / c, w % c);
                tf(t, w) = truth[static_cast<std::size_t>(t * width + w)];
            }
        const auto curve = cumulative_error(pf, tf);
        std::ofstream out(dir + "/cumulative_" + stratum + ".csv", std::ios::binary);
        out << "t,cumulative_rel_l2\n";
        for (std::int64_t t = 0; t < nt; ++t)
            out << fmt(axes[0].value(t)) << "," << fmt(curve[static_cast<std::size_t>(t)]) << "\n";
    }

    if (!spectra) return;
    switch (ds.spec.id) {
        case BenchmarkId::Poisson2d:
        case BenchmarkId::Eikonal: {
            const Matrix tm = field_matrix(ds, truth, 0);
            Matrix pm(tm.rows(), tm.cols());
            for (std::int64_t j = 0; j < ds.coords.rows(); ++j) pm(j / tm.cols(), j % tm.cols()) = pred(j, 0);
            write_spectrum_csv(spectrum_compare_2d(tm, pm), dir + "/spectrum_" + stratum + ".csv");
            break;
        }
        case BenchmarkId::Lorenz63: {
            for (int ch = 0; ch < c; ++ch) {
                std::vector<double> tv(static_cast<std::size_t>(ds.coords.rows()));
                std::vector<double> pv(tv.size());
                for (std::int64_t j = 0; j < ds.coords.rows(); ++j) {
                    tv[static_cast<std::size_t>(j)] = truth[static_cast<std::size_t>(j * c + ch)];
                    pv[static_cast<std::size_t>(j)] = pred(j, ch);
                }
                write_spectrum_csv(spectrum_compare_1d(tv, pv),
                                   dir + "/spectrum_" + stratum + "_c" + std::to_string(ch) + ".csv");
            }
            break;
        }
        default: {
            // spatial spectrum of the final time snapshot
            const std::int64_t nx = axes[1].res;
            const std::int64_t offset = (axes[0].res - 1) * nx;
            std::vector<double> tv(static_cast<std::size_t>(nx)), pv(static_cast<std::size_t>(nx));
            for (std::int64_t j = 0; j < nx; ++j) {
                tv[static_cast<std::size_t>(j)] = truth[static_cast<std::size_t>((offset + j) * c)];
                pv[static_cast<std::size_t>(j)] = pred(offset + j, 0);
            }
            write_spectrum_csv(spectrum_compare_1d(tv, pv), dir + "/spectrum_" + stratum + ".csv");
            break;
        }
    }
}

}  // namespace

int run_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const auto id = parse_benchmark(args.benchmark);
        if (!id) {
            err << "error: unknown benchmark '" << args.benchmark << "'\n";
            return kUsage;
        }
        const BenchmarkSpec spec = make_benchmark_spec(*id, parse_overrides(args.param_overrides));
        GenerateOptions opt;
        opt.count = args.count;
        opt.base_seed = args.seed;
        opt.train_count = args.train_count;
        opt.threads = thread_count(args.threads);
        const Dataset ds = generate_dataset(spec, opt);
        write_dataset(ds, args.out);
        out << "wrote " << args.out << ": " << ds.count() << " sample(s), " << ds.spec.sensor_count()
            << " sensors, " << ds.coords.rows() << " queries, split " << ds.train_count << "/"
            << ds.test_count() << ", redraws " << ds.redraw_count << "\n";
        invariant_summary(ds, out);
        return kOk;
    } catch (const SolverError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
}

int run_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
    try {
        if (args.variant != "vanilla" && args.variant != "fedonet") {
            err << "error: --variant must be vanilla or fedonet\n";
            return kUsage;
        }
        const Dataset ds = read_dataset(args.data);
        const TrainFileConfig cfg = parse_train_config(args.config_file);
        const Variant variant = args.variant == "fedonet" ? Variant::Fedonet : Variant::Vanilla;
        const ModelConfig mc = build_model_config(ds, variant, cfg);
        DeepOnetModel model = build_model(mc, cfg.model_seed);

        TrainResult result = train(std::move(model), ds, cfg.train, nullptr, nullptr, 0,
                                   [&](const LossEntry& e) {
                                       out << "step " << e.step << "  mse " << fmt(e.train_mse)
                                           << "  holdout_rel_l2 " << fmt(*e.holdout_rel_l2) << "\n";
                                   });

        const std::string loss_path = args.out + ".loss.csv";
        write_loss_csv(result.history, loss_path);
        if (result.diverged) {
            err << "numerical failure: training diverged at step " << result.final_step
                << "; partial history saved to " << loss_path << "\n";
            return kNumerical;
        }

        Checkpoint ckpt;
        ckpt.config = result.model.config;
        ckpt.benchmark = ds.spec.id;
        ckpt.branch = result.model.branch;
        ckpt.trunk = result.model.trunk;
        ckpt.freq = result.model.freq;
        ckpt.branch_adam = result.branch_adam;
        ckpt.trunk_adam = result.trunk_adam;
        ckpt.train_step = result.final_step;
        ckpt.model_seed = cfg.model_seed;
        ckpt.train_seed = cfg.train.seed;
        save_checkpoint(ckpt, args.out);
        out << "wrote " << args.out << " (" << result.final_step << " steps) and " << loss_path << "\n";
        return kOk;
    } catch (const DivergenceError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
}

int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const Dataset ds = read_dataset(args.data);
        const Checkpoint ckpt = load_checkpoint(args.ckpt);
        if (ckpt.benchmark != ds.spec.id) {
            err << "error: checkpoint benchmark " << benchmark_name(ckpt.benchmark)
                << " does not match dataset benchmark " << benchmark_name(ds.spec.id) << "\n";
            return kValidation;
        }
        std::filesystem::create_directories(args.out_dir);
        const DeepOnetModel model = ckpt.to_model();
        const Split split = ds.test_count() > 0 ? Split::Test : Split::All;
        const EvalReport report = evaluate_model(model, ds, split);
        write_report_json(report, args.out_dir + "/report.json");
        write_per_sample_csv(report, args.out_dir + "/per_sample.csv");
        out << "eval " << benchmark_name(report.benchmark) << " " << report.variant << ": mean "
            << fmt(report.mean) << "  std " << fmt(report.stddev) << "  median " << fmt(report.median)
            << "  n " << report.per_sample_rel_l2.size() << "\n";

        std::stringstream strata(args.strata);
        std::string stratum;
        while (std::getline(strata, stratum, ',')) {
            std::int64_t idx;
            if (stratum == "best") idx = report.best_index;
            else if (stratum == "median") idx = report.median_index;
            else if (stratum == "worst") idx = report.worst_index;
            else {
                err << "error: unknown stratum '" << stratum << "'\n";
                return kUsage;
            }
            write_stratum_outputs(ds, model, idx, stratum, args.out_dir, args.spectra);
        }

        if (!args.ckpt2.empty()) {
            const Checkpoint other = load_checkpoint(args.ckpt2);
            if (other.benchmark != ds.spec.id) {
                err << "error: second checkpoint benchmark mismatch\n";
                return kValidation;
            }
            const EvalReport report2 = evaluate_model(other.to_model(), ds, split);
            std::ofstream paired(args.out_dir + "/paired_table.csv", std::ios::binary);
            paired << "variant,mean_rel_l2,std_rel_l2\n";
            paired << report.variant << "," << fmt(report.mean) << "," << fmt(report.stddev) << "\n";
            paired << report2.variant << "," << fmt(report2.mean) << "," << fmt(report2.stddev) << "\n";
            out << "paired: " << report.variant << " " << fmt(report.mean) << " vs " << report2.variant
                << " " << fmt(report2.mean) << "\n";
        }
        return kOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
}

int run_selftest(bool quick, std::ostream& out) {
    int failures = 0;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        out << (pass ? "[PASS] " : "[FAIL] ") << name << " — " << detail << "\n";
        if (!pass) ++failures;
    };

    // whitening Monte-Carlo (Appendix-style diagnostic)
    {
        const int m = quick ? 64 : 128;
        const std::int64_t n = quick ? 20000 : 100000;
        const FreqMatrix freq = sample_frequency_matrix(m, 2, 5.0, 4);
        const double dev = whitening_diagnostic(freq, n, 11);
        check("whitening", dev <= 0.08, "max deviation " + fmt(dev) + " (limit 0.08)");
    }
    {
        Rng rng(5);
        const FreqMatrix freq = sample_frequency_matrix(128, 2, 5.0, 3);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            Vector zeta(2);
            zeta << rng.uniform01(), rng.uniform01();
            const Vector phi = fourier_embed(freq, zeta);
            worst = std::max(worst, std::abs(phi.squaredNorm() - 2.0 * 128.0));
        }
        check("embedding norm", worst <= 1e-12 * 256.0, "max |phi^2 - 2M| = " + fmt(worst));
    }

    // gradient finite differences through the full model
    {
        double worst = 0.0;
        const int n_models = quick ? 4 : 20;
        for (int trial = 0; trial < n_models; ++trial) {
            const bool fed = trial % 2 == 1;
            ModelConfig mc;
            mc.variant = fed ? Variant::Fedonet : Variant::Vanilla;
            mc.latent_p = 2;
            mc.out_channels = 1;
            mc.sensor_count = 3;
            mc.coord_dim = 2;
            if (fed) mc.embed = EmbedConfig{4, 3.0, 77ull + trial};
            mc.branch_layers = {3, 6, 2};
            mc.trunk_layers = {fed ? 8 : 2, 6, 2};
            DeepOnetModel model = build_model(mc, 100 + trial);
            Rng rng(200 + trial);
            Matrix u(2, 3), coords(3, 2);
            for (int i = 0; i < u.size(); ++i) u.data()[i] = rng.normal();
            for (int i = 0; i < coords.size(); ++i) coords.data()[i] = rng.uniform01();
            Tensor3 dl(2, 3, 1);
            for (auto& v : dl.v) v = rng.normal();

            ModelCache cache;
            model_forward(model, u, coords, &cache);
            const ModelGrads grads = model_backward(model, cache, dl);
            auto loss_of = [&]() {
                const Tensor3 pred = model_forward(model, u, coords);
                double s = 0.0;
                for (std::size_t i = 0; i < pred.v.size(); ++i) s += pred.v[i] * dl.v[i];
                return s;
            };
            const double h = 1e-6;
            auto check_block = [&](Matrix& w, const Matrix& g) {
                for (int i = 0; i < std::min<int>(4, static_cast<int>(w.size())); ++i) {
                    double& x = w.data()[i];
                    const double save = x;
                    x = save + h;
                    const double lp = loss_of();
                    x = save - h;
                    const double lm = loss_of();
                    x = save;
                    const double fd = (lp - lm) / (2.0 * h);
                    const double an = g.data()[i];
                    worst = std::max(worst,
                                     std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4}));
                }
            };
            for (std::size_t l = 0; l < model.branch.weights.size(); ++l)
                check_block(model.branch.weights[l], grads.branch.weights[l]);
            for (std::size_t l = 0; l < model.trunk.weights.size(); ++l)
                check_block(model.trunk.weights[l], grads.trunk.weights[l]);
        }
        check("gradients", worst <= 1e-5, "max FD relative error " + fmt(worst));
    }

    // solver oracles
    {
        const int n = quick ? 64 : 128;
        Matrix f(n, n);
        const double h = 1.0 / static_cast<double>(n - 1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                f(i, j) = -2.0 * std::numbers::pi * std::numbers::pi *
                          std::sin(std::numbers::pi * i * h) * std::sin(std::numbers::pi * j * h);
        const Matrix u = solve_poisson_fd(f);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double exact = std::sin(std::numbers::pi * i * h) * std::sin(std::numbers::pi * j * h);
                num += (u(i, j) - exact) * (u(i, j) - exact);
                den += exact * exact;
            }
        const double rel = std::sqrt(num / den);
        check("poisson oracle", rel <= 1e-3, "manufactured-solution rel l2 = " + fmt(rel));
    }
    {
        const int nx = quick ? 64 : 128;
        const Vector s = sample_burgers_ic(nx, 4);
        const Matrix u = solve_burgers(s, 0.01, quick ? 21 : 101);
        double drift = 0.0;
        bool decay = true;
        double prev = u.row(0).squaredNorm();
        for (int t = 1; t < u.rows(); ++t) {
            drift = std::max(drift, std::abs(u.row(t).mean() - u.row(0).mean()));
            const double e = u.row(t).squaredNorm();
            if (e > prev * (1.0 + 1e-12) + 1e-12) decay = false;
            prev = e;
        }
        check("burgers oracle", drift <= 1e-8 && decay,
              "mean drift " + fmt(drift) + ", energy decay " + (decay ? "ok" : "violated"));
    }
    {
        const Vector x0 = Vector::Constant(40, 4.0);
        const Matrix traj = integrate_lorenz96(x0, 4.0, 0.01, 200, 201);
        const double resid = (traj.rowwise() - x0.transpose()).cwiseAbs().maxCoeff();
        check("lorenz96 oracle", resid <= 1e-12, "equilibrium residual " + fmt(resid));
    }
    {
        Vector ones = Vector::Constant(200, 1.0);
        const Matrix u1 = solve_allen_cahn(ones, 1e-4, 0.005, 50);
        Vector zeros = Vector::Zero(200);
        const Matrix u0 = solve_allen_cahn(zeros, 1e-4, 0.005, 50);
        const double d1 = (u1.array() - 1.0).abs().maxCoeff();
        const double d0 = u0.cwiseAbs().maxCoeff();
        check("allen-cahn oracle", d1 == 0.0 && d0 == 0.0,
              "fixed-point drift " + fmt(std::max(d1, d0)));
    }
    {
        const int nx = 128;
        const double length = 24.0, amp = 1e-8;
        const int mode = 12;
        Vector u0(nx);
        for (int j = 0; j < nx; ++j)
            u0(j) = amp * std::sin(mode * (2.0 * std::numbers::pi * j / nx));
        const double horizon = 1.0;
        const Matrix traj = solve_ks(u0, length, horizon, 21, 0.05);
        const double q = static_cast<double>(mode) / length;
        const double expected = std::exp((q * q - q * q * q * q) * horizon);
        const double got = traj.row(20).cwiseAbs().maxCoeff() / amp;
        const double rel = std::abs(got - expected) / expected;
        check("ks dispersion oracle", rel <= 0.01,
              "amplitude ratio " + fmt(got) + " vs exp((k^2-k^4)t) = " + fmt(expected));
    }
    {
        const int n = quick ? 128 : 256;
        const double r_disk = n * 0.25;
        const double c = 0.5 * (n - 1);
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (std::hypot(i - c, j - c) <= r_disk) mask[static_cast<std::size_t>(i) * n + j] = 1;
        const Matrix s = signed_distance_field(mask, n);
        double smax = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) smax = std::max(smax, std::abs(std::hypot(i - c, j - c) - r_disk));
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double expect = std::hypot(i - c, j - c) - r_disk;
                worst = std::max(worst, std::abs(s(i, j) * smax - expect));
            }
        check("sdf disk oracle", worst <= 1.5, "max deviation " + fmt(worst) + " px");
    }

    if (!quick) {
        const SupersetDemoResult demo = superset_demo(20000, 21);
        check("superset demo", demo.fedonet_mse <= 1e-3 && demo.vanilla_mse >= 1e-1,
              "fedonet MSE " + fmt(demo.fedonet_mse) + ", vanilla MSE " + fmt(demo.vanilla_mse));
    }

    out << (failures == 0 ? "selftest: all checks passed\n"
                          : "selftest: " + std::to_string(failures) + " check(s) failed\n");
    return failures == 0 ? kOk : kNumerical;
}

}  // namespace fedonet::cli
