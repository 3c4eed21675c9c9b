#include "fedonet/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"FEDONet operator-learning benchmark toolkit"};
    app.require_subcommand(1);

    fedonet::cli::GenerateArgs gen;
    auto* cmd_gen = app.add_subcommand("generate", "Generate a benchmark dataset");
    cmd_gen->add_option("--benchmark", gen.benchmark,
                        "poisson2d|burgers1d|lorenz63|eikonal|lorenz96|allen_cahn|ks")
        ->required();
    cmd_gen->add_option("--count", gen.count, "Number of samples")->required();
    cmd_gen->add_option("--seed", gen.seed, "Base seed");
    cmd_gen->add_option("--out", gen.out, "Output dataset file")->required();
    cmd_gen->add_option("--param", gen.param_overrides, "Override key=value (repeatable)");
    std::int64_t train_count = -1;
    cmd_gen->add_option("--train-count", train_count, "Train split size (default 90%)");
    cmd_gen->add_option("--threads", gen.threads,
                        "Worker threads (default FEDONET_THREADS or logical cores)");

    fedonet::cli::TrainArgs tr;
    auto* cmd_train = app.add_subcommand("train", "Train a model on a dataset");
    cmd_train->add_option("--data", tr.data, "Dataset file")->required();
    cmd_train->add_option("--variant", tr.variant, "vanilla|fedonet")->required();
    cmd_train->add_option("--out", tr.out, "Checkpoint output path")->required();
    cmd_train->add_option("--config", tr.config_file, "Flat key=value config file");

    fedonet::cli::EvalArgs ev;
    auto* cmd_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    cmd_eval->add_option("--data", ev.data, "Dataset file")->required();
    cmd_eval->add_option("--ckpt", ev.ckpt, "Checkpoint file")->required();
    cmd_eval->add_option("--ckpt2", ev.ckpt2, "Second checkpoint for a paired table");
    cmd_eval->add_option("--out", ev.out_dir, "Output directory")->required();
    cmd_eval->add_flag("--spectra", ev.spectra, "Emit energy-spectrum tables");
    cmd_eval->add_option("--strata", ev.strata, "Comma list from best,median,worst");

    bool quick = false;
    auto* cmd_selftest = app.add_subcommand("selftest", "Run built-in diagnostics");
    cmd_selftest->add_flag("--quick", quick, "Reduced sizes, finishes in well under a minute");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fedonet::cli::kUsage;
    }

    if (cmd_gen->parsed()) {
        if (train_count >= 0) gen.train_count = train_count;
        return fedonet::cli::run_generate(gen, std::cout, std::cerr);
    }
    if (cmd_train->parsed()) return fedonet::cli::run_train(tr, std::cout, std::cerr);
    if (cmd_eval->parsed()) return fedonet::cli::run_eval(ev, std::cout, std::cerr);
    if (cmd_selftest->parsed()) return fedonet::cli::run_selftest(quick, std::cout);
    return fedonet::cli::kUsage;
}
