#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fedonet::cli {

// Exit codes shared by every subcommand.
constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kValidation = 3;
constexpr int kNumerical = 4;

struct GenerateArgs {
    std::string benchmark;
    std::int64_t count = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::vector<std::string> param_overrides;  // "key=value"
    std::optional<std::int64_t> train_count;
    int threads = 0;  // 0: FEDONET_THREADS env or logical cores
};

struct TrainArgs {
    std::string data;
    std::string variant = "vanilla";
    std::string out;
    std::string config_file;  // flat key=value, optional
};

struct EvalArgs {
    std::string data;
    std::string ckpt;
    std::string ckpt2;  // optional paired comparison
    std::string out_dir;
    bool spectra = false;
    std::string strata = "best,median,worst";
};

int run_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);
int run_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int run_selftest(bool quick, std::ostream& out);

}  // namespace fedonet::cli
