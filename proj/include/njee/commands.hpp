#pragma once

// Subcommand implementations behind the njee CLI. Every command reads a fully
// resolved Options value; precedence (flags > JSON config > defaults) is
// settled by the caller.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "njee/nn.hpp"
#include "njee/synth.hpp"

namespace njee {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_acceptance = 3 };

struct Options {
    // Synthetic univariate source.
    std::string dist = "uniform";
    double alpha = 1.0;
    double p = 0.5;
    double sigma = 1e4;
    std::size_t k = 16;

    std::vector<std::size_t> n;  // empty: command default
    std::size_t reps = 1;

    // Gaussian pair.
    std::vector<double> rho;  // empty: staircase at MI 0, 2, 4, 6
    std::size_t dim = 20;
    std::size_t bins = 8;
    bool cubic = false;

    // Transfer entropy.
    std::size_t lags_source = 5;
    std::size_t lags_target = 5;
    std::size_t window = 30;
    std::size_t stride = 1;
    bool retrain_per_window = false;
    double coupling = 0.5;

    double holdout = 0.0;
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    std::vector<std::string> methods{"njee", "plugin", "miller_madow", "chao_shen"};
    std::uint64_t seed = 7;
    std::size_t jobs = 1;
    std::string out;

    // CSV inputs.
    std::vector<std::string> input;
    int column = -1;
    std::vector<std::size_t> x_columns;
    std::vector<std::size_t> y_columns;
    std::vector<std::size_t> z_columns;

    // bench
    std::vector<std::string> only;

    TrainConfig train_config() const;
};

void to_json(nlohmann::json& j, const Options& o);
// Unknown keys and wrongly typed values throw std::invalid_argument.
void from_json(const nlohmann::json& j, Options& o);

struct RunContext {
    std::string command_line;
    std::ostream& out;
    std::ostream& err;
};

int cmd_entropy(const Options& options, const RunContext& ctx);
int cmd_mi(const Options& options, const RunContext& ctx);
int cmd_cmi(const Options& options, const RunContext& ctx);
int cmd_te(const Options& options, const RunContext& ctx);
int cmd_cit(const Options& options, const RunContext& ctx);

// CMI score of each corpus triplet on an n-row sample; case i uses sample seed
// derive_seed(seed, 1000 + i) and training seed derive_seed(seed, 2000 + i).
std::vector<double> cit_scores(const std::vector<CitTriplet>& corpus, std::size_t n, std::uint64_t seed,
                               const TrainConfig& config, std::size_t jobs);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct BenchReport {
    std::vector<CriterionResult> criteria;
    bool all_passed() const;
};

// Acceptance bench: writes one CSV per experiment into options.out (default
// "bench_results") plus criteria.csv. Sections for options.only: mi, entropy,
// ce_bound, nulls, te, cit, grad (empty runs all).
BenchReport run_bench(const Options& options, const RunContext& ctx);

// run_bench, then one PASS/FAIL line per criterion; exit_acceptance on any failure.
int cmd_bench(const Options& options, const RunContext& ctx);

}  // namespace njee
