#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "njee/commands.hpp"
#include "njee/io.hpp"
#include "njee/nn.hpp"

namespace {

using njee::Options;

std::string key_of(const CLI::Option* opt) {
    std::string name = opt->get_lnames().front();
    for (char& c : name)
        if (c == '-') c = '_';
    return name;
}

struct Flags {
    Options values;
    std::string config;
    std::vector<CLI::Option*> registered;

    void add(CLI::App& app) {
        auto& v = values;
        auto reg = [&](CLI::Option* o) { registered.push_back(o); };
        reg(app.add_option("--dist", v.dist, "uniform | zipf | geometric | laplace | mixture"));
        reg(app.add_option("--alpha", v.alpha, "Zipf exponent"));
        reg(app.add_option("--p", v.p, "geometric success probability"));
        reg(app.add_option("--sigma", v.sigma, "discretized Laplace scale"));
        reg(app.add_option("--k", v.k, "alphabet size"));
        reg(app.add_option("--n", v.n, "sample size(s)")->delimiter(','));
        reg(app.add_option("--reps", v.reps, "repetitions per sample size"));
        reg(app.add_option("--rho", v.rho, "Gaussian pair correlation(s)")->delimiter(','));
        reg(app.add_option("--dim", v.dim, "Gaussian pair dimension"));
        reg(app.add_option("--bins", v.bins, "quantization bins per dimension"));
        reg(app.add_flag("--cubic", v.cubic, "apply the cubic mixing transform"));
        reg(app.add_option("--lags-source", v.lags_source, "source lag order"));
        reg(app.add_option("--lags-target", v.lags_target, "target lag order"));
        reg(app.add_option("--window", v.window, "rolling window length"));
        reg(app.add_option("--stride", v.stride, "rolling window stride"));
        reg(app.add_flag("--retrain-per-window", v.retrain_per_window, "train fresh classifiers in every window"));
        reg(app.add_option("--coupling", v.coupling, "coupling of the synthetic TE fixture"));
        reg(app.add_option("--holdout", v.holdout, "validation fraction for early stopping (0: in-sample)"));
        reg(app.add_option("--max-epochs", v.max_epochs, "epoch cap"));
        reg(app.add_option("--patience", v.patience, "early stopping patience"));
        reg(app.add_option("--methods", v.methods, "entropy estimators")->delimiter(','));
        reg(app.add_option("--seed", v.seed, "master seed"));
        reg(app.add_option("--jobs", v.jobs, "worker threads"));
        reg(app.add_option("--out", v.out, "output CSV (bench: directory)"));
        reg(app.add_option("--input", v.input, "input CSV file(s)"));
        reg(app.add_option("--column", v.column, "column of the input used by entropy"));
        reg(app.add_option("--x-columns", v.x_columns, "X columns")->delimiter(','));
        reg(app.add_option("--y-columns", v.y_columns, "Y columns")->delimiter(','));
        reg(app.add_option("--z-columns", v.z_columns, "Z columns")->delimiter(','));
        reg(app.add_option("--only", v.only, "bench sections to run")->delimiter(','));
        app.add_option("--config", config, "JSON config file");
    }

    Options resolve() const {
        nlohmann::json merged;
        njee::to_json(merged, Options{});
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) throw njee::DataError(config + ": cannot open config");
            nlohmann::json file;
            try {
                file = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw njee::DataError(config + ": " + e.what());
            }
            Options check;
            njee::from_json(file, check);
            merged.merge_patch(file);
        }
        nlohmann::json given;
        njee::to_json(given, values);
        for (const auto* opt : registered) {
            if (opt->count() > 0) merged[key_of(opt)] = given[key_of(opt)];
        }
        Options out;
        njee::from_json(merged, out);
        return out;
    }
};

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural joint entropy estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags flags;
    flags.add(app);

    const std::map<std::string, std::pair<std::string, std::function<int(const Options&, const njee::RunContext&)>>>
        commands{
            {"entropy", {"entropy of a synthetic source or an input column", njee::cmd_entropy}},
            {"mi", {"mutual information (Gaussian staircase or input columns)", njee::cmd_mi}},
            {"cmi", {"conditional mutual information", njee::cmd_cmi}},
            {"te", {"rolling transfer entropy between two series", njee::cmd_te}},
            {"cit", {"conditional independence testing ROC", njee::cmd_cit}},
            {"bench", {"acceptance bench", njee::cmd_bench}},
        };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands) subs[name] = app.add_subcommand(name, entry.first);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? njee::exit_ok : njee::exit_usage;
    }

    try {
        const Options options = flags.resolve();
        const njee::RunContext ctx{join_args(argc, argv), std::cout, std::cerr};
        for (const auto& [name, sub] : subs) {
            if (sub->parsed()) return commands.at(name).second(options, ctx);
        }
        return njee::exit_usage;
    } catch (const njee::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return njee::exit_data;
    } catch (const njee::TrainingError& e) {
        std::cerr << "training error: " << e.what() << '\n';
        return njee::exit_data;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return njee::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return njee::exit_data;
    }
}
