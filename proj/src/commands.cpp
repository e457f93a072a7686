#include "njee/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "njee/discrete.hpp"
#include "njee/estimators.hpp"
#include "njee/io.hpp"
#include "njee/parallel.hpp"
#include "njee/random.hpp"
#include "njee/roc.hpp"
#include "njee/synth.hpp"
#include "njee/timeseries.hpp"

namespace njee {

TrainConfig Options::train_config() const {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.max_epochs = max_epochs;
    cfg.patience = patience;
    cfg.holdout_fraction = holdout;
    return cfg;
}

void to_json(nlohmann::json& j, const Options& o) {
    j = nlohmann::json{
        {"dist", o.dist},
        {"alpha", o.alpha},
        {"p", o.p},
        {"sigma", o.sigma},
        {"k", o.k},
        {"n", o.n},
        {"reps", o.reps},
        {"rho", o.rho},
        {"dim", o.dim},
        {"bins", o.bins},
        {"cubic", o.cubic},
        {"lags_source", o.lags_source},
        {"lags_target", o.lags_target},
        {"window", o.window},
        {"stride", o.stride},
        {"retrain_per_window", o.retrain_per_window},
        {"coupling", o.coupling},
        {"holdout", o.holdout},
        {"max_epochs", o.max_epochs},
        {"patience", o.patience},
        {"methods", o.methods},
        {"seed", o.seed},
        {"jobs", o.jobs},
        {"out", o.out},
        {"input", o.input},
        {"column", o.column},
        {"x_columns", o.x_columns},
        {"y_columns", o.y_columns},
        {"z_columns", o.z_columns},
        {"only", o.only},
    };
}

namespace {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& field) {
    try {
        field = j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
    }
}

// A scalar where a list is expected is read as a one-element list.
template <class T>
void read_list(const nlohmann::json& j, const char* key, std::vector<T>& field) {
    if (j.is_array()) {
        read_field(j, key, field);
    } else {
        T single{};
        read_field(j, key, single);
        field = {single};
    }
}

}  // namespace

void from_json(const nlohmann::json& j, Options& o) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const char* k = key.c_str();
        if (key == "dist") read_field(value, k, o.dist);
        else if (key == "alpha") read_field(value, k, o.alpha);
        else if (key == "p") read_field(value, k, o.p);
        else if (key == "sigma") read_field(value, k, o.sigma);
        else if (key == "k") read_field(value, k, o.k);
        else if (key == "n") read_list(value, k, o.n);
        else if (key == "reps") read_field(value, k, o.reps);
        else if (key == "rho") read_list(value, k, o.rho);
        else if (key == "dim") read_field(value, k, o.dim);
        else if (key == "bins") read_field(value, k, o.bins);
        else if (key == "cubic") read_field(value, k, o.cubic);
        else if (key == "lags_source") read_field(value, k, o.lags_source);
        else if (key == "lags_target") read_field(value, k, o.lags_target);
        else if (key == "window") read_field(value, k, o.window);
        else if (key == "stride") read_field(value, k, o.stride);
        else if (key == "retrain_per_window") read_field(value, k, o.retrain_per_window);
        else if (key == "coupling") read_field(value, k, o.coupling);
        else if (key == "holdout") read_field(value, k, o.holdout);
        else if (key == "max_epochs") read_field(value, k, o.max_epochs);
        else if (key == "patience") read_field(value, k, o.patience);
        else if (key == "methods") read_list(value, k, o.methods);
        else if (key == "seed") read_field(value, k, o.seed);
        else if (key == "jobs") read_field(value, k, o.jobs);
        else if (key == "out") read_field(value, k, o.out);
        else if (key == "input") read_list(value, k, o.input);
        else if (key == "column") read_field(value, k, o.column);
        else if (key == "x_columns") read_list(value, k, o.x_columns);
        else if (key == "y_columns") read_list(value, k, o.y_columns);
        else if (key == "z_columns") read_list(value, k, o.z_columns);
        else if (key == "only") read_list(value, k, o.only);
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

namespace {

RunManifest manifest_for(const Options& options, const RunContext& ctx, const std::string& start) {
    RunManifest m;
    m.command_line = ctx.command_line;
    m.config = options;
    m.seed = options.seed;
    m.start_time = start;
    return m;
}

// Writes to options.out (with manifest) or to stdout when no path was given.
void emit(const CsvWriter& csv, const std::string& path, const Options& options, const RunContext& ctx,
          const std::string& start) {
    if (path.empty()) {
        ctx.out << csv.str();
        return;
    }
    write_with_manifest(path, csv, manifest_for(options, ctx, start));
    ctx.err << "wrote " << path << '\n';
}

// "<stem>_<suffix>.csv" next to `path`, or empty when `path` is empty.
std::string sibling(const std::string& path, const std::string& suffix) {
    if (path.empty()) return {};
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string())).string();
}

std::size_t first_or(const std::vector<std::size_t>& v, std::size_t fallback) { return v.empty() ? fallback : v[0]; }

void check_methods(const std::vector<std::string>& methods) {
    static const std::set<std::string> known{"njee", "plugin", "miller_madow", "chao_shen"};
    if (methods.empty()) throw std::invalid_argument("--methods must name at least one method");
    for (const auto& m : methods) {
        if (!known.count(m)) throw std::invalid_argument("unknown method '" + m + "'");
    }
}

double estimate_entropy(const std::string& method, std::span<const int> symbols, std::size_t alphabet,
                        const TrainConfig& config, std::size_t jobs) {
    if (method == "njee") return njee::njee(decompose(symbols, alphabet, 2), config, jobs).value_nats;
    const auto dist = EmpiricalDistribution::from_symbols(symbols);
    if (method == "plugin") return plugin_entropy(dist);
    if (method == "miller_madow") return miller_madow_entropy(dist);
    return chao_shen_entropy(dist);
}

DistributionSpec distribution_of(const Options& o) {
    DistributionSpec spec;
    spec.kind = parse_distribution_kind(o.dist);
    spec.alphabet_size = o.k;
    spec.alpha = o.alpha;
    spec.p = o.p;
    spec.sigma = o.sigma;
    return spec;
}

DiscreteSample columns_of(const IntegerTable& table, const std::vector<std::size_t>& cols, const char* what) {
    if (cols.empty()) throw std::invalid_argument(std::string("--") + what + " must list at least one column");
    std::vector<std::vector<int>> data;
    for (std::size_t c : cols) {
        if (c >= table.columns.size()) {
            throw DataError(std::string(what) + ": column " + std::to_string(c) + " beyond the " +
                            std::to_string(table.columns.size()) + " columns of the input");
        }
        data.push_back(table.columns[c]);
    }
    const IntegerTable picked{{}, std::move(data)};
    return to_sample(picked);
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_entropy(const Options& o, const RunContext& ctx) {
    const std::string start = utc_timestamp();
    check_methods(o.methods);
    const TrainConfig config = o.train_config();
    CsvWriter rows({"method", "n", "rep", "estimate_nats", "truth_nats", "error_nats"});

    if (!o.input.empty()) {
        if (o.input.size() != 1) throw std::invalid_argument("entropy takes a single --input file");
        const auto table = read_integer_csv(o.input[0]);
        if (table.rows() == 0) throw DataError(o.input[0] + ": no data rows");
        const std::size_t col = o.column < 0 ? 0 : static_cast<std::size_t>(o.column);
        if (col >= table.columns.size()) throw DataError("--column " + std::to_string(col) + " not in the input");
        const auto& symbols = table.columns[col];
        const int max_symbol = *std::max_element(symbols.begin(), symbols.end());
        const std::size_t alphabet = std::max<std::size_t>(2, static_cast<std::size_t>(max_symbol) + 1);
        for (const auto& method : o.methods) {
            const double h = estimate_entropy(method, symbols, alphabet, config, o.jobs);
            rows.row(method, symbols.size(), 0, h, "", "");
            ctx.err << method << ": " << format_number(h) << " nats\n";
        }
        emit(rows, o.out, o, ctx, start);
        return exit_ok;
    }

    const DistributionSpec spec = distribution_of(o);
    const std::size_t alphabet = spec.probabilities().size();
    const std::vector<std::size_t> sizes = o.n.empty() ? std::vector<std::size_t>{1000} : o.n;
    if (o.reps == 0) throw std::invalid_argument("--reps must be at least 1");
    CsvWriter summary({"method", "n", "reps", "rmse_nats", "mean_error_nats"});
    for (std::size_t n : sizes) {
        std::vector<std::vector<double>> errors(o.methods.size());
        for (std::size_t rep = 0; rep < o.reps; ++rep) {
            const std::uint64_t seed = derive_seed(derive_seed(o.seed, n), rep);
            const auto draw = sample_univariate(spec, n, seed);
            TrainConfig rep_config = config;
            rep_config.seed = seed;
            for (std::size_t m = 0; m < o.methods.size(); ++m) {
                const double h = estimate_entropy(o.methods[m], draw.symbols, alphabet, rep_config, o.jobs);
                rows.row(o.methods[m], n, rep, h, draw.exact_entropy, h - draw.exact_entropy);
                errors[m].push_back(h - draw.exact_entropy);
            }
        }
        for (std::size_t m = 0; m < o.methods.size(); ++m) {
            double sq = 0.0, sum = 0.0;
            for (double e : errors[m]) {
                sq += e * e;
                sum += e;
            }
            const double count = static_cast<double>(errors[m].size());
            const double rmse = std::sqrt(sq / count);
            summary.row(o.methods[m], n, o.reps, rmse, sum / count);
            ctx.err << o.methods[m] << " n=" << n << " rmse=" << format_number(rmse) << '\n';
        }
    }
    emit(rows, o.out, o, ctx, start);
    emit(summary, sibling(o.out, "rmse"), o, ctx, start);
    return exit_ok;
}

// ---------------------------------------------------------------------------

int cmd_mi(const Options& o, const RunContext& ctx) {
    const std::string start = utc_timestamp();
    const TrainConfig config = o.train_config();

    if (!o.input.empty()) {
        if (o.input.size() != 1) throw std::invalid_argument("mi takes a single --input file");
        const auto table = read_integer_csv(o.input[0]);
        const auto x = columns_of(table, o.x_columns, "x-columns");
        const auto y = columns_of(table, o.y_columns, "y-columns");
        const auto est = mi(x, y, config, o.jobs);
        CsvWriter rows({"mi_nats", "h_x_nats", "h_x_given_y_nats"});
        rows.row(est.value_nats, est.h_x.value_nats, est.h_x_given_y.value_nats);
        ctx.err << "mi: " << format_number(est.value_nats) << " nats\n";
        emit(rows, o.out, o, ctx, start);
        return exit_ok;
    }

    std::vector<double> rhos = o.rho;
    if (rhos.empty()) {
        for (double level : {0.0, 2.0, 4.0, 6.0}) rhos.push_back(GaussianPairSpec::rho_for_mi(level, o.dim));
    }
    const std::size_t batch = config.batch_size;
    const std::size_t samples = first_or(o.n, 4000 * batch);
    std::vector<GaussianPairDraw> draws;
    for (std::size_t level = 0; level < rhos.size(); ++level) {
        GaussianPairSpec spec;
        spec.dim = o.dim;
        spec.rho = rhos[level];
        spec.bins_per_dim = o.bins;
        spec.cubic = o.cubic;
        spec.mixing_seed = derive_seed(o.seed, 0x313);
        draws.push_back(sample_gaussian_pair(spec, samples, derive_seed(o.seed, 100 + level)));
    }
    std::vector<StreamingSegment> segments;
    for (const auto& d : draws) segments.push_back({&d.x, &d.y});
    const auto traces = mi_streaming_staircase(segments, batch, 200, config, o.jobs);

    CsvWriter levels({"level", "rho", "true_mi_nats", "quantized_mi_nats", "estimate_nats"});
    CsvWriter trace({"level", "batch", "estimate_nats", "rolling_nats"});
    for (std::size_t level = 0; level < rhos.size(); ++level) {
        const double quantized = o.cubic ? std::nan("") : o.dim * quantized_gaussian_pair_mi(rhos[level], o.bins);
        levels.row(level, rhos[level], draws[level].true_mi, quantized, traces[level].estimate);
        for (std::size_t b = 0; b < traces[level].per_batch.size(); ++b) {
            trace.row(level, b, traces[level].per_batch[b], traces[level].rolling[b]);
        }
        ctx.err << "level " << level << ": true " << format_number(draws[level].true_mi) << ", estimate "
                << format_number(traces[level].estimate) << '\n';
    }
    emit(levels, o.out, o, ctx, start);
    if (!o.out.empty()) emit(trace, sibling(o.out, "trace"), o, ctx, start);
    return exit_ok;
}

// ---------------------------------------------------------------------------

int cmd_cmi(const Options& o, const RunContext& ctx) {
    const std::string start = utc_timestamp();
    const TrainConfig config = o.train_config();
    CsvWriter rows({"case", "n", "cmi_nats", "oracle_cmi_nats"});

    if (!o.input.empty()) {
        if (o.input.size() != 1) throw std::invalid_argument("cmi takes a single --input file");
        const auto table = read_integer_csv(o.input[0]);
        const auto est = cmi(columns_of(table, o.x_columns, "x-columns"), columns_of(table, o.y_columns, "y-columns"),
                             columns_of(table, o.z_columns, "z-columns"), config, o.jobs);
        rows.row(o.input[0], table.rows(), est.value_nats, "");
        ctx.err << "cmi: " << format_number(est.value_nats) << " nats\n";
        emit(rows, o.out, o, ctx, start);
        return exit_ok;
    }

    const std::size_t n = first_or(o.n, 10000);
    const std::pair<const char*, JointTable> fixtures[] = {{"markov_chain", markov_chain_fixture()},
                                                           {"collider", collider_fixture()}};
    const std::size_t ax[] = {0}, ay[] = {1}, az[] = {2};
    for (std::size_t i = 0; i < std::size(fixtures); ++i) {
        const auto& [name, table] = fixtures[i];
        const auto s = table.sample(n, derive_seed(o.seed, i));
        const auto est = cmi(s.slice_columns(0, 1), s.slice_columns(1, 1), s.slice_columns(2, 1), config, o.jobs);
        const double truth = oracle_cmi(table, ax, ay, az);
        rows.row(name, n, est.value_nats, truth);
        ctx.err << name << ": " << format_number(est.value_nats) << " (oracle " << format_number(truth) << ")\n";
    }
    emit(rows, o.out, o, ctx, start);
    return exit_ok;
}

// ---------------------------------------------------------------------------

int cmd_te(const Options& o, const RunContext& ctx) {
    const std::string start = utc_timestamp();
    RollingOptions ro;
    ro.window = o.window;
    ro.stride = o.stride;
    ro.k = o.lags_source;
    ro.l = o.lags_target;
    ro.retrain_per_window = o.retrain_per_window;
    ro.jobs = o.jobs;
    const TrainConfig config = o.train_config();

    std::vector<RollingPoint> points;
    if (!o.input.empty()) {
        if (o.input.size() != 2) throw std::invalid_argument("te takes two --input series files (source, target)");
        SeriesFrame x = read_series_csv(o.input[0]);
        SeriesFrame y = read_series_csv(o.input[1]);
        try {
            points = rolling_te(x, y, ro, config);
        } catch (const std::invalid_argument& e) {
            throw DataError(e.what());
        }
    } else {
        const std::size_t n = first_or(o.n, 2000);
        const std::size_t alphabet = o.k == 3 ? 3 : 2;
        const auto series = coupled_markov(n, o.coupling, o.seed, alphabet);
        std::vector<std::string> stamps;
        const auto day0 = std::chrono::sys_days{std::chrono::year{2000} / 1 / 1};
        for (std::size_t i = 0; i < n; ++i) {
            const std::chrono::year_month_day d{day0 + std::chrono::days{static_cast<long>(i)}};
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
            stamps.emplace_back(buf);
        }
        points = rolling_te_symbols(series.x, series.y, stamps, alphabet, ro, config);
        ctx.err << "synthetic coupling " << o.coupling << ", oracle te_xy " << format_number(series.true_te) << '\n';
    }

    CsvWriter rows({"timestamp", "te_xy_nats", "te_yx_nats", "te_xy_smoothed", "te_yx_smoothed"});
    double mean_xy = 0.0, mean_yx = 0.0;
    for (const auto& p : points) {
        rows.row(p.timestamp, p.te_xy, p.te_yx, p.te_xy_smoothed, p.te_yx_smoothed);
        mean_xy += p.te_xy;
        mean_yx += p.te_yx;
    }
    const double count = static_cast<double>(points.size());
    ctx.err << points.size() << " windows, mean te_xy " << format_number(mean_xy / count) << ", mean te_yx "
            << format_number(mean_yx / count) << '\n';
    emit(rows, o.out, o, ctx, start);
    return exit_ok;
}

// ---------------------------------------------------------------------------

std::vector<double> cit_scores(const std::vector<CitTriplet>& corpus, std::size_t n, std::uint64_t seed,
                               const TrainConfig& config, std::size_t jobs) {
    std::vector<double> scores(corpus.size());
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        const auto s = corpus[i].table.sample(n, derive_seed(seed, 1000 + i));
        TrainConfig c = config;
        c.seed = derive_seed(seed, 2000 + i);
        scores[i] = cmi(s.slice_columns(0, 1), s.slice_columns(1, 1), s.slice_columns(2, 1), c, 1).value_nats;
    });
    return scores;
}

int cmd_cit(const Options& o, const RunContext& ctx) {
    const std::string start = utc_timestamp();
    const TrainConfig config = o.train_config();
    const std::size_t n = first_or(o.n, 2000);
    const auto corpus = cit_corpus(50, 50, o.seed);
    const auto scores = cit_scores(corpus, n, o.seed, config, o.jobs);
    std::vector<int> labels(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) labels[i] = corpus[i].label;
    const auto curve = roc_curve(scores, labels);

    CsvWriter rows({"triplet", "structure", "label", "oracle_cmi_nats", "score_nats"});
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        rows.row(i, corpus[i].structure, corpus[i].label, corpus[i].true_cmi, scores[i]);
    }
    CsvWriter roc({"threshold", "false_positive_rate", "true_positive_rate"});
    for (const auto& p : curve.points) roc.row(p.threshold, p.false_positive_rate, p.true_positive_rate);
    ctx.err << "AUC " << format_number(curve.auc) << '\n';
    emit(rows, o.out, o, ctx, start);
    if (!o.out.empty()) emit(roc, sibling(o.out, "roc"), o, ctx, start);
    return exit_ok;
}

}  // namespace njee
