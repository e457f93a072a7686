#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include "njee/commands.hpp"
#include "njee/estimators.hpp"
#include "njee/io.hpp"
#include "njee/random.hpp"
#include "njee/roc.hpp"
#include "njee/synth.hpp"
#include "njee/timeseries.hpp"

namespace njee {

bool BenchReport::all_passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

namespace {

namespace fs = std::filesystem;

struct Bench {
    const Options& options;
    const RunContext& ctx;
    fs::path dir;
    std::string start;
    BenchReport report;
    CsvWriter criteria{{"criterion", "name", "status", "detail"}};

    TrainConfig config(std::uint64_t stream) const {
        TrainConfig cfg = options.train_config();
        cfg.seed = derive_seed(options.seed, stream);
        return cfg;
    }

    std::uint64_t seed(std::uint64_t stream) const { return derive_seed(options.seed, stream); }

    void save(const std::string& name, const CsvWriter& csv) const {
        RunManifest m;
        m.command_line = ctx.command_line;
        m.config = options;
        m.seed = options.seed;
        m.start_time = start;
        write_with_manifest(dir / name, csv, m);
    }

    void record(int id, const std::string& name, bool passed, const std::string& detail) {
        report.criteria.push_back(CriterionResult{id, name, passed, detail});
        criteria.row(id, name, passed ? "PASS" : "FAIL", detail);
    }
};

std::string fmt(double v) { return format_number(std::round(v * 1e4) / 1e4); }

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// -- MI staircase and cubic invariance -------------------------------------

std::vector<StreamingMiTrace> staircase(Bench& b, const std::vector<double>& levels, bool cubic,
                                        std::vector<GaussianPairDraw>& draws) {
    const std::size_t batch = b.options.train_config().batch_size;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        GaussianPairSpec spec;
        spec.dim = 20;
        spec.rho = GaussianPairSpec::rho_for_mi(levels[i], spec.dim);
        spec.bins_per_dim = 8;
        spec.cubic = cubic;
        spec.mixing_seed = b.seed(0x313);
        draws.push_back(sample_gaussian_pair(spec, 4000 * batch, b.seed(100 + i)));
    }
    std::vector<StreamingSegment> segments;
    for (const auto& d : draws) segments.push_back({&d.x, &d.y});
    return mi_streaming_staircase(segments, batch, 200, b.config(1), b.options.jobs);
}

void section_mi(Bench& b) {
    const std::vector<double> levels{0.0, 2.0, 4.0, 6.0};
    CsvWriter table({"variant", "level", "true_mi_nats", "quantized_mi_nats", "estimate_nats"});
    CsvWriter trace({"variant", "level", "batch", "estimate_nats", "rolling_nats"});

    Stopwatch sw;
    std::vector<GaussianPairDraw> plain_draws;
    const auto plain = staircase(b, levels, false, plain_draws);
    b.ctx.err << "  plain staircase " << fmt(sw.seconds()) << " s\n";
    Stopwatch sw_cubic;
    const std::vector<double> cubic_levels{0.0, 2.0, 4.0};
    std::vector<GaussianPairDraw> cubic_draws;
    const auto cubic = staircase(b, cubic_levels, true, cubic_draws);
    b.ctx.err << "  cubic staircase " << fmt(sw_cubic.seconds()) << " s\n";

    auto emit = [&](const char* variant, const std::vector<double>& lv, const std::vector<StreamingMiTrace>& tr,
                    bool quantized) {
        for (std::size_t i = 0; i < lv.size(); ++i) {
            const double rho = GaussianPairSpec::rho_for_mi(lv[i], 20);
            const double q = quantized ? 20.0 * quantized_gaussian_pair_mi(rho, 8) : std::nan("");
            table.row(variant, i, lv[i], q, tr[i].estimate);
            for (std::size_t k = 0; k < tr[i].per_batch.size(); ++k) {
                trace.row(variant, i, k, tr[i].per_batch[k], tr[i].rolling[k]);
            }
        }
    };
    emit("gaussian", levels, plain, true);
    emit("cubic", cubic_levels, cubic, false);
    b.save("mi_staircase.csv", table);
    b.save("mi_trace.csv", trace);

    bool ok = true;
    std::ostringstream detail;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const double tol = levels[i] >= 6.0 ? 0.7 : 0.5;
        const double err = plain[i].estimate - levels[i];
        ok = ok && std::abs(err) <= tol;
        detail << (i > 1 ? "; " : "") << "MI " << fmt(levels[i]) << ": " << fmt(plain[i].estimate) << " (tol "
               << fmt(tol) << ")";
    }
    b.record(1, "gaussian_mi_staircase", ok, detail.str());

    const double gap = std::abs(cubic[2].estimate - plain[2].estimate);
    b.record(2, "cubic_invariance", gap <= 0.3,
             "cubic " + fmt(cubic[2].estimate) + " vs plain " + fmt(plain[2].estimate) + ", gap " + fmt(gap) +
                 " (tol 0.3)");
}

// -- large-alphabet ordering and consistency --------------------------------

void section_entropy(Bench& b) {
    CsvWriter zipf({"rep", "truth_nats", "njee", "plugin", "miller_madow", "chao_shen"});
    DistributionSpec spec;
    spec.kind = DistributionKind::zipf;
    spec.alpha = 2.0;
    spec.alphabet_size = 10000;
    const std::size_t reps = 20;
    double se[4] = {0, 0, 0, 0};
    for (std::size_t rep = 0; rep < reps; ++rep) {
        const std::uint64_t s = b.seed(300 + rep);
        const auto draw = sample_univariate(spec, 1000, s);
        TrainConfig cfg = b.config(300 + rep);
        const auto dist = EmpiricalDistribution::from_symbols(draw.symbols);
        const double est[4] = {njee::njee(decompose(draw.symbols, spec.alphabet_size, 2), cfg, b.options.jobs).value_nats,
                               plugin_entropy(dist), miller_madow_entropy(dist), chao_shen_entropy(dist)};
        for (int m = 0; m < 4; ++m) se[m] += std::pow(est[m] - draw.exact_entropy, 2);
        zipf.row(rep, draw.exact_entropy, est[0], est[1], est[2], est[3]);
    }
    double rmse[4];
    for (int m = 0; m < 4; ++m) rmse[m] = std::sqrt(se[m] / static_cast<double>(reps));
    zipf.row("rmse", "", rmse[0], rmse[1], rmse[2], rmse[3]);
    b.save("entropy_zipf.csv", zipf);
    b.record(3, "large_alphabet_ordering", rmse[0] < rmse[1] && rmse[0] < rmse[2],
             "RMSE njee " + fmt(rmse[0]) + ", plugin " + fmt(rmse[1]) + ", miller_madow " + fmt(rmse[2]) +
                 ", chao_shen " + fmt(rmse[3]));

    CsvWriter trend({"n", "estimate_nats", "abs_error_nats"});
    DistributionSpec uniform;
    uniform.alphabet_size = 16;
    std::vector<double> errors;
    for (std::size_t n : {100u, 1000u, 10000u}) {
        const auto draw = sample_univariate(uniform, n, b.seed(400 + n));
        const double h = njee::njee(decompose(draw.symbols, 16, 2), b.config(400 + n), b.options.jobs).value_nats;
        errors.push_back(std::abs(h - std::log(16.0)));
        trend.row(n, h, errors.back());
    }
    b.save("consistency.csv", trend);
    b.record(4, "consistency_trend", errors[2] <= 0.1 && errors[2] <= errors[0] + 0.02,
             "|err| at 1e2 " + fmt(errors[0]) + ", 1e3 " + fmt(errors[1]) + ", 1e4 " + fmt(errors[2]));
}

// -- CE upper bound -----------------------------------------------------------

void section_ce_bound(Bench& b) {
    const JointTable table({4, 4}, {0.10, 0.02, 0.03, 0.05,  //
                                    0.01, 0.12, 0.04, 0.03,  //
                                    0.02, 0.05, 0.15, 0.03,  //
                                    0.06, 0.04, 0.05, 0.20});
    // Axes (high bit of X, low bit of X, Y).
    std::vector<double> split(16);
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = 0; y < 4; ++y) {
            const std::size_t idx[] = {x, y};
            split[(x >> 1) * 8 + (x & 1) * 4 + y] = table.at(idx);
        }
    const JointTable bits({2, 2, 4}, split);
    const std::size_t hi[] = {0}, lo[] = {1}, y[] = {2}, y_hi[] = {2, 0};

    const auto s = table.sample(100000, b.seed(500));
    const auto x = decompose(s.column(0), 4, 2);
    const auto cond = s.slice_columns(1, 1);
    const auto h = njee::njee(x, b.config(501), b.options.jobs);
    const auto hc = cnjee(x, cond, b.config(502), b.options.jobs);

    struct Term {
        const char* name;
        double ce;
        double truth;
    };
    const Term terms[] = {
        {"njee X_lo | X_hi", h.component_terms[1], oracle_conditional_entropy(bits, lo, hi)},
        {"cnjee X_hi | Y", hc.component_terms[0], oracle_conditional_entropy(bits, hi, y)},
        {"cnjee X_lo | Y, X_hi", hc.component_terms[1], oracle_conditional_entropy(bits, lo, y_hi)},
    };
    CsvWriter csv({"term", "trained_ce_nats", "true_conditional_entropy_nats", "margin_nats"});
    bool ok = true;
    double worst = 1e9;
    for (const auto& t : terms) {
        csv.row(t.name, t.ce, t.truth, t.ce - t.truth);
        ok = ok && t.ce >= t.truth - 0.05;
        worst = std::min(worst, t.ce - t.truth);
    }
    b.save("ce_bound.csv", csv);
    b.record(5, "ce_upper_bound", ok, "smallest CE - H margin " + fmt(worst) + " (floor -0.05)");
}

// -- independence nulls and TE oracles ----------------------------------------

std::vector<int> iid_symbols(std::size_t n, int alphabet, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<int> u(0, alphabet - 1);
    std::vector<int> v(n);
    for (int& s : v) s = u(rng);
    return v;
}

void section_nulls(Bench& b) {
    CsvWriter csv({"case", "lags", "estimate_nats", "gating"});
    const std::size_t n = 10000;

    const auto x = decompose(iid_symbols(n, 4, b.seed(600)), 4, 2);
    const auto y = decompose(iid_symbols(n, 4, b.seed(601)), 4, 2);
    const double mi_null = mi(x, y, b.config(602), b.options.jobs).value_nats;
    csv.row("mi_independent", "", mi_null, 1);

    const auto chain = markov_chain_fixture().sample(n, b.seed(603));
    const double cmi_null = cmi(chain.slice_columns(0, 1), chain.slice_columns(1, 1), chain.slice_columns(2, 1),
                                b.config(604), b.options.jobs)
                                .value_nats;
    csv.row("cmi_markov_chain", "", cmi_null, 1);

    const auto sx = iid_symbols(n, 3, b.seed(605));
    const auto sy = iid_symbols(n, 3, b.seed(606));
    const double te_null = transfer_entropy(embed(sx, sy, 1, 1), b.config(607), b.options.jobs).value_nats;
    csv.row("te_independent", 1, te_null, 1);
    const double te_null_5 = transfer_entropy(embed(sx, sy, 5, 5), b.config(607), b.options.jobs).value_nats;
    csv.row("te_independent", 5, te_null_5, 0);
    b.save("nulls.csv", csv);

    const bool ok = std::abs(mi_null) <= 0.1 && std::abs(cmi_null) <= 0.1 && std::abs(te_null) <= 0.05;
    b.record(6, "independence_nulls", ok,
             "MI " + fmt(mi_null) + " (0.1), CMI " + fmt(cmi_null) + " (0.1), TE " + fmt(te_null) + " (0.05)");
}

void section_te(Bench& b) {
    CsvWriter csv({"case", "lags", "estimate_nats", "oracle_nats", "gating"});
    const std::size_t n = 10000;
    const auto copy = coupled_markov(n, 1.0, b.seed(700), 3);
    const double te_copy = transfer_entropy(embed(copy.x, copy.y, 1, 1), b.config(701), b.options.jobs).value_nats;
    csv.row("copy_ternary", 1, te_copy, copy.true_te, 1);
    const double te_copy_5 = transfer_entropy(embed(copy.x, copy.y, 5, 5), b.config(701), b.options.jobs).value_nats;
    const double te_back_5 = transfer_entropy(embed(copy.y, copy.x, 5, 5), b.config(701), b.options.jobs).value_nats;
    csv.row("copy_ternary", 5, te_copy_5, copy.true_te, 0);
    csv.row("copy_ternary_reverse", 5, te_back_5, 0.0, 0);

    const auto half = coupled_markov(n, 0.5, b.seed(702));
    const double te_half = transfer_entropy(embed(half.x, half.y, 1, 1, 2), b.config(703), b.options.jobs).value_nats;
    csv.row("coupling_0.5", 1, te_half, half.true_te, 1);
    b.save("te.csv", csv);

    const bool ok = std::abs(te_copy - std::log(3.0)) <= 0.1 && std::abs(te_half - half.true_te) <= 0.1;
    b.record(7, "te_oracle_match", ok,
             "copy " + fmt(te_copy) + " vs ln3 " + fmt(std::log(3.0)) + ", coupling 0.5 " + fmt(te_half) + " vs " +
                 fmt(half.true_te) + " (tol 0.1)");
}

// -- conditional independence testing -----------------------------------------

void section_cit(Bench& b) {
    const auto corpus = cit_corpus(50, 50, b.seed(800));
    const auto scores = cit_scores(corpus, 2000, b.seed(801), b.options.train_config(), b.options.jobs);
    std::vector<int> labels(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) labels[i] = corpus[i].label;
    const auto curve = roc_curve(scores, labels);

    std::vector<int> shuffled = labels;
    Rng rng(b.seed(802));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double null_auc = roc_curve(scores, shuffled).auc;

    CsvWriter rows({"triplet", "structure", "label", "oracle_cmi_nats", "score_nats", "shuffled_label"});
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        rows.row(i, corpus[i].structure, corpus[i].label, corpus[i].true_cmi, scores[i], shuffled[i]);
    }
    CsvWriter roc({"threshold", "false_positive_rate", "true_positive_rate"});
    for (const auto& p : curve.points) roc.row(p.threshold, p.false_positive_rate, p.true_positive_rate);
    b.save("cit_scores.csv", rows);
    b.save("cit_roc.csv", roc);
    b.record(8, "cit_auc", curve.auc >= 0.9 && null_auc >= 0.4 && null_auc <= 0.6,
             "AUC " + fmt(curve.auc) + " (>= 0.9), shuffled-label AUC " + fmt(null_auc) + " ([0.4, 0.6])");
}

// -- gradient fidelity ----------------------------------------------------------

void section_grad(Bench& b) {
    Rng rng(b.seed(900));
    std::uniform_int_distribution<std::size_t> width(1, 9);
    std::normal_distribution<double> normal(0.0, 1.0);
    CsvWriter csv({"trial", "layers", "parameters", "max_relative_error"});
    double worst = 0.0;
    for (std::size_t trial = 0; trial < 20; ++trial) {
        const std::size_t in = width(rng);
        const std::size_t classes = 2 + width(rng) % 4;
        std::vector<std::size_t> dims{in};
        for (std::size_t h = 0; h < trial % 3; ++h) dims.push_back(width(rng) + 2);
        dims.push_back(classes);
        ClassifierModel model(dims);
        for (double& p : model.params()) p = 0.5 * normal(rng);
        EncodedBatch batch;
        batch.inputs = Matrix(8, in);
        for (double& v : batch.inputs.data) v = normal(rng);
        for (std::size_t i = 0; i < 8; ++i) batch.targets.push_back(static_cast<int>(rng() % classes));
        const auto report = grad_check(model, batch, 1e-4);
        worst = std::max(worst, report.max_relative_error);
        std::ostringstream layers;
        for (std::size_t i = 0; i < dims.size(); ++i) layers << (i ? "-" : "") << dims[i];
        csv.row(trial, layers.str(), model.parameter_count(), report.max_relative_error);
    }
    b.save("grad_check.csv", csv);
    std::ostringstream detail;
    detail << "max relative error " << std::scientific << std::setprecision(2) << worst << " over 20 draws (1e-4)";
    b.record(9, "gradient_fidelity", worst <= 1e-4, detail.str());
}

}  // namespace

BenchReport run_bench(const Options& options, const RunContext& ctx) {
    Bench b{options, ctx, options.out.empty() ? fs::path("bench_results") : fs::path(options.out), utc_timestamp(), {}};
    fs::create_directories(b.dir);

    const std::vector<std::pair<std::string, std::function<void(Bench&)>>> sections{
        {"mi", section_mi},       {"entropy", section_entropy}, {"ce_bound", section_ce_bound},
        {"nulls", section_nulls}, {"te", section_te},           {"cit", section_cit},
        {"grad", section_grad},
    };
    for (const auto& name : options.only) {
        const bool known = std::any_of(sections.begin(), sections.end(), [&](const auto& s) { return s.first == name; });
        if (!known) throw std::invalid_argument("--only: unknown section '" + name + "'");
    }
    for (const auto& [name, run] : sections) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), name) == options.only.end()) {
            continue;
        }
        Stopwatch sw;
        ctx.err << "[bench] " << name << '\n';
        run(b);
        ctx.err << "[bench] " << name << " done in " << fmt(sw.seconds()) << " s\n";
    }
    b.save("criteria.csv", b.criteria);
    return b.report;
}

int cmd_bench(const Options& options, const RunContext& ctx) {
    const BenchReport report = run_bench(options, ctx);
    for (const auto& c : report.criteria) {
        ctx.out << (c.passed ? "PASS" : "FAIL") << "  " << c.id << "  " << c.name << "  " << c.detail << '\n';
    }
    return report.all_passed() ? exit_ok : exit_acceptance;
}

}  // namespace njee
