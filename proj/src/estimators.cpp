#include "njee/estimators.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "njee/parallel.hpp"
#include "njee/random.hpp"

namespace njee {

ChainTermSource::ChainTermSource(const DiscreteSample& target, const DiscreteSample* conditioning, std::size_t term)
    : target_(target), conditioning_(conditioning), term_(term) {
    if (term_ >= target_.dims()) throw std::out_of_range("chain term index beyond target dimension");
    if (target_.alphabet_size(term_) < 2) {
        throw std::invalid_argument("chain term target alphabet must have at least 2 symbols");
    }
    if (conditioning_ != nullptr) {
        if (conditioning_->rows() != target_.rows()) {
            throw std::invalid_argument("conditioning and target row counts differ");
        }
        for (std::size_t a : conditioning_->alphabet_sizes()) input_dim_ += a;
    }
    for (std::size_t m = 0; m < term_; ++m) input_dim_ += target_.alphabet_size(m);
    if (input_dim_ == 0) input_dim_ = 1;
}

EncodedBatch ChainTermSource::encode(std::span<const std::size_t> rows) const {
    EncodedBatch batch;
    batch.inputs = Matrix(rows.size(), input_dim_);
    batch.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        auto out = batch.inputs.row(i);
        std::size_t offset = 0;
        if (conditioning_ != nullptr) {
            const auto cond = conditioning_->row(r);
            for (std::size_t c = 0; c < cond.size(); ++c) {
                out[offset + static_cast<std::size_t>(cond[c])] = 1.0;
                offset += conditioning_->alphabet_size(c);
            }
        }
        const auto x = target_.row(r);
        for (std::size_t m = 0; m < term_; ++m) {
            out[offset + static_cast<std::size_t>(x[m])] = 1.0;
            offset += target_.alphabet_size(m);
        }
        batch.targets[i] = x[term_];
    }
    return batch;
}

TrainResult train_chain_term(const DiscreteSample& target, const DiscreteSample* conditioning, std::size_t term,
                             const TrainConfig& config) {
    TrainConfig term_config = config;
    term_config.seed = derive_seed(config.seed, term);
    const ChainTermSource source(target, conditioning, term);
    try {
        return train_classifier(source, term_config);
    } catch (const TrainingError& e) {
        std::ostringstream msg;
        msg << "chain term m=" << term + 1 << " failed: " << e.what();
        throw TrainingError(msg.str());
    }
}

namespace {

TermDiagnostics diagnostics_of(const TrainResult& r) {
    return TermDiagnostics{r.history.size(), r.best_epoch, r.holdout_ce};
}

EntropyEstimate chain_estimate(const DiscreteSample& target, const DiscreteSample* conditioning,
                               const TrainConfig& config, std::size_t jobs) {
    const std::size_t d = target.dims();
    const std::size_t first_trained = conditioning == nullptr ? 1 : 0;
    const std::size_t trained = d - first_trained;

    std::vector<std::optional<TrainResult>> slots(trained);
    parallel_for(trained, jobs, [&](std::size_t k) {
        slots[k] = train_chain_term(target, conditioning, first_trained + k, config);
    });

    EntropyEstimate est;
    est.method = conditioning == nullptr ? "njee" : "cnjee";
    est.classifiers_trained = trained;
    if (conditioning == nullptr) {
        est.component_terms.push_back(marginal_h1(target.column(0)));
        est.diagnostics.push_back(TermDiagnostics{});
    }
    for (auto& slot : slots) {
        est.component_terms.push_back(slot->min_ce);
        est.diagnostics.push_back(diagnostics_of(*slot));
    }
    est.value_nats = std::accumulate(est.component_terms.begin(), est.component_terms.end(), 0.0);
    return est;
}

}  // namespace

EntropyEstimate njee(const DiscreteSample& sample, const TrainConfig& config, std::size_t jobs) {
    if (sample.rows() < 2) throw std::invalid_argument("njee needs at least 2 observations");
    return chain_estimate(sample, nullptr, config, jobs);
}

EntropyEstimate cnjee(const DiscreteSample& target, const DiscreteSample& conditioning, const TrainConfig& config,
                      std::size_t jobs) {
    if (target.rows() < 2) throw std::invalid_argument("cnjee needs at least 2 observations");
    if (target.rows() != conditioning.rows()) throw std::invalid_argument("cnjee: row counts differ");
    return chain_estimate(target, &conditioning, config, jobs);
}

MiEstimate mi(const DiscreteSample& x, const DiscreteSample& y, const TrainConfig& config, std::size_t jobs) {
    if (x.rows() != y.rows()) throw std::invalid_argument("mi: row counts differ");
    MiEstimate out;
    out.h_x = njee(x, config, jobs);
    out.h_x_given_y = cnjee(x, y, config, jobs);
    out.value_nats = out.h_x.value_nats - out.h_x_given_y.value_nats;
    return out;
}

CmiEstimate cmi(const DiscreteSample& x, const DiscreteSample& y, const DiscreteSample& z, const TrainConfig& config,
                std::size_t jobs) {
    if (x.rows() != y.rows() || x.rows() != z.rows()) throw std::invalid_argument("cmi: row counts differ");
    const DiscreteSample yz = DiscreteSample::hconcat(y, z);
    CmiEstimate out;
    out.h_x_given_z = cnjee(x, z, config, jobs);
    out.h_x_given_yz = cnjee(x, yz, config, jobs);
    out.value_nats = out.h_x_given_z.value_nats - out.h_x_given_yz.value_nats;
    return out;
}

std::vector<StreamingMiTrace> mi_streaming_staircase(std::span<const StreamingSegment> segments,
                                                     std::size_t batch_size, std::size_t rolling_window,
                                                     const TrainConfig& config, std::size_t jobs) {
    if (segments.empty()) throw std::invalid_argument("mi_streaming: no segments");
    if (batch_size == 0 || rolling_window == 0) throw std::invalid_argument("batch size and window must be positive");
    const DiscreteSample& shape = *segments.front().x;
    const std::size_t d = shape.dims();
    std::vector<std::size_t> batches(segments.size());
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        if (seg.x == nullptr || seg.y == nullptr) throw std::invalid_argument("mi_streaming: null segment");
        if (seg.x->rows() != seg.y->rows()) throw std::invalid_argument("mi_streaming: row counts differ");
        if (seg.x->alphabet_sizes() != shape.alphabet_sizes() ||
            seg.y->alphabet_sizes() != segments.front().y->alphabet_sizes()) {
            throw std::invalid_argument("mi_streaming: segments differ in shape");
        }
        batches[s] = seg.x->rows() / batch_size;
        if (batches[s] == 0) throw std::invalid_argument("mi_streaming: fewer rows than one batch");
    }

    // Terms 0..d-2 are njee terms m = 1..d-1; terms d-1..2d-2 are cnjee terms m = 0..d-1.
    const std::size_t njee_terms = d - 1;
    const std::size_t total_terms = njee_terms + d;
    std::vector<std::vector<std::vector<double>>> ce(total_terms);

    parallel_for(total_terms, jobs, [&](std::size_t k) {
        const bool conditioned = k >= njee_terms;
        const std::size_t term = conditioned ? k - njee_terms : k + 1;
        TrainConfig term_config = config;
        term_config.seed = derive_seed(config.seed, term);
        std::optional<StreamingTrainer> trainer;
        std::vector<std::size_t> rows(batch_size);
        ce[k].resize(segments.size());
        for (std::size_t s = 0; s < segments.size(); ++s) {
            const ChainTermSource source(*segments[s].x, conditioned ? segments[s].y : nullptr, term);
            if (!trainer) trainer.emplace(source.input_dim(), source.num_classes(), term_config);
            ce[k][s].resize(batches[s]);
            for (std::size_t b = 0; b < batches[s]; ++b) {
                std::iota(rows.begin(), rows.end(), b * batch_size);
                ce[k][s][b] = trainer->step(source.encode(rows));
            }
        }
    });

    std::vector<StreamingMiTrace> traces(segments.size());
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const DiscreteSample& x = *segments[s].x;
        StreamingMiTrace& trace = traces[s];
        trace.per_batch.resize(batches[s]);
        trace.rolling.resize(batches[s]);
        std::vector<std::size_t> first_counts(x.alphabet_size(0), 0);
        double window_sum = 0.0;
        for (std::size_t b = 0; b < batches[s]; ++b) {
            for (std::size_t i = b * batch_size; i < (b + 1) * batch_size; ++i) {
                ++first_counts[static_cast<std::size_t>(x.at(i, 0))];
            }
            double value = miller_madow_entropy(EmpiricalDistribution::from_counts(first_counts));
            for (std::size_t k = 0; k < njee_terms; ++k) value += ce[k][s][b];
            for (std::size_t k = njee_terms; k < total_terms; ++k) value -= ce[k][s][b];
            trace.per_batch[b] = value;
            window_sum += value;
            if (b >= rolling_window) window_sum -= trace.per_batch[b - rolling_window];
            trace.rolling[b] = window_sum / static_cast<double>(std::min(b + 1, rolling_window));
        }
        trace.estimate = trace.rolling.back();
    }
    return traces;
}

StreamingMiTrace mi_streaming(const DiscreteSample& x, const DiscreteSample& y, std::size_t batch_size,
                              std::size_t rolling_window, const TrainConfig& config, std::size_t jobs) {
    const StreamingSegment segment{&x, &y};
    return mi_streaming_staircase(std::span<const StreamingSegment>(&segment, 1), batch_size, rolling_window, config,
                                  jobs)
        .front();
}

}  // namespace njee
