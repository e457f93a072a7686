#pragma once

// Chain-rule entropy estimators built from trained classifier cross-entropies:
// NJEE for H(X), C-NJEE for H(X|Y), and the MI / CMI differences derived from
// them.
//
// Chain term m (0-based here) models X_m given the conditioning variables and
// the prefix X_0..X_{m-1}. Its classifier input is the one-hot encoding of the
// conditioning components followed by the prefix components. Term m is always
// seeded with derive_seed(config.seed, m), so the same term in two different
// estimates shares initialization and shuffling.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "njee/discrete.hpp"
#include "njee/nn.hpp"

namespace njee {

// Classifier inputs for chain term `term` of `target`, optionally conditioned
// on `conditioning`. Holds references; both samples must outlive the source.
class ChainTermSource final : public BatchSource {
public:
    ChainTermSource(const DiscreteSample& target, const DiscreteSample* conditioning, std::size_t term);

    std::size_t size() const override { return target_.rows(); }
    std::size_t input_dim() const override { return input_dim_; }
    std::size_t num_classes() const override { return target_.alphabet_size(term_); }
    EncodedBatch encode(std::span<const std::size_t> rows) const override;

private:
    const DiscreteSample& target_;
    const DiscreteSample* conditioning_;
    std::size_t term_;
    std::size_t input_dim_ = 0;
};

// Trains the classifier for one chain term; throws TrainingError naming the term.
TrainResult train_chain_term(const DiscreteSample& target, const DiscreteSample* conditioning, std::size_t term,
                             const TrainConfig& config);

// marginal_h1(X_0) + sum over m >= 1 of the trained min-CE of X_m | X_<m.
EntropyEstimate njee(const DiscreteSample& sample, const TrainConfig& config, std::size_t jobs = 1);

// Sum over every m of the trained min-CE of X_m | Y, X_<m.
EntropyEstimate cnjee(const DiscreteSample& target, const DiscreteSample& conditioning, const TrainConfig& config,
                      std::size_t jobs = 1);

struct MiEstimate {
    double value_nats = 0.0;
    EntropyEstimate h_x;
    EntropyEstimate h_x_given_y;

    double clamped() const { return value_nats > 0.0 ? value_nats : 0.0; }
};

struct CmiEstimate {
    double value_nats = 0.0;
    EntropyEstimate h_x_given_z;
    EntropyEstimate h_x_given_yz;

    double clamped() const { return value_nats > 0.0 ? value_nats : 0.0; }
};

// njee(x) - cnjee(x | y), unclamped.
MiEstimate mi(const DiscreteSample& x, const DiscreteSample& y, const TrainConfig& config, std::size_t jobs = 1);

// cnjee(x | z) - cnjee(x | y, z), unclamped. y and z columns are concatenated
// with y first.
CmiEstimate cmi(const DiscreteSample& x, const DiscreteSample& y, const DiscreteSample& z, const TrainConfig& config,
                std::size_t jobs = 1);

// Online MI estimation over a stream of fresh batches. Every chain-term
// classifier takes one ADAM step per batch; the per-batch estimate uses the CE
// of each classifier on that batch before its update, with the first
// component's Miller-Madow marginal accumulated over all batches seen so far.
struct StreamingMiTrace {
    std::vector<double> per_batch;  // per-batch MI estimate
    std::vector<double> rolling;    // trailing mean over `rolling_window` batches
    double estimate = 0.0;          // mean of the final `rolling_window` batches
};

StreamingMiTrace mi_streaming(const DiscreteSample& x, const DiscreteSample& y, std::size_t batch_size,
                              std::size_t rolling_window, const TrainConfig& config, std::size_t jobs = 1);

struct StreamingSegment {
    const DiscreteSample* x = nullptr;
    const DiscreteSample* y = nullptr;
};

// Consecutive streaming segments with the classifiers carried over from one
// segment to the next. The marginal counts and the rolling mean restart at
// every segment; one trace per segment.
std::vector<StreamingMiTrace> mi_streaming_staircase(std::span<const StreamingSegment> segments,
                                                     std::size_t batch_size, std::size_t rolling_window,
                                                     const TrainConfig& config, std::size_t jobs = 1);

}  // namespace njee
