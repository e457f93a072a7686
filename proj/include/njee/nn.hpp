#pragma once

// Feedforward softmax classifier engine: dense ReLU layers, softmax output,
// clipped cross-entropy, analytic backpropagation, ADAM and a finite-difference
// gradient checker. Everything is double precision.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace njee {

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

struct TrainConfig {
    std::vector<std::size_t> hidden_sizes{50, 50};
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon_adam = 1e-8;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 200;
    std::size_t patience = 20;
    // An epoch counts as an improvement for early stopping only when it lowers
    // the best full-sample CE by more than this many nats.
    double min_delta = 1e-4;
    double prob_floor = 1e-7;
    // Fraction of rows held out for a diagnostic CE; 0 disables the split.
    double holdout_fraction = 0.0;
    std::uint64_t seed = 0;

    // Throws std::invalid_argument on a violated invariant. `num_classes` is
    // the target alphabet size the config will be used with (0 skips the
    // floor-vs-uniform check).
    void validate(std::size_t num_classes = 0) const;
};

// Softmax classifier G(y | x). layer_dims = {input, hidden..., output}.
// Parameters live in one flat vector, layer by layer: W_0, b_0, W_1, b_1, ...
// W_l is stored input-major (dims[l] rows of dims[l+1] entries).
class ClassifierModel {
public:
    explicit ClassifierModel(std::vector<std::size_t> layer_dims);

    // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static ClassifierModel glorot(std::vector<std::size_t> layer_dims, std::uint64_t seed);

    const std::vector<std::size_t>& layer_dims() const { return dims_; }
    std::size_t num_layers() const { return dims_.size() - 1; }
    std::size_t input_dim() const { return dims_.front(); }
    std::size_t output_dim() const { return dims_.back(); }
    std::size_t parameter_count() const { return params_.size(); }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    std::span<double> weights(std::size_t layer);
    std::span<const double> weights(std::size_t layer) const;
    std::span<double> bias(std::size_t layer);
    std::span<const double> bias(std::size_t layer) const;

    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const { return offsets_[layer] + dims_[layer] * dims_[layer + 1]; }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

struct EncodedBatch {
    Matrix inputs;
    std::vector<int> targets;

    std::size_t size() const { return targets.size(); }
};

// Row-wise class probabilities. Throws ShapeError when inputs.cols differs
// from the model input dimension.
Matrix forward(const ClassifierModel& model, const Matrix& inputs);

// -(1/n) sum_i ln max(p_i[y_i], prob_floor). Throws on an empty batch or an
// out-of-range label.
double ce_loss(const Matrix& probs, std::span<const int> targets, double prob_floor);

struct GradientSet {
    std::vector<double> values;  // same layout as ClassifierModel::params()
    double loss = 0.0;
};

// Analytic gradient of ce_loss (batch mean). Rows whose true-class probability
// falls below the floor contribute nothing.
GradientSet backward(const ClassifierModel& model, const EncodedBatch& batch, double prob_floor);

struct AdamState {
    std::uint64_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;

    AdamState() = default;
    explicit AdamState(std::size_t parameter_count)
        : first_moment(parameter_count, 0.0), second_moment(parameter_count, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& config);

// Supplies encoded rows to the trainer.
class BatchSource {
public:
    virtual ~BatchSource() = default;
    virtual std::size_t size() const = 0;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t num_classes() const = 0;
    virtual EncodedBatch encode(std::span<const std::size_t> rows) const = 0;
};

// Discrete conditioning columns, each one-hot encoded and concatenated in the
// order given. Target labels must lie in [0, num_classes).
class OneHotSource final : public BatchSource {
public:
    OneHotSource(std::vector<std::vector<int>> feature_columns, std::vector<std::size_t> alphabet_sizes,
                 std::vector<int> targets, std::size_t num_classes);

    std::size_t size() const override { return targets_.size(); }
    std::size_t input_dim() const override { return input_dim_; }
    std::size_t num_classes() const override { return num_classes_; }
    EncodedBatch encode(std::span<const std::size_t> rows) const override;

private:
    std::vector<std::vector<int>> columns_;
    std::vector<std::size_t> alphabets_;
    std::vector<std::size_t> block_offsets_;
    std::vector<int> targets_;
    std::size_t num_classes_;
    std::size_t input_dim_;
};

// Real-valued inputs held in memory.
class DenseSource final : public BatchSource {
public:
    DenseSource(Matrix inputs, std::vector<int> targets, std::size_t num_classes);

    std::size_t size() const override { return targets_.size(); }
    std::size_t input_dim() const override { return inputs_.cols; }
    std::size_t num_classes() const override { return num_classes_; }
    EncodedBatch encode(std::span<const std::size_t> rows) const override;

private:
    Matrix inputs_;
    std::vector<int> targets_;
    std::size_t num_classes_;
};

struct TrainResult {
    ClassifierModel model;               // parameters at the best epoch
    double min_ce = 0.0;                 // minimum full-sample CE over epochs
    std::vector<double> history;         // full-sample CE after each epoch
    std::size_t best_epoch = 0;          // 1-based epoch index of min_ce
    std::optional<double> holdout_ce;    // CE of the best model on the held-out rows
};

// Full-sample CE of `model` over every row of `source`.
double evaluate_ce(const ClassifierModel& model, const BatchSource& source, double prob_floor);
double evaluate_ce(const ClassifierModel& model, const BatchSource& source,
                   std::span<const std::size_t> rows, double prob_floor);

// Minibatch ADAM training with per-epoch reshuffling and early stopping on the
// full-sample CE. Throws TrainingError on a non-finite loss.
TrainResult train_classifier(const BatchSource& source, const TrainConfig& config);

// One model trained on a stream of fresh batches, one ADAM step per batch.
class StreamingTrainer {
public:
    StreamingTrainer(std::size_t input_dim, std::size_t num_classes, const TrainConfig& config);

    // CE of the current model on `batch` (before the update), then one step.
    double step(const EncodedBatch& batch);

    const ClassifierModel& model() const { return model_; }

private:
    TrainConfig config_;
    ClassifierModel model_;
    AdamState adam_;
};

struct GradCheckReport {
    std::vector<double> relative_errors;  // one per parameter
    std::vector<std::size_t> flagged;     // indices above tolerance
    double max_relative_error = 0.0;

    bool passed() const { return flagged.empty(); }
};

// Central differences with step 1e-5 against backward(). Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradCheckReport grad_check(const ClassifierModel& model, const EncodedBatch& batch, double tolerance,
                           double prob_floor = 1e-7);

}  // namespace njee
