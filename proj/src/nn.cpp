#include "njee/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "njee/random.hpp"
#include "njee/simd.hpp"

namespace njee {

void TrainConfig::validate(std::size_t num_classes) const {
    for (std::size_t h : hidden_sizes) {
        if (h == 0) throw std::invalid_argument("hidden layer sizes must be positive");
    }
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in (0,1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in (0,1)");
    if (!(epsilon_adam > 0.0)) throw std::invalid_argument("epsilon_adam must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
    if (patience > max_epochs) throw std::invalid_argument("patience must not exceed max_epochs");
    if (!(min_delta >= 0.0)) throw std::invalid_argument("min_delta must be nonnegative");
    if (!(prob_floor > 0.0)) throw std::invalid_argument("prob_floor must be positive");
    if (num_classes >= 2 && !(prob_floor < 1.0 / static_cast<double>(num_classes))) {
        throw std::invalid_argument("prob_floor must be below 1/num_classes");
    }
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
        throw std::invalid_argument("holdout_fraction must lie in [0,1)");
    }
}

// ---------------------------------------------------------------------------
// ClassifierModel

ClassifierModel::ClassifierModel(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
    if (dims_.size() < 2) throw ShapeError("a classifier needs at least input and output dimensions");
    for (std::size_t d : dims_) {
        if (d == 0) throw ShapeError("layer dimensions must be positive");
    }
    if (dims_.back() < 2) throw ShapeError("output dimension must be at least 2");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        offsets_.push_back(total);
        total += dims_[l] * dims_[l + 1] + dims_[l + 1];
    }
    params_.assign(total, 0.0);
}

ClassifierModel ClassifierModel::glorot(std::vector<std::size_t> layer_dims, std::uint64_t seed) {
    ClassifierModel model(std::move(layer_dims));
    Rng rng(derive_seed(seed, 0x1A17));
    for (std::size_t l = 0; l < model.num_layers(); ++l) {
        const double fan_in = static_cast<double>(model.dims_[l]);
        const double fan_out = static_cast<double>(model.dims_[l + 1]);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& w : model.weights(l)) w = dist(rng);
    }
    return model;
}

std::span<double> ClassifierModel::weights(std::size_t layer) {
    return {params_.data() + weight_offset(layer), dims_[layer] * dims_[layer + 1]};
}
std::span<const double> ClassifierModel::weights(std::size_t layer) const {
    return {params_.data() + weight_offset(layer), dims_[layer] * dims_[layer + 1]};
}
std::span<double> ClassifierModel::bias(std::size_t layer) {
    return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}
std::span<const double> ClassifierModel::bias(std::size_t layer) const {
    return {params_.data() + bias_offset(layer), dims_[layer + 1]};
}

// ---------------------------------------------------------------------------
// Forward / loss / backward

namespace {

// Activations of every layer for one batch: acts[0] = inputs (not owned),
// acts[l] for 0 < l < L are post-ReLU hidden outputs, probs = softmax output.
struct Activations {
    std::vector<Matrix> hidden;
    Matrix probs;
};

void softmax_inplace(std::span<double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    const double inv = 1.0 / sum;
    for (double& v : z) v *= inv;
}

// out = b + x^T W, skipping zero inputs (one-hot inputs and ReLU outputs are sparse).
void affine_row(std::span<const double> x, std::span<const double> weights, std::span<const double> bias,
                std::span<double> out) {
    const auto& k = simd::active();
    const std::size_t width = out.size();
    std::copy(bias.begin(), bias.end(), out.begin());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        k.axpy(xj, weights.data() + j * width, out.data(), width);
    }
}

Activations run_forward(const ClassifierModel& model, const Matrix& inputs) {
    if (inputs.cols != model.input_dim()) {
        std::ostringstream msg;
        msg << "input has " << inputs.cols << " columns, model expects " << model.input_dim();
        throw ShapeError(msg.str());
    }
    const auto& dims = model.layer_dims();
    const std::size_t layers = model.num_layers();
    Activations acts;
    acts.hidden.reserve(layers - 1);
    const Matrix* prev = &inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix out(inputs.rows, dims[l + 1]);
        const auto w = model.weights(l);
        const auto b = model.bias(l);
        for (std::size_t i = 0; i < inputs.rows; ++i) {
            affine_row(prev->row(i), w, b, out.row(i));
            if (l + 1 < layers) {
                simd::relu(out.row(i));
            } else {
                softmax_inplace(out.row(i));
            }
        }
        if (l + 1 < layers) {
            acts.hidden.push_back(std::move(out));
            prev = &acts.hidden.back();
        } else {
            acts.probs = std::move(out);
        }
    }
    return acts;
}

void check_targets(std::span<const int> targets, std::size_t num_classes) {
    for (int y : targets) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            std::ostringstream msg;
            msg << "target label " << y << " outside [0, " << num_classes << ")";
            throw ShapeError(msg.str());
        }
    }
}

}  // namespace

Matrix forward(const ClassifierModel& model, const Matrix& inputs) {
    return run_forward(model, inputs).probs;
}

double ce_loss(const Matrix& probs, std::span<const int> targets, double prob_floor) {
    if (targets.empty() || probs.rows == 0) throw ShapeError("cross-entropy of an empty batch");
    if (probs.rows != targets.size()) throw ShapeError("probability rows and targets differ in count");
    if (!(prob_floor > 0.0)) throw std::invalid_argument("prob_floor must be positive");
    check_targets(targets, probs.cols);
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        total -= std::log(std::max(probs(i, static_cast<std::size_t>(targets[i])), prob_floor));
    }
    return total / static_cast<double>(targets.size());
}

GradientSet backward(const ClassifierModel& model, const EncodedBatch& batch, double prob_floor) {
    if (batch.size() == 0) throw ShapeError("backward on an empty batch");
    if (batch.inputs.rows != batch.size()) throw ShapeError("input rows and targets differ in count");
    check_targets(batch.targets, model.output_dim());

    const Activations acts = run_forward(model, batch.inputs);
    const auto& dims = model.layer_dims();
    const std::size_t layers = model.num_layers();
    const std::size_t n = batch.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto& k = simd::active();

    GradientSet grads;
    grads.values.assign(model.parameter_count(), 0.0);
    grads.loss = ce_loss(acts.probs, batch.targets, prob_floor);

    std::size_t widest = 0;
    for (std::size_t d : dims) widest = std::max(widest, d);
    std::vector<double> delta(widest);
    std::vector<double> delta_prev(widest);

    for (std::size_t i = 0; i < n; ++i) {
        const auto p = acts.probs.row(i);
        const auto y = static_cast<std::size_t>(batch.targets[i]);
        if (p[y] < prob_floor) continue;  // clipped: loss is locally constant

        std::size_t width = dims[layers];
        for (std::size_t c = 0; c < width; ++c) delta[c] = p[c] * inv_n;
        delta[y] -= inv_n;

        for (std::size_t l = layers; l-- > 0;) {
            const std::span<const double> a_in = l == 0 ? batch.inputs.row(i) : acts.hidden[l - 1].row(i);
            const std::size_t fan_in = dims[l];
            double* gw = grads.values.data() + model.weight_offset(l);
            double* gb = grads.values.data() + model.bias_offset(l);
            for (std::size_t j = 0; j < fan_in; ++j) {
                const double aj = a_in[j];
                if (aj == 0.0) continue;
                k.axpy(aj, delta.data(), gw + j * width, width);
            }
            k.axpy(1.0, delta.data(), gb, width);
            if (l == 0) break;
            const auto w = model.weights(l);
            for (std::size_t j = 0; j < fan_in; ++j) {
                // ReLU derivative: 1 where the activation is positive, 0 otherwise (including at 0).
                delta_prev[j] = a_in[j] > 0.0 ? k.dot(w.data() + j * width, delta.data(), width) : 0.0;
            }
            std::swap(delta, delta_prev);
            width = fan_in;
        }
    }
    return grads;
}

// ---------------------------------------------------------------------------
// ADAM

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& config) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
    }
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const simd::AdamCoefficients c{
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.epsilon_adam,
        1.0 / (1.0 - std::pow(config.beta1, t)),
        1.0 / (1.0 - std::pow(config.beta2, t)),
    };
    simd::active().adam(params.data(), grads.data(), state.first_moment.data(), state.second_moment.data(),
                        params.size(), c);
}

// ---------------------------------------------------------------------------
// Batch sources

OneHotSource::OneHotSource(std::vector<std::vector<int>> feature_columns, std::vector<std::size_t> alphabet_sizes,
                           std::vector<int> targets, std::size_t num_classes)
    : columns_(std::move(feature_columns)),
      alphabets_(std::move(alphabet_sizes)),
      targets_(std::move(targets)),
      num_classes_(num_classes),
      input_dim_(0) {
    if (columns_.size() != alphabets_.size()) throw ShapeError("one alphabet size per feature column required");
    if (num_classes_ < 2) throw ShapeError("target alphabet must have at least 2 symbols");
    check_targets(targets_, num_classes_);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].size() != targets_.size()) throw ShapeError("feature column length differs from targets");
        if (alphabets_[c] == 0) throw ShapeError("alphabet sizes must be positive");
        for (int v : columns_[c]) {
            if (v < 0 || static_cast<std::size_t>(v) >= alphabets_[c]) {
                throw ShapeError("feature symbol outside its alphabet");
            }
        }
        block_offsets_.push_back(input_dim_);
        input_dim_ += alphabets_[c];
    }
    // A classifier with no conditioning still needs one input; feed a constant zero.
    if (input_dim_ == 0) input_dim_ = 1;
}

EncodedBatch OneHotSource::encode(std::span<const std::size_t> rows) const {
    EncodedBatch batch;
    batch.inputs = Matrix(rows.size(), input_dim_);
    batch.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            batch.inputs(i, block_offsets_[c] + static_cast<std::size_t>(columns_[c][r])) = 1.0;
        }
        batch.targets[i] = targets_[r];
    }
    return batch;
}

DenseSource::DenseSource(Matrix inputs, std::vector<int> targets, std::size_t num_classes)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), num_classes_(num_classes) {
    if (inputs_.rows != targets_.size()) throw ShapeError("input rows and targets differ in count");
    if (num_classes_ < 2) throw ShapeError("target alphabet must have at least 2 symbols");
    check_targets(targets_, num_classes_);
}

EncodedBatch DenseSource::encode(std::span<const std::size_t> rows) const {
    EncodedBatch batch;
    batch.inputs = Matrix(rows.size(), inputs_.cols);
    batch.targets.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = inputs_.row(rows[i]);
        std::copy(src.begin(), src.end(), batch.inputs.row(i).begin());
        batch.targets[i] = targets_[rows[i]];
    }
    return batch;
}

// ---------------------------------------------------------------------------
// Training

namespace {

constexpr std::size_t kEvalChunk = 2048;

std::vector<std::size_t> layer_dims_for(std::size_t input_dim, std::size_t num_classes, const TrainConfig& config) {
    std::vector<std::size_t> dims{input_dim};
    dims.insert(dims.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
    dims.push_back(num_classes);
    return dims;
}

}  // namespace

double evaluate_ce(const ClassifierModel& model, const BatchSource& source, std::span<const std::size_t> rows,
                   double prob_floor) {
    if (rows.empty()) throw ShapeError("cross-entropy of an empty row set");
    double total = 0.0;
    for (std::size_t start = 0; start < rows.size(); start += kEvalChunk) {
        const auto chunk = rows.subspan(start, std::min(kEvalChunk, rows.size() - start));
        const EncodedBatch batch = source.encode(chunk);
        total += ce_loss(forward(model, batch.inputs), batch.targets, prob_floor) * static_cast<double>(chunk.size());
    }
    return total / static_cast<double>(rows.size());
}

double evaluate_ce(const ClassifierModel& model, const BatchSource& source, double prob_floor) {
    std::vector<std::size_t> rows(source.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return evaluate_ce(model, source, rows, prob_floor);
}

TrainResult train_classifier(const BatchSource& source, const TrainConfig& config) {
    config.validate(source.num_classes());
    if (source.size() == 0) throw TrainingError("training requires at least one row");

    std::vector<std::size_t> train_rows(source.size());
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::vector<std::size_t> holdout_rows;
    if (config.holdout_fraction > 0.0 && source.size() >= 2) {
        Rng split_rng(derive_seed(config.seed, 0x5EED5));
        std::shuffle(train_rows.begin(), train_rows.end(), split_rng);
        std::size_t held = static_cast<std::size_t>(config.holdout_fraction * static_cast<double>(source.size()));
        held = std::clamp<std::size_t>(held, 1, source.size() - 1);
        holdout_rows.assign(train_rows.end() - static_cast<std::ptrdiff_t>(held), train_rows.end());
        train_rows.resize(train_rows.size() - held);
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(holdout_rows.begin(), holdout_rows.end());
    }

    ClassifierModel model =
        ClassifierModel::glorot(layer_dims_for(source.input_dim(), source.num_classes(), config), config.seed);
    AdamState adam(model.parameter_count());

    TrainResult result{model, std::numeric_limits<double>::infinity(), {}, 0, std::nullopt};
    double patience_reference = std::numeric_limits<double>::infinity();
    std::size_t since_improvement = 0;
    std::vector<std::size_t> order = train_rows;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(config.seed, 0xE90C0000ULL + epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto rows = std::span<const std::size_t>(order).subspan(
                start, std::min(config.batch_size, order.size() - start));
            const EncodedBatch batch = source.encode(rows);
            const GradientSet grads = backward(model, batch, config.prob_floor);
            if (!std::isfinite(grads.loss)) {
                std::ostringstream msg;
                msg << "non-finite minibatch loss at epoch " << epoch;
                throw TrainingError(msg.str());
            }
            adam_step(model.params(), grads.values, adam, config);
        }

        const double ce = evaluate_ce(model, source, train_rows, config.prob_floor);
        if (!std::isfinite(ce)) {
            std::ostringstream msg;
            msg << "non-finite full-sample loss at epoch " << epoch;
            throw TrainingError(msg.str());
        }
        result.history.push_back(ce);
        if (ce < result.min_ce) {
            result.min_ce = ce;
            result.best_epoch = epoch;
            result.model = model;
        }
        if (ce < patience_reference - config.min_delta) {
            patience_reference = ce;
            since_improvement = 0;
        } else if (++since_improvement >= config.patience && config.patience > 0) {
            break;
        }
    }
    if (!holdout_rows.empty()) {
        result.holdout_ce = evaluate_ce(result.model, source, holdout_rows, config.prob_floor);
    }
    return result;
}

StreamingTrainer::StreamingTrainer(std::size_t input_dim, std::size_t num_classes, const TrainConfig& config)
    : config_(config),
      model_(ClassifierModel::glorot(layer_dims_for(input_dim, num_classes, config), config.seed)),
      adam_(model_.parameter_count()) {
    config_.validate(num_classes);
}

double StreamingTrainer::step(const EncodedBatch& batch) {
    const GradientSet grads = backward(model_, batch, config_.prob_floor);
    if (!std::isfinite(grads.loss)) throw TrainingError("non-finite streaming batch loss");
    adam_step(model_.params(), grads.values, adam_, config_);
    return grads.loss;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckReport grad_check(const ClassifierModel& model, const EncodedBatch& batch, double tolerance,
                           double prob_floor) {
    if (batch.size() == 0) throw ShapeError("gradient check on an empty batch");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    constexpr double kStep = 1e-5;
    const GradientSet analytic = backward(model, batch, prob_floor);
    ClassifierModel probe = model;
    auto params = probe.params();

    GradCheckReport report;
    report.relative_errors.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double original = params[i];
        params[i] = original + kStep;
        const double up = ce_loss(forward(probe, batch.inputs), batch.targets, prob_floor);
        params[i] = original - kStep;
        const double down = ce_loss(forward(probe, batch.inputs), batch.targets, prob_floor);
        params[i] = original;
        const double numeric = (up - down) / (2.0 * kStep);
        const double a = analytic.values[i];
        const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
        const double rel = std::abs(a - numeric) / scale;
        report.relative_errors[i] = rel;
        report.max_relative_error = std::max(report.max_relative_error, rel);
        if (rel > tolerance) report.flagged.push_back(i);
    }
    return report;
}

}  // namespace njee
