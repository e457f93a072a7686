#include "njee/timeseries.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "njee/parallel.hpp"

namespace njee {

namespace {

bool is_iso_date(const std::string& s) {
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    if (s.size() > 10 && s[10] != 'T' && s[10] != ' ') return false;
    const int y = std::stoi(s.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
    return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

}  // namespace

void SeriesFrame::validate() const {
    if (timestamps.size() != values.size()) throw std::invalid_argument(name + ": timestamp/value count mismatch");
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        if (!is_iso_date(timestamps[i])) {
            throw std::invalid_argument(name + ": malformed ISO-8601 timestamp '" + timestamps[i] + "'");
        }
        if (i > 0 && !(timestamps[i - 1] < timestamps[i])) {
            throw std::invalid_argument(name + ": timestamps not strictly increasing at '" + timestamps[i] + "'");
        }
        if (!std::isfinite(values[i])) throw std::invalid_argument(name + ": non-finite value at " + timestamps[i]);
    }
}

std::pair<SeriesFrame, SeriesFrame> inner_join(const SeriesFrame& a, const SeriesFrame& b) {
    SeriesFrame ja{a.name, {}, {}};
    SeriesFrame jb{b.name, {}, {}};
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.timestamps.size() && j < b.timestamps.size()) {
        if (a.timestamps[i] < b.timestamps[j]) {
            ++i;
        } else if (b.timestamps[j] < a.timestamps[i]) {
            ++j;
        } else {
            ja.timestamps.push_back(a.timestamps[i]);
            ja.values.push_back(a.values[i]);
            jb.timestamps.push_back(b.timestamps[j]);
            jb.values.push_back(b.values[j]);
            ++i;
            ++j;
        }
    }
    return {std::move(ja), std::move(jb)};
}

std::vector<double> to_returns(const SeriesFrame& frame) {
    if (frame.values.size() < 2) throw std::invalid_argument("returns need at least 2 points");
    std::vector<double> r(frame.values.size() - 1);
    for (std::size_t t = 1; t < frame.values.size(); ++t) {
        const double prev = frame.values[t - 1];
        if (!(prev > 0.0) || !(frame.values[t] > 0.0)) {
            std::ostringstream msg;
            msg << frame.name << ": nonpositive price at index " << (prev > 0.0 ? t : t - 1);
            throw std::invalid_argument(msg.str());
        }
        r[t - 1] = 100.0 * (frame.values[t] - prev) / prev;
    }
    return r;
}

std::vector<int> ternary_bin(std::span<const double> returns, const BinnerSpec& spec) {
    if (!(spec.lower_threshold < spec.upper_threshold)) throw std::invalid_argument("binner thresholds out of order");
    std::vector<int> out(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i) {
        const double r = returns[i];
        if (!std::isfinite(r)) throw std::invalid_argument("non-finite return");
        out[i] = r < spec.lower_threshold ? -1 : (r > spec.upper_threshold ? 1 : 0);
    }
    return out;
}

std::vector<int> ternary_symbols(std::span<const int> levels) {
    std::vector<int> out(levels.size());
    std::transform(levels.begin(), levels.end(), out.begin(), [](int v) { return v + 1; });
    return out;
}

// ---------------------------------------------------------------------------

LagEmbedding embed(std::span<const int> x_symbols, std::span<const int> y_symbols, std::size_t k, std::size_t l,
                   std::size_t alphabet) {
    if (x_symbols.size() != y_symbols.size()) throw std::invalid_argument("embed: series lengths differ");
    if (k == 0 || l == 0) throw std::invalid_argument("embed: lags must be positive");
    const std::size_t n = x_symbols.size();
    const std::size_t lead = std::max(k, l);
    if (n < lead + 1) {
        std::ostringstream msg;
        msg << "embed: series of length " << n << " too short for lags (" << k << ", " << l << "); need at least "
            << lead + 1;
        throw std::invalid_argument(msg.str());
    }
    const std::size_t rows = n - lead;
    std::vector<int> xp(rows * k);
    std::vector<int> yp(rows * l);
    std::vector<int> next(rows);
    std::vector<std::size_t> index(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + lead - 1;
        for (std::size_t j = 0; j < k; ++j) xp[r * k + j] = x_symbols[t + 1 - k + j];
        for (std::size_t j = 0; j < l; ++j) yp[r * l + j] = y_symbols[t + 1 - l + j];
        next[r] = y_symbols[t + 1];
        index[r] = t + 1;
    }
    return LagEmbedding{k,
                        l,
                        alphabet,
                        DiscreteSample(rows, std::vector<std::size_t>(k, alphabet), std::move(xp)),
                        DiscreteSample(rows, std::vector<std::size_t>(l, alphabet), std::move(yp)),
                        DiscreteSample(rows, {alphabet}, std::move(next)),
                        std::move(index)};
}

LagEmbedding LagEmbedding::slice(std::size_t first, std::size_t count) const {
    return LagEmbedding{k,
                        l,
                        alphabet,
                        x_past.slice_rows(first, count),
                        y_past.slice_rows(first, count),
                        y_next.slice_rows(first, count),
                        std::vector<std::size_t>(next_index.begin() + static_cast<std::ptrdiff_t>(first),
                                                 next_index.begin() + static_cast<std::ptrdiff_t>(first + count))};
}

CmiEstimate transfer_entropy(const LagEmbedding& embedding, const TrainConfig& config, std::size_t jobs) {
    return cmi(embedding.y_next, embedding.x_past, embedding.y_past, config, jobs);
}

std::vector<double> local_transfer_entropy(const LagEmbedding& embedding, const TrainConfig& config,
                                           std::size_t jobs) {
    const DiscreteSample both = DiscreteSample::hconcat(embedding.x_past, embedding.y_past);
    const DiscreteSample* conditioning[2] = {&embedding.y_past, &both};
    std::vector<std::optional<TrainResult>> fits(2);
    parallel_for(2, jobs, [&](std::size_t which) {
        fits[which] = train_chain_term(embedding.y_next, conditioning[which], 0, config);
    });

    const std::size_t n = embedding.rows();
    std::vector<double> local(n, 0.0);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    for (std::size_t which = 0; which < 2; ++which) {
        const ChainTermSource source(embedding.y_next, conditioning[which], 0);
        const double sign = which == 0 ? -1.0 : 1.0;
        constexpr std::size_t kChunk = 2048;
        for (std::size_t start = 0; start < n; start += kChunk) {
            const auto chunk = std::span<const std::size_t>(rows).subspan(start, std::min(kChunk, n - start));
            const EncodedBatch batch = source.encode(chunk);
            const Matrix probs = forward(fits[which]->model, batch.inputs);
            for (std::size_t i = 0; i < chunk.size(); ++i) {
                const double p = std::max(probs(i, static_cast<std::size_t>(batch.targets[i])), config.prob_floor);
                local[chunk[i]] += sign * std::log(p);
            }
        }
    }
    return local;
}

// ---------------------------------------------------------------------------

namespace {

struct WindowPlan {
    std::size_t count = 0;
    std::size_t window = 0;
    std::size_t stride = 0;
    std::size_t start(std::size_t w) const { return w * stride; }
};

WindowPlan plan_windows(std::size_t usable_rows, const RollingOptions& options) {
    if (options.window == 0 || options.stride == 0) throw std::invalid_argument("window and stride must be positive");
    if (usable_rows < options.window) {
        std::ostringstream msg;
        msg << "insufficient overlap: need at least " << options.window + std::max(options.k, options.l) + 1
            << " aligned points for window " << options.window << " and lags (" << options.k << ", " << options.l
            << ")";
        throw std::invalid_argument(msg.str());
    }
    return WindowPlan{(usable_rows - options.window) / options.stride + 1, options.window, options.stride};
}

std::vector<double> window_estimates(const LagEmbedding& embedding, const WindowPlan& plan,
                                     const RollingOptions& options, const TrainConfig& config) {
    std::vector<double> out(plan.count, 0.0);
    if (options.retrain_per_window) {
        parallel_for(plan.count, options.jobs, [&](std::size_t w) {
            out[w] = transfer_entropy(embedding.slice(plan.start(w), plan.window), config, 1).value_nats;
        });
        return out;
    }
    const std::vector<double> local = local_transfer_entropy(embedding, config, options.jobs);
    for (std::size_t w = 0; w < plan.count; ++w) {
        const auto first = local.begin() + static_cast<std::ptrdiff_t>(plan.start(w));
        out[w] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(plan.window), 0.0) /
                 static_cast<double>(plan.window);
    }
    return out;
}

std::vector<double> trailing_mean(const std::vector<double>& values, std::size_t span) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t first = i + 1 >= span ? i + 1 - span : 0;
        double sum = 0.0;
        for (std::size_t j = first; j <= i; ++j) sum += values[j];
        out[i] = sum / static_cast<double>(i + 1 - first);
    }
    return out;
}

}  // namespace

std::vector<RollingPoint> rolling_te_symbols(std::span<const int> x_symbols, std::span<const int> y_symbols,
                                             std::span<const std::string> timestamps, std::size_t alphabet,
                                             const RollingOptions& options, const TrainConfig& config) {
    if (x_symbols.size() != y_symbols.size() || x_symbols.size() != timestamps.size()) {
        throw std::invalid_argument("rolling_te: series and timestamp lengths differ");
    }
    const std::size_t lead = std::max(options.k, options.l);
    if (x_symbols.size() < lead + options.window) {
        std::ostringstream msg;
        msg << "insufficient overlap: need at least " << options.window + lead << " aligned symbols, have "
            << x_symbols.size();
        throw std::invalid_argument(msg.str());
    }
    const LagEmbedding xy = embed(x_symbols, y_symbols, options.k, options.l, alphabet);
    const LagEmbedding yx = embed(y_symbols, x_symbols, options.k, options.l, alphabet);
    const WindowPlan plan = plan_windows(xy.rows(), options);

    const std::vector<double> te_xy = window_estimates(xy, plan, options, config);
    const std::vector<double> te_yx = window_estimates(yx, plan, options, config);
    const std::size_t smoothing_span = (options.window + options.stride - 1) / options.stride;
    const auto smooth_xy = trailing_mean(te_xy, smoothing_span);
    const auto smooth_yx = trailing_mean(te_yx, smoothing_span);

    std::vector<RollingPoint> out(plan.count);
    for (std::size_t w = 0; w < plan.count; ++w) {
        const std::size_t last_row = plan.start(w) + plan.window - 1;
        out[w] = RollingPoint{timestamps[xy.next_index[last_row]], te_xy[w], te_yx[w], smooth_xy[w], smooth_yx[w]};
    }
    return out;
}

std::vector<RollingPoint> rolling_te(const SeriesFrame& x_frame, const SeriesFrame& y_frame,
                                     const RollingOptions& options, const TrainConfig& config) {
    x_frame.validate();
    y_frame.validate();
    const auto [xj, yj] = inner_join(x_frame, y_frame);
    const std::size_t required = options.window + std::max(options.k, options.l) + 1;
    if (xj.values.size() < required) {
        std::ostringstream msg;
        msg << "insufficient overlap: " << xj.values.size() << " shared timestamps, need at least " << required;
        throw std::invalid_argument(msg.str());
    }
    const auto xs = ternary_symbols(ternary_bin(to_returns(xj), options.binner));
    const auto ys = ternary_symbols(ternary_bin(to_returns(yj), options.binner));
    const std::vector<std::string> stamps(xj.timestamps.begin() + 1, xj.timestamps.end());
    return rolling_te_symbols(xs, ys, stamps, 3, options, config);
}

}  // namespace njee
