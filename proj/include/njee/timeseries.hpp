#pragma once

// Transfer-entropy pipeline: percent returns, ternary binning, lag embedding,
// C-NJEE based TE and a rolling bidirectional TE track.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "njee/discrete.hpp"
#include "njee/estimators.hpp"
#include "njee/nn.hpp"

namespace njee {

// Timestamped univariate series. Timestamps are ISO-8601 strings, so
// lexicographic order is chronological.
struct SeriesFrame {
    std::string name;
    std::vector<std::string> timestamps;
    std::vector<double> values;

    // Throws std::invalid_argument on unsorted/duplicate timestamps, malformed
    // dates or non-finite values.
    void validate() const;
};

// Rows of both frames whose timestamps appear in both, in time order.
std::pair<SeriesFrame, SeriesFrame> inner_join(const SeriesFrame& a, const SeriesFrame& b);

// r_t = 100 (v_t - v_{t-1}) / v_{t-1}.
std::vector<double> to_returns(const SeriesFrame& frame);

struct BinnerSpec {
    double lower_threshold = -0.8;
    double upper_threshold = 0.8;
};

// -1 below the lower threshold, +1 above the upper one, 0 otherwise (the
// thresholds themselves map to 0).
std::vector<int> ternary_bin(std::span<const double> returns, const BinnerSpec& spec = {});

// {-1, 0, +1} -> {0, 1, 2}.
std::vector<int> ternary_symbols(std::span<const int> levels);

// Aligned (x past, y past, y next) rows. Row r corresponds to time
// t = r + max(k, l) - 1 and holds x_{t-k+1..t}, y_{t-l+1..t} and y_{t+1}.
struct LagEmbedding {
    std::size_t k = 5;
    std::size_t l = 5;
    std::size_t alphabet = 3;
    DiscreteSample x_past;
    DiscreteSample y_past;
    DiscreteSample y_next;
    std::vector<std::size_t> next_index;  // position of y_{t+1} in the input series

    std::size_t rows() const { return y_next.rows(); }
    LagEmbedding slice(std::size_t first, std::size_t count) const;
};

LagEmbedding embed(std::span<const int> x_symbols, std::span<const int> y_symbols, std::size_t k, std::size_t l,
                   std::size_t alphabet = 3);

// cnjee(Y_{t+1} | Y past) - cnjee(Y_{t+1} | X past, Y past).
CmiEstimate transfer_entropy(const LagEmbedding& embedding, const TrainConfig& config, std::size_t jobs = 1);

// Per-row local TE of a single global fit: ln q(y+|x past, y past) - ln q(y+|y past).
std::vector<double> local_transfer_entropy(const LagEmbedding& embedding, const TrainConfig& config,
                                           std::size_t jobs = 1);

struct RollingOptions {
    std::size_t window = 30;
    std::size_t stride = 1;
    std::size_t k = 5;
    std::size_t l = 5;
    bool retrain_per_window = false;
    BinnerSpec binner;
    std::size_t jobs = 1;
};

struct RollingPoint {
    std::string timestamp;
    double te_xy = 0.0;
    double te_yx = 0.0;
    double te_xy_smoothed = 0.0;
    double te_yx_smoothed = 0.0;
};

// Rolling estimates from symbol series already aligned in time. Windows of
// `window` embedded rows advance by `stride`; the smoothed columns are the
// trailing mean of the estimates whose windows end within the last `window`
// rows. timestamps[i] labels symbol i.
std::vector<RollingPoint> rolling_te_symbols(std::span<const int> x_symbols, std::span<const int> y_symbols,
                                             std::span<const std::string> timestamps, std::size_t alphabet,
                                             const RollingOptions& options, const TrainConfig& config);

// Full pipeline from price frames: inner join, returns, ternary binning, then
// rolling_te_symbols.
std::vector<RollingPoint> rolling_te(const SeriesFrame& x_frame, const SeriesFrame& y_frame,
                                     const RollingOptions& options, const TrainConfig& config);

}  // namespace njee
