#pragma once

// Discrete sample containers, base-b digit decomposition of large alphabets and
// the classical entropy baselines (plug-in, Miller-Madow, Chao-Shen).

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace njee {

// n observations of a d-component discrete vector, stored row-major.
class DiscreteSample {
public:
    DiscreteSample(std::size_t rows, std::vector<std::size_t> alphabet_sizes, std::vector<int> data);

    static DiscreteSample from_columns(const std::vector<std::vector<int>>& columns,
                                       std::vector<std::size_t> alphabet_sizes);

    std::size_t rows() const { return rows_; }
    std::size_t dims() const { return alphabets_.size(); }
    const std::vector<std::size_t>& alphabet_sizes() const { return alphabets_; }
    std::size_t alphabet_size(std::size_t m) const { return alphabets_[m]; }

    int at(std::size_t i, std::size_t m) const { return data_[i * alphabets_.size() + m]; }
    std::span<const int> row(std::size_t i) const { return {data_.data() + i * dims(), dims()}; }
    std::vector<int> column(std::size_t m) const;

    // Columns [first, first + count) as a new sample.
    DiscreteSample slice_columns(std::size_t first, std::size_t count) const;

    // Rows [first, first + count) as a new sample.
    DiscreteSample slice_rows(std::size_t first, std::size_t count) const;

    // Side-by-side concatenation; row counts must match.
    static DiscreteSample hconcat(const DiscreteSample& left, const DiscreteSample& right);

private:
    std::size_t rows_;
    std::vector<std::size_t> alphabets_;
    std::vector<int> data_;
};

struct EmpiricalDistribution {
    std::map<long long, std::size_t> counts;
    std::size_t total = 0;
    std::size_t support_size = 0;

    static EmpiricalDistribution from_symbols(std::span<const int> symbols);
    static EmpiricalDistribution from_counts(const std::vector<std::size_t>& counts);
    // Joint symbols of whole rows.
    static EmpiricalDistribution from_rows(const DiscreteSample& sample);
};

struct TermDiagnostics {
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    std::optional<double> holdout_ce;
};

struct EntropyEstimate {
    double value_nats = 0.0;
    std::vector<double> component_terms;
    std::string method;
    std::vector<TermDiagnostics> diagnostics;
    std::size_t classifiers_trained = 0;
};

// Smallest d >= 1 with base^d >= alphabet_size.
std::size_t digits_needed(std::size_t alphabet_size, std::size_t base);

// Base-`base` digits of every value, most significant first.
DiscreteSample decompose(std::span<const int> values, std::size_t alphabet_size, std::size_t base = 2);

// Inverse of decompose. Every column's alphabet must equal `base`.
std::vector<int> compose(const DiscreteSample& sample, std::size_t base = 2);

double plugin_entropy(const EmpiricalDistribution& dist);
double miller_madow_entropy(const EmpiricalDistribution& dist);
double chao_shen_entropy(const EmpiricalDistribution& dist);

// Estimate of the first chain component's marginal entropy (Miller-Madow).
double marginal_h1(std::span<const int> column);

}  // namespace njee
