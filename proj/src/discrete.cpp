#include "njee/discrete.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace njee {

DiscreteSample::DiscreteSample(std::size_t rows, std::vector<std::size_t> alphabet_sizes, std::vector<int> data)
    : rows_(rows), alphabets_(std::move(alphabet_sizes)), data_(std::move(data)) {
    if (rows_ == 0) throw std::invalid_argument("a sample needs at least one row");
    if (alphabets_.empty()) throw std::invalid_argument("a sample needs at least one component");
    if (data_.size() != rows_ * alphabets_.size()) throw std::invalid_argument("sample data size mismatch");
    for (std::size_t a : alphabets_) {
        if (a == 0) throw std::invalid_argument("alphabet sizes must be positive");
    }
    const std::size_t d = alphabets_.size();
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t m = 0; m < d; ++m) {
            const int v = data_[i * d + m];
            if (v < 0 || static_cast<std::size_t>(v) >= alphabets_[m]) {
                std::ostringstream msg;
                msg << "symbol " << v << " at row " << i << ", component " << m << " outside alphabet of size "
                    << alphabets_[m];
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

DiscreteSample DiscreteSample::from_columns(const std::vector<std::vector<int>>& columns,
                                            std::vector<std::size_t> alphabet_sizes) {
    if (columns.empty()) throw std::invalid_argument("a sample needs at least one component");
    const std::size_t n = columns.front().size();
    const std::size_t d = columns.size();
    std::vector<int> data(n * d);
    for (std::size_t m = 0; m < d; ++m) {
        if (columns[m].size() != n) throw std::invalid_argument("columns differ in length");
        for (std::size_t i = 0; i < n; ++i) data[i * d + m] = columns[m][i];
    }
    return DiscreteSample(n, std::move(alphabet_sizes), std::move(data));
}

std::vector<int> DiscreteSample::column(std::size_t m) const {
    std::vector<int> out(rows_);
    const std::size_t d = dims();
    for (std::size_t i = 0; i < rows_; ++i) out[i] = data_[i * d + m];
    return out;
}

DiscreteSample DiscreteSample::slice_columns(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > dims()) throw std::out_of_range("column slice out of range");
    std::vector<int> data(rows_ * count);
    const std::size_t d = dims();
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t m = 0; m < count; ++m) data[i * count + m] = data_[i * d + first + m];
    }
    std::vector<std::size_t> alphabets(alphabets_.begin() + static_cast<std::ptrdiff_t>(first),
                                       alphabets_.begin() + static_cast<std::ptrdiff_t>(first + count));
    return DiscreteSample(rows_, std::move(alphabets), std::move(data));
}

DiscreteSample DiscreteSample::slice_rows(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > rows_) throw std::out_of_range("row slice out of range");
    const std::size_t d = dims();
    std::vector<int> data(data_.begin() + static_cast<std::ptrdiff_t>(first * d),
                          data_.begin() + static_cast<std::ptrdiff_t>((first + count) * d));
    return DiscreteSample(count, alphabets_, std::move(data));
}

DiscreteSample DiscreteSample::hconcat(const DiscreteSample& left, const DiscreteSample& right) {
    if (left.rows() != right.rows()) throw std::invalid_argument("hconcat: row counts differ");
    const std::size_t n = left.rows();
    const std::size_t dl = left.dims();
    const std::size_t dr = right.dims();
    std::vector<int> data(n * (dl + dr));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < dl; ++m) data[i * (dl + dr) + m] = left.at(i, m);
        for (std::size_t m = 0; m < dr; ++m) data[i * (dl + dr) + dl + m] = right.at(i, m);
    }
    std::vector<std::size_t> alphabets = left.alphabet_sizes();
    alphabets.insert(alphabets.end(), right.alphabet_sizes().begin(), right.alphabet_sizes().end());
    return DiscreteSample(n, std::move(alphabets), std::move(data));
}

// ---------------------------------------------------------------------------

EmpiricalDistribution EmpiricalDistribution::from_symbols(std::span<const int> symbols) {
    EmpiricalDistribution dist;
    for (int s : symbols) ++dist.counts[s];
    dist.total = symbols.size();
    dist.support_size = dist.counts.size();
    return dist;
}

EmpiricalDistribution EmpiricalDistribution::from_counts(const std::vector<std::size_t>& counts) {
    EmpiricalDistribution dist;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        dist.counts[static_cast<long long>(i)] = counts[i];
        dist.total += counts[i];
    }
    dist.support_size = dist.counts.size();
    return dist;
}

EmpiricalDistribution EmpiricalDistribution::from_rows(const DiscreteSample& sample) {
    EmpiricalDistribution dist;
    for (std::size_t i = 0; i < sample.rows(); ++i) {
        long long key = 0;
        for (std::size_t m = 0; m < sample.dims(); ++m) {
            key = key * static_cast<long long>(sample.alphabet_size(m)) + sample.at(i, m);
        }
        ++dist.counts[key];
    }
    dist.total = sample.rows();
    dist.support_size = dist.counts.size();
    return dist;
}

// ---------------------------------------------------------------------------

std::size_t digits_needed(std::size_t alphabet_size, std::size_t base) {
    if (base < 2) throw std::invalid_argument("base must be at least 2");
    if (alphabet_size == 0) throw std::invalid_argument("alphabet size must be positive");
    std::size_t digits = 1;
    std::size_t reach = base;
    while (reach < alphabet_size) {
        reach *= base;
        ++digits;
    }
    return digits;
}

DiscreteSample decompose(std::span<const int> values, std::size_t alphabet_size, std::size_t base) {
    const std::size_t d = digits_needed(alphabet_size, base);
    std::vector<int> data(values.size() * d);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int v = values[i];
        if (v < 0 || static_cast<std::size_t>(v) >= alphabet_size) {
            std::ostringstream msg;
            msg << "value " << v << " at index " << i << " outside alphabet of size " << alphabet_size;
            throw std::invalid_argument(msg.str());
        }
        auto rest = static_cast<std::size_t>(v);
        for (std::size_t m = d; m-- > 0;) {
            data[i * d + m] = static_cast<int>(rest % base);
            rest /= base;
        }
    }
    return DiscreteSample(values.size(), std::vector<std::size_t>(d, base), std::move(data));
}

std::vector<int> compose(const DiscreteSample& sample, std::size_t base) {
    for (std::size_t a : sample.alphabet_sizes()) {
        if (a != base) throw std::invalid_argument("compose: every component must have alphabet size equal to base");
    }
    std::vector<int> out(sample.rows());
    for (std::size_t i = 0; i < sample.rows(); ++i) {
        long long v = 0;
        for (int digit : sample.row(i)) v = v * static_cast<long long>(base) + digit;
        out[i] = static_cast<int>(v);
    }
    return out;
}

// ---------------------------------------------------------------------------

double plugin_entropy(const EmpiricalDistribution& dist) {
    if (dist.total == 0) throw std::invalid_argument("entropy of an empty distribution");
    const double n = static_cast<double>(dist.total);
    double h = 0.0;
    for (const auto& [symbol, count] : dist.counts) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        h -= p * std::log(p);
    }
    return h > 0.0 ? h : 0.0;
}

double miller_madow_entropy(const EmpiricalDistribution& dist) {
    const double correction =
        (static_cast<double>(dist.support_size) - 1.0) / (2.0 * static_cast<double>(dist.total));
    return plugin_entropy(dist) + correction;
}

double chao_shen_entropy(const EmpiricalDistribution& dist) {
    if (dist.total == 0) throw std::invalid_argument("entropy of an empty distribution");
    const double n = static_cast<double>(dist.total);
    std::size_t singletons = 0;
    for (const auto& [symbol, count] : dist.counts) {
        if (count == 1) ++singletons;
    }
    if (singletons == dist.total) singletons = dist.total - 1;
    const double coverage = 1.0 - static_cast<double>(singletons) / n;
    double h = 0.0;
    for (const auto& [symbol, count] : dist.counts) {
        if (count == 0) continue;
        const double p = coverage * static_cast<double>(count) / n;
        const double inclusion = 1.0 - std::pow(1.0 - p, n);
        h -= p * std::log(p) / inclusion;
    }
    return h > 0.0 ? h : 0.0;
}

double marginal_h1(std::span<const int> column) {
    if (column.empty()) throw std::invalid_argument("marginal entropy of an empty column");
    return miller_madow_entropy(EmpiricalDistribution::from_symbols(column));
}

}  // namespace njee
