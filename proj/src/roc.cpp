#include "njee/roc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace njee {

namespace {

std::pair<std::size_t, std::size_t> class_counts(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (int y : labels) {
        if (y == 1) {
            ++pos;
        } else if (y == 0) {
            ++neg;
        } else {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
    if (pos == 0 || neg == 0) throw std::invalid_argument("ROC needs both positive and negative labels");
    return {pos, neg};
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
    const auto [pos, neg] = class_counts(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels[order[i]] == 1) {
                ++tp;
            } else {
                ++fp;
            }
            ++i;
        }
        curve.points.push_back(
            {static_cast<double>(fp) / static_cast<double>(neg), static_cast<double>(tp) / static_cast<double>(pos),
             threshold});
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        curve.auc += (b.false_positive_rate - a.false_positive_rate) * (a.true_positive_rate + b.true_positive_rate) / 2.0;
    }
    return curve;
}

double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
    const auto [pos, neg] = class_counts(scores, labels);
    double wins = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            if (scores[i] > scores[j]) {
                wins += 1.0;
            } else if (scores[i] == scores[j]) {
                wins += 0.5;
            }
        }
    }
    return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace njee
