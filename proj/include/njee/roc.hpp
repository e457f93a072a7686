#pragma once

#include <span>
#include <vector>

namespace njee {

struct RocPoint {
    double false_positive_rate = 0.0;
    double true_positive_rate = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // from (0,0) to (1,1)
    double auc = 0.0;
};

// Threshold sweep over the distinct scores, highest first: a case is called
// positive when its score is >= the threshold. labels: 1 positive, 0 negative.
// AUC is the trapezoid area, which equals P(s+ > s-) + P(s+ = s-)/2.
// Throws std::invalid_argument unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

// Direct pair-counting AUC with half credit for ties.
double pairwise_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace njee
