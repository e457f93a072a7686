#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "njee/discrete.hpp"

using namespace njee;

namespace {

// Independent arithmetic for the Chao-Shen formula on a count vector.
double chao_shen_reference(std::vector<double> counts) {
    double n = 0.0, f1 = 0.0;
    for (double c : counts) {
        n += c;
        if (c == 1.0) f1 += 1.0;
    }
    if (f1 == n) f1 = n - 1.0;
    const double coverage = 1.0 - f1 / n;
    double h = 0.0;
    for (double c : counts) {
        const double p = coverage * c / n;
        h += -p * std::log(p) / (1.0 - std::pow(1.0 - p, n));
    }
    return h;
}

}  // namespace

TEST_CASE("decompose examples") {
    const std::vector<int> five{5};
    const auto s = decompose(five, 16, 2);
    REQUIRE(s.dims() == 4);
    CHECK(s.at(0, 0) == 0);
    CHECK(s.at(0, 1) == 1);
    CHECK(s.at(0, 2) == 0);
    CHECK(s.at(0, 3) == 1);

    const std::vector<int> zero{0};
    const auto z = decompose(zero, 1000, 3);
    for (std::size_t m = 0; m < z.dims(); ++m) CHECK(z.at(0, m) == 0);

    CHECK(digits_needed(100000, 2) == 17);
    CHECK(digits_needed(16, 2) == 4);
    CHECK(digits_needed(17, 2) == 5);
    CHECK(digits_needed(2, 2) == 1);
    CHECK(digits_needed(1, 2) == 1);

    const std::vector<int> bad{16};
    CHECK_THROWS(decompose(bad, 16, 2));
    CHECK_THROWS(decompose(five, 16, 1));
}

TEST_CASE("compose examples") {
    const DiscreteSample s(1, {2, 2, 2, 2}, {0, 1, 0, 1});
    CHECK(compose(s, 2) == std::vector<int>{5});
    const DiscreteSample z(1, {2, 2, 2}, {0, 0, 0});
    CHECK(compose(z, 2) == std::vector<int>{0});
    const DiscreteSample mixed(1, {2, 3}, {0, 1});
    CHECK_THROWS(compose(mixed, 2));
}

TEST_CASE("compose inverts decompose") {
    SUBCASE("exhaustive over 2^16 in base 2 and 3^10 in base 3") {
        std::vector<int> all(1 << 16);
        for (int i = 0; i < (1 << 16); ++i) all[static_cast<std::size_t>(i)] = i;
        CHECK(compose(decompose(all, all.size(), 2), 2) == all);
        all.resize(59049);
        CHECK(compose(decompose(all, all.size(), 3), 3) == all);
    }
    SUBCASE("1000 random values below 10^5") {
        std::mt19937_64 rng(3);
        std::vector<int> v(1000);
        for (int& x : v) x = static_cast<int>(rng() % 100000);
        CHECK(compose(decompose(v, 100000, 2), 2) == v);
    }
}

TEST_CASE("DiscreteSample rejects out-of-alphabet symbols and empty shapes") {
    CHECK_THROWS(DiscreteSample(1, {2}, {2}));
    CHECK_THROWS(DiscreteSample(0, {2}, {}));
    CHECK_THROWS(DiscreteSample(1, {}, {}));
    const DiscreteSample a(2, {2, 3}, {0, 2, 1, 1});
    const DiscreteSample b(2, {4}, {3, 0});
    const auto ab = DiscreteSample::hconcat(a, b);
    CHECK(ab.dims() == 3);
    CHECK(ab.at(0, 2) == 3);
    CHECK(ab.alphabet_size(2) == 4);
    CHECK(a.slice_columns(1, 1).column(0) == std::vector<int>{2, 1});
    CHECK(a.slice_rows(1, 1).at(0, 0) == 1);
}

TEST_CASE("plug-in examples") {
    CHECK(plugin_entropy(EmpiricalDistribution::from_counts({2, 2})) == doctest::Approx(std::log(2.0)));
    CHECK(plugin_entropy(EmpiricalDistribution::from_counts({4})) == 0.0);
    const double expect = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    CHECK(plugin_entropy(EmpiricalDistribution::from_counts({3, 1})) == doctest::Approx(expect));
    CHECK(expect == doctest::Approx(0.5623).epsilon(1e-4));
}

TEST_CASE("Miller-Madow examples") {
    CHECK(miller_madow_entropy(EmpiricalDistribution::from_counts({3, 1})) ==
          doctest::Approx(-(0.75 * std::log(0.75) + 0.25 * std::log(0.25)) + 0.125));
    CHECK(miller_madow_entropy(EmpiricalDistribution::from_counts({3, 1})) == doctest::Approx(0.6873).epsilon(1e-4));
    CHECK(miller_madow_entropy(EmpiricalDistribution::from_counts({4})) == 0.0);
    CHECK(miller_madow_entropy(EmpiricalDistribution::from_counts({1, 1})) ==
          doctest::Approx(std::log(2.0) + 0.25));
}

TEST_CASE("Chao-Shen examples") {
    CHECK(std::abs(chao_shen_entropy(EmpiricalDistribution::from_counts({500, 500})) - std::log(2.0)) <= 1e-3);
    CHECK(chao_shen_entropy(EmpiricalDistribution::from_counts({3, 1})) ==
          doctest::Approx(chao_shen_reference({3, 1})).epsilon(1e-12));
    const double guarded = chao_shen_entropy(EmpiricalDistribution::from_counts({1, 1}));
    CHECK(std::isfinite(guarded));
    CHECK(guarded == doctest::Approx(chao_shen_reference({1, 1})).epsilon(1e-12));
    CHECK(chao_shen_entropy(EmpiricalDistribution::from_counts({1})) == 0.0);
}

TEST_CASE("marginal_h1 examples") {
    const std::vector<int> constant(50, 1);
    CHECK(marginal_h1(constant) == 0.0);

    std::mt19937_64 rng(17);
    std::vector<int> balanced(10000);
    for (int& v : balanced) v = static_cast<int>(rng() % 2);
    CHECK(std::abs(marginal_h1(balanced) - std::log(2.0)) <= 0.01);

    const std::vector<int> three_one{0, 0, 0, 1};
    CHECK(marginal_h1(three_one) == doctest::Approx(0.6873).epsilon(1e-4));
    CHECK_THROWS(marginal_h1(std::vector<int>{}));
}

TEST_CASE("baseline estimator properties on random count vectors") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> counts(1 + rng() % 30);
        for (auto& c : counts) c = rng() % 7;
        counts[0] += 1;
        const auto dist = EmpiricalDistribution::from_counts(counts);
        const double plug = plugin_entropy(dist);
        const double mm = miller_madow_entropy(dist);
        const double cs = chao_shen_entropy(dist);
        CHECK(plug >= 0.0);
        CHECK(mm >= 0.0);
        CHECK(cs >= 0.0);
        CHECK(mm >= plug);
        CHECK(plug <= std::log(static_cast<double>(dist.support_size)) + 1e-12);

        auto shuffled = counts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto relabeled = EmpiricalDistribution::from_counts(shuffled);
        CHECK(plugin_entropy(relabeled) == doctest::Approx(plug).epsilon(1e-12));
        CHECK(miller_madow_entropy(relabeled) == doctest::Approx(mm).epsilon(1e-12));
        CHECK(chao_shen_entropy(relabeled) == doctest::Approx(cs).epsilon(1e-12));
    }
}

TEST_CASE("joint rows distribution") {
    const DiscreteSample s(4, {2, 2}, {0, 1, 0, 1, 1, 0, 1, 1});
    const auto dist = EmpiricalDistribution::from_rows(s);
    CHECK(dist.total == 4);
    CHECK(dist.support_size == 3);
}
