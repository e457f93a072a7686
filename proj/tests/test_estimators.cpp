#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "njee/estimators.hpp"
#include "njee/synth.hpp"

using namespace njee;

namespace {

TrainConfig quick_config(std::uint64_t seed, std::size_t epochs = 40) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.max_epochs = epochs;
    cfg.patience = 5;
    return cfg;
}

DiscreteSample uniform_bits(std::size_t n, std::size_t k, std::uint64_t seed) {
    DistributionSpec spec;
    spec.alphabet_size = k;
    const auto draw = sample_univariate(spec, n, seed);
    return decompose(draw.symbols, k, 2);
}

// Fixed 4x4 joint used by several cases.
JointTable four_by_four() {
    return JointTable({4, 4}, {0.10, 0.02, 0.03, 0.05,  //
                               0.01, 0.12, 0.04, 0.03,  //
                               0.02, 0.05, 0.15, 0.03,  //
                               0.06, 0.04, 0.05, 0.20});
}

// Binary Y -> Z -> X chain, axes (x, y, z).
JointTable markov_chain() {
    const double py[2] = {0.4, 0.6};
    const double pz_y[2][2] = {{0.8, 0.2}, {0.3, 0.7}};
    const double px_z[2][2] = {{0.9, 0.1}, {0.25, 0.75}};
    std::vector<double> p(8);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) p[static_cast<std::size_t>(x * 4 + y * 2 + z)] = py[y] * pz_y[y][z] * px_z[z][x];
    return JointTable({2, 2, 2}, std::move(p));
}

// Y -> X <- Z collider, axes (x, y, z).
JointTable collider() {
    const double px1[2][2] = {{0.1, 0.6}, {0.7, 0.95}};
    std::vector<double> p(8);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) {
                const double q = px1[y][z];
                p[static_cast<std::size_t>(x * 4 + y * 2 + z)] = 0.25 * (x == 1 ? q : 1.0 - q);
            }
    return JointTable({2, 2, 2}, std::move(p));
}

}  // namespace

TEST_CASE("njee on a constant vector is near zero") {
    const DiscreteSample s(500, {2, 2, 2}, std::vector<int>(1500, 1));
    const auto est = njee::njee(s, quick_config(1));
    CHECK(est.value_nats <= 0.05);
    CHECK(est.value_nats >= 0.0);
}

TEST_CASE("njee on 16 uniform symbols is within 0.1 of ln 16") {
    const auto est = njee::njee(uniform_bits(10000, 16, 3), quick_config(3));
    CHECK(std::abs(est.value_nats - std::log(16.0)) <= 0.1);
    CHECK(est.classifiers_trained == 3);
    CHECK(est.component_terms.size() == 4);
}

TEST_CASE("njee on Zipf alpha 2 over 100 symbols matches the direct-sum oracle") {
    DistributionSpec spec;
    spec.kind = DistributionKind::zipf;
    spec.alpha = 2.0;
    spec.alphabet_size = 100;
    const auto draw = sample_univariate(spec, 10000, 5);
    const auto est = njee::njee(decompose(draw.symbols, 100, 2), quick_config(5, 60));
    CHECK(std::abs(est.value_nats - draw.exact_entropy) <= 0.1);
}

TEST_CASE("cnjee examples") {
    SUBCASE("copy") {
        const auto x = uniform_bits(4000, 4, 7);
        const auto est = cnjee(x, x, quick_config(7));
        CHECK(est.value_nats <= 0.05);
        CHECK(est.classifiers_trained == 2);
        CHECK(est.component_terms.size() == 2);
    }
    SUBCASE("independent") {
        const auto x = uniform_bits(10000, 4, 8);
        const auto y = uniform_bits(10000, 4, 9);
        CHECK(std::abs(cnjee(x, y, quick_config(8)).value_nats - std::log(4.0)) <= 0.1);
    }
    SUBCASE("4x4 joint table") {
        const auto table = four_by_four();
        const auto s = table.sample(100000, 11);
        const auto x = decompose(s.column(0), 4, 2);
        const auto y = s.slice_columns(1, 1);
        const std::size_t ax[] = {0}, ay[] = {1};
        const double truth = oracle_conditional_entropy(table, ax, ay);
        CHECK(std::abs(cnjee(x, y, quick_config(11, 30)).value_nats - truth) <= 0.1);
    }
    SUBCASE("row mismatch") {
        CHECK_THROWS(cnjee(uniform_bits(10, 4, 1), uniform_bits(11, 4, 1), quick_config(1)));
    }
}

TEST_CASE("mi examples") {
    SUBCASE("independent") {
        const auto x = uniform_bits(10000, 4, 21);
        const auto y = uniform_bits(10000, 4, 22);
        const auto est = mi(x, y, quick_config(21));
        CHECK(std::abs(est.value_nats) <= 0.1);
        CHECK(est.clamped() >= 0.0);
    }
    SUBCASE("y equals x") {
        const auto x = uniform_bits(10000, 4, 23);
        CHECK(std::abs(mi(x, x, quick_config(23)).value_nats - std::log(4.0)) <= 0.15);
    }
}

TEST_CASE("cmi with a constant z tracks mi") {
    const auto x = uniform_bits(5000, 4, 31);
    auto noisy = x.column(0);
    std::mt19937_64 rng(31);
    for (int& v : noisy)
        if (rng() % 4 == 0) v = 1 - v;
    const auto y = DiscreteSample::from_columns({noisy}, {2});
    const DiscreteSample z(5000, {2}, std::vector<int>(5000, 0));
    const auto cfg = quick_config(31);
    CHECK(std::abs(cmi(x, y, z, cfg).value_nats - mi(x, y, cfg).value_nats) <= 0.1);
}

TEST_CASE("cmi on a Markov chain is near zero") {
    const auto table = markov_chain();
    const std::size_t ax[] = {0}, ay[] = {1}, az[] = {2};
    CHECK(oracle_cmi(table, ax, ay, az) == doctest::Approx(0.0).epsilon(1e-12));
    const auto s = table.sample(100000, 41);
    const auto est = cmi(s.slice_columns(0, 1), s.slice_columns(1, 1), s.slice_columns(2, 1), quick_config(41, 20));
    CHECK(std::abs(est.value_nats) <= 0.1);
}

TEST_CASE("cmi on a collider matches the table") {
    const auto table = collider();
    const std::size_t ax[] = {0}, ay[] = {1}, az[] = {2};
    const double truth = oracle_cmi(table, ax, ay, az);
    REQUIRE(truth > 0.05);
    const auto s = table.sample(100000, 43);
    const auto est = cmi(s.slice_columns(0, 1), s.slice_columns(1, 1), s.slice_columns(2, 1), quick_config(43, 20));
    CHECK(std::abs(est.value_nats - truth) <= 0.1);
}

TEST_CASE("estimate equals the sum of its stored terms and term counts follow d") {
    const auto x = uniform_bits(2000, 8, 51);
    const auto y = uniform_bits(2000, 4, 52);
    const auto cfg = quick_config(51, 10);
    const auto h = njee::njee(x, cfg);
    const auto hc = cnjee(x, y, cfg);
    CHECK(h.value_nats == std::accumulate(h.component_terms.begin(), h.component_terms.end(), 0.0));
    CHECK(hc.value_nats == std::accumulate(hc.component_terms.begin(), hc.component_terms.end(), 0.0));
    CHECK(h.classifiers_trained == x.dims() - 1);
    CHECK(hc.classifiers_trained == x.dims());
}

TEST_CASE("estimates are deterministic and independent of the job count") {
    const auto x = uniform_bits(1500, 8, 61);
    const auto y = uniform_bits(1500, 4, 62);
    const auto cfg = quick_config(61, 8);
    const auto a = mi(x, y, cfg, 1);
    const auto b = mi(x, y, cfg, 3);
    CHECK(a.value_nats == b.value_nats);
    CHECK(a.h_x.component_terms == b.h_x.component_terms);
}

TEST_CASE("conditioning on a noisy copy lowers the estimate") {
    const auto x = uniform_bits(5000, 4, 71);
    auto noisy = x.column(1);
    std::mt19937_64 rng(71);
    for (int& v : noisy)
        if (rng() % 5 == 0) v = 1 - v;
    const auto y = DiscreteSample::from_columns({noisy}, {2});
    const auto cfg = quick_config(71);
    CHECK(cnjee(x, y, cfg).value_nats < njee::njee(x, cfg).value_nats);
}

TEST_CASE("trained chain-term CE does not undercut the true conditional entropy") {
    const auto table = four_by_four();
    const auto s = table.sample(100000, 81);
    const auto x = decompose(s.column(0), 4, 2);
    const auto y = s.slice_columns(1, 1);
    const auto est = cnjee(x, y, quick_config(81, 30));
    // Term 0: high bit of X given Y. Term 1: low bit given Y and the high bit.
    std::vector<double> bits(16);
    for (std::size_t xv = 0; xv < 4; ++xv)
        for (std::size_t yv = 0; yv < 4; ++yv) {
            const std::size_t idx[] = {xv, yv};
            bits[(xv >> 1) * 8 + (xv & 1) * 4 + yv] = table.at(idx);
        }
    const JointTable split({2, 2, 4}, bits);
    const std::size_t hi[] = {0}, lo[] = {1}, cy[] = {2}, cy_hi[] = {2, 0};
    CHECK(est.component_terms[0] >= oracle_conditional_entropy(split, hi, cy) - 0.05);
    CHECK(est.component_terms[1] >= oracle_conditional_entropy(split, lo, cy_hi) - 0.05);
}

TEST_CASE("error on 16 uniform symbols does not grow with n") {
    const auto cfg = quick_config(91, 60);
    const double small = std::abs(njee::njee(uniform_bits(100, 16, 91), cfg).value_nats - std::log(16.0));
    const double large = std::abs(njee::njee(uniform_bits(10000, 16, 92), cfg).value_nats - std::log(16.0));
    CHECK(large <= 0.1);
    CHECK(large <= small + 0.02);
}

TEST_CASE("streaming MI on independent pairs stays near zero") {
    GaussianPairSpec spec;
    spec.dim = 3;
    spec.rho = 0.0;
    const auto draw = sample_gaussian_pair(spec, 64 * 600, 101);
    const auto trace = mi_streaming(draw.x, draw.y, 64, 200, quick_config(101));
    CHECK(trace.per_batch.size() == 600);
    CHECK(trace.rolling.size() == 600);
    CHECK(std::abs(trace.estimate) <= 0.1);
}

TEST_CASE("streaming staircase carries classifiers across levels") {
    GaussianPairSpec spec;
    spec.dim = 2;
    std::vector<GaussianPairDraw> draws;
    for (double rho : {0.0, 0.9}) {
        spec.rho = rho;
        draws.push_back(sample_gaussian_pair(spec, 64 * 500, 111));
    }
    const StreamingSegment segs[] = {{&draws[0].x, &draws[0].y}, {&draws[1].x, &draws[1].y}};
    const auto traces = mi_streaming_staircase(segs, 64, 100, quick_config(111));
    REQUIRE(traces.size() == 2);
    CHECK(std::abs(traces[0].estimate) <= 0.1);
    const double truth = 2.0 * quantized_gaussian_pair_mi(0.9, 8);
    CHECK(traces[1].estimate > traces[0].estimate + 0.5);
    CHECK(traces[1].estimate <= truth + 0.1);
}
