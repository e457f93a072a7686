#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "njee/synth.hpp"

using namespace njee;

namespace {

JointTable random_table(std::vector<std::size_t> shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::size_t cells = 1;
    for (std::size_t s : shape) cells *= s;
    std::vector<double> p(cells);
    for (double& v : p) v = u(rng);
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= total;
    return JointTable(std::move(shape), std::move(p));
}

double entropy_of(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

}  // namespace

TEST_CASE("univariate mass functions") {
    DistributionSpec uniform;
    uniform.alphabet_size = 16;
    CHECK(exact_entropy(uniform.probabilities()) == doctest::Approx(std::log(16.0)).epsilon(1e-14));
    CHECK(std::log(16.0) == doctest::Approx(2.7726).epsilon(1e-4));

    DistributionSpec zipf;
    zipf.kind = DistributionKind::zipf;
    zipf.alpha = 1.0;
    zipf.alphabet_size = 3;
    const auto p = zipf.probabilities();
    CHECK(p[0] == doctest::Approx(6.0 / 11.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(3.0 / 11.0).epsilon(1e-14));
    CHECK(p[2] == doctest::Approx(2.0 / 11.0).epsilon(1e-14));

    DistributionSpec geometric;
    geometric.kind = DistributionKind::geometric;
    geometric.p = 0.5;
    geometric.alphabet_size = std::size_t{1} << 20;
    CHECK(std::abs(exact_entropy(geometric.probabilities()) - 2.0 * std::log(2.0)) <= 1e-6);
}

TEST_CASE("invalid distribution parameters throw") {
    DistributionSpec spec;
    spec.kind = DistributionKind::zipf;
    spec.alpha = 0.0;
    CHECK_THROWS(spec.probabilities());
    spec.kind = DistributionKind::geometric;
    spec.p = 1.0;
    CHECK_THROWS(spec.probabilities());
    spec.kind = DistributionKind::discrete_laplace;
    spec.sigma = -1.0;
    CHECK_THROWS(spec.probabilities());
    CHECK_THROWS(parse_distribution_kind("cauchy"));
    CHECK(parse_distribution_kind("zipf") == DistributionKind::zipf);
}

TEST_CASE("every mass function is normalized and sampling converges") {
    std::vector<DistributionSpec> specs(5);
    specs[0].alphabet_size = 1000;
    specs[1].kind = DistributionKind::zipf;
    specs[1].alpha = 1.0;
    specs[1].alphabet_size = 1000;
    specs[2].kind = DistributionKind::geometric;
    specs[2].p = 0.01;
    specs[2].alphabet_size = 1000;
    specs[3].kind = DistributionKind::zipf_geometric_mixture;
    specs[3].alpha = 1.0;
    specs[3].p = 0.02;
    specs[3].alphabet_size = 1000;
    specs[4].kind = DistributionKind::discrete_laplace;
    specs[4].sigma = 15.0;
    std::uint64_t seed = 1;
    for (const auto& spec : specs) {
        CAPTURE(to_string(spec.kind));
        const auto p = spec.probabilities();
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-12);
        for (double v : p) CHECK_FALSE(v < 0.0);
        REQUIRE(p.size() <= 1000);
        const auto draw = sample_univariate(spec, 1000000, seed++);
        std::vector<double> freq(p.size(), 0.0);
        for (int s : draw.symbols) freq[static_cast<std::size_t>(s)] += 1e-6;
        CHECK(std::abs(entropy_of(freq) - draw.exact_entropy) <= 0.01);
        CHECK(draw.exact_entropy == doctest::Approx(exact_entropy(p)).epsilon(1e-14));
    }
}

TEST_CASE("Gaussian pair closed forms") {
    CHECK(GaussianPairSpec::rho_for_mi(2.0, 20) == doctest::Approx(std::sqrt(1.0 - std::exp(-0.2))).epsilon(1e-14));
    CHECK(GaussianPairSpec::rho_for_mi(2.0, 20) == doctest::Approx(0.4258).epsilon(1e-4));
    GaussianPairSpec spec;
    spec.rho = 0.9;
    CHECK(spec.true_mi() == doctest::Approx(-10.0 * std::log(0.19)).epsilon(1e-14));
    CHECK(spec.true_mi() == doctest::Approx(16.61).epsilon(1e-3));
    spec.rho = 0.0;
    CHECK(spec.true_mi() == 0.0);
    spec.rho = 1.0;
    CHECK_THROWS(spec.validate());
    spec.rho = 0.5;
    spec.bins_per_dim = 1;
    CHECK_THROWS(spec.validate());
}

TEST_CASE("quantized Gaussian coordinates are marginally uniform") {
    GaussianPairSpec spec;
    spec.dim = 4;
    spec.rho = 0.6;
    const std::size_t n = 40000;
    for (bool cubic : {false, true}) {
        spec.cubic = cubic;
        const auto draw = sample_gaussian_pair(spec, n, 12);
        const double expect = static_cast<double>(n) / 8.0;
        const double tol = 3.0 * std::sqrt(static_cast<double>(n) * (1.0 / 8.0) * (7.0 / 8.0));
        for (const DiscreteSample* s : {&draw.x, &draw.y}) {
            for (std::size_t j = 0; j < s->dims(); ++j) {
                std::vector<double> counts(8, 0.0);
                for (int v : s->column(j)) counts[static_cast<std::size_t>(v)] += 1.0;
                for (double c : counts) CHECK(std::abs(c - expect) <= tol);
            }
        }
    }
}

TEST_CASE("equiprobable edges and quantize") {
    const auto edges = equiprobable_edges(4);
    REQUIRE(edges.size() == 3);
    CHECK(edges[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(edges[2] == doctest::Approx(0.6744897501960817).epsilon(1e-12));
    CHECK(quantize(-5.0, edges) == 0);
    CHECK(quantize(0.1, edges) == 2);
    CHECK(quantize(5.0, edges) == 3);
}

TEST_CASE("cubic transform") {
    Eigen::MatrixXd y(1, 2);
    y << 2.0, -1.0;
    const Eigen::MatrixXd z = cubic_transform(y, Eigen::MatrixXd::Identity(2, 2));
    CHECK(z(0, 0) == 8.0);
    CHECK(z(0, 1) == -1.0);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd ys(50, 6);
    for (Eigen::Index i = 0; i < ys.size(); ++i) ys.data()[i] = normal(rng);
    const Eigen::MatrixXd w = draw_invertible_mixing(6, 77);
    CHECK(std::abs(w.determinant()) > 1e-9);
    const Eigen::MatrixXd zs = cubic_transform(ys, w);
    Eigen::MatrixXd roots = zs.unaryExpr([](double v) { return std::cbrt(v); });
    const Eigen::MatrixXd back = roots * w.inverse().transpose();
    CHECK((back - ys).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((cubic_transform(ys, 77) - zs).norm() == 0.0);
}

TEST_CASE("quantized MI sits below the continuous value") {
    const double rho = GaussianPairSpec::rho_for_mi(2.0, 20);
    const double q = quantized_gaussian_pair_mi(rho, 8);
    CHECK(q > 0.0);
    CHECK(q < -0.5 * std::log(1.0 - rho * rho));
    CHECK(quantized_gaussian_pair_mi(0.0, 8) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(quantized_gaussian_pair_mi(rho, 16) > q);
}

TEST_CASE("oracle examples") {
    SUBCASE("product table") {
        const std::vector<double> px{0.2, 0.3, 0.5}, py{0.6, 0.4};
        std::vector<double> p;
        for (double a : px)
            for (double b : py) p.push_back(a * b);
        const JointTable t({3, 2}, p);
        const std::size_t x[] = {0}, y[] = {1};
        CHECK(oracle_mi(t, x, y) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("perfectly correlated pair") {
        std::vector<double> p(16, 0.0);
        for (std::size_t i = 0; i < 4; ++i) p[i * 4 + i] = 0.25;
        const JointTable t({4, 4}, p);
        const std::size_t x[] = {0}, y[] = {1};
        CHECK(oracle_mi(t, x, y) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
    }
    SUBCASE("overlap") {
        const auto t = random_table({2, 2}, 1);
        const std::size_t x[] = {0}, y[] = {0};
        CHECK_THROWS(oracle_mi(t, x, y));
    }
    SUBCASE("bad tables") {
        CHECK_THROWS(JointTable({2}, {0.5, 0.6}));
        CHECK_THROWS(JointTable({2}, {1.5, -0.5}));
        CHECK_THROWS(JointTable({3}, {0.5, 0.5}));
    }
}

TEST_CASE("oracle CMI agrees with an independent two-entropy formula") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto t = random_table({4, 4, 2}, seed);
        const std::size_t x[] = {0}, y[] = {1}, z[] = {2};
        // H(Y|Z) - H(Y|X,Z) from marginals computed here.
        const std::size_t yz[] = {1, 2}, zz[] = {2}, xyz[] = {0, 1, 2}, xz[] = {0, 2};
        const double h_y_given_z = entropy_of(t.marginal(yz)) - entropy_of(t.marginal(zz));
        const double h_y_given_xz = entropy_of(t.marginal(xyz)) - entropy_of(t.marginal(xz));
        CHECK(oracle_cmi(t, x, y, z) == doctest::Approx(h_y_given_z - h_y_given_xz).epsilon(1e-10));
        CHECK(oracle_cmi(t, x, y, z) >= 0.0);
    }
}

TEST_CASE("oracle symmetry and chain consistency") {
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
        const auto t = random_table({3, 4, 2}, seed);
        const std::size_t a[] = {0}, b[] = {1}, c[] = {2}, ab[] = {0, 1}, all[] = {0, 1, 2};
        CHECK(oracle_mi(t, a, b) == doctest::Approx(oracle_mi(t, b, a)).epsilon(1e-10));
        const double chained =
            oracle_entropy(t, a) + oracle_conditional_entropy(t, b, a) + oracle_conditional_entropy(t, c, ab);
        CHECK(oracle_entropy(t, all) == doctest::Approx(chained).epsilon(1e-10));
    }
}

TEST_CASE("joint table sampling matches the table") {
    const auto t = random_table({2, 3}, 5);
    const auto s = t.sample(200000, 6);
    std::vector<double> freq(6, 0.0);
    for (std::size_t i = 0; i < s.rows(); ++i) freq[static_cast<std::size_t>(s.at(i, 0) * 3 + s.at(i, 1))] += 1.0;
    for (std::size_t c = 0; c < 6; ++c) CHECK(std::abs(freq[c] / 200000.0 - t.probabilities()[c]) <= 0.005);
}

TEST_CASE("coupled Markov oracle") {
    CHECK(coupled_markov(10, 0.0, 1).true_te == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(coupled_markov(10, 1.0, 1).true_te == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(coupled_markov(10, 1.0, 1, 3).true_te == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    // Brute force over the 8 cells for coupling 0.5: P(x, y, y') = 1/4 * P(y' | x).
    const double c = 0.5;
    std::vector<double> p(8);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int yn = 0; yn < 2; ++yn)
                p[static_cast<std::size_t>(x * 4 + y * 2 + yn)] = 0.25 * (c * (yn == x) + (1.0 - c) * 0.5);
    // TE = H(Y'|Y) - H(Y'|X,Y); Y' is independent of Y here.
    double h_cond = 0.0;
    for (double v : p) h_cond -= v * std::log(v / 0.25);
    const double expect = std::log(2.0) - h_cond;
    const auto series = coupled_markov(20000, c, 3);
    CHECK(series.true_te == doctest::Approx(expect).epsilon(1e-12));
    CHECK(series.x.size() == 20000);
    CHECK(series.y.size() == 20000);

    std::size_t agree = 0;
    for (std::size_t t = 0; t + 1 < series.x.size(); ++t) agree += series.y[t + 1] == series.x[t];
    CHECK(std::abs(static_cast<double>(agree) / 19999.0 - 0.75) <= 0.02);
    CHECK_THROWS(coupled_markov(10, 1.5, 1));
}
