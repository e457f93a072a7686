#pragma once

// Synthetic generators for every experiment and exact oracles over small
// joint probability tables.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "njee/discrete.hpp"
#include "njee/nn.hpp"

namespace njee {

enum class DistributionKind { uniform, zipf, geometric, zipf_geometric_mixture, discrete_laplace };

DistributionKind parse_distribution_kind(std::string_view name);
std::string_view to_string(DistributionKind kind);

struct DistributionSpec {
    DistributionKind kind = DistributionKind::uniform;
    std::size_t alphabet_size = 2;  // ignored by discrete_laplace, whose support follows from sigma
    double alpha = 1.0;             // zipf exponent
    double p = 0.5;                 // geometric success probability
    double sigma = 1.0;             // discrete Laplace scale

    // Normalized mass function over symbols 0..size-1. Throws on invalid parameters.
    std::vector<double> probabilities() const;
};

// -sum p ln p by direct summation.
double exact_entropy(std::span<const double> probabilities);

struct UnivariateDraw {
    std::vector<int> symbols;
    std::size_t alphabet_size = 0;
    double exact_entropy = 0.0;
};

// i.i.d. draws by inverse CDF over the normalized mass function.
UnivariateDraw sample_univariate(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

struct GaussianPairSpec {
    std::size_t dim = 20;
    double rho = 0.0;
    std::size_t bins_per_dim = 8;
    bool cubic = false;  // quantize z = (W y)^3 in place of y
    std::optional<std::uint64_t> mixing_seed;  // W seed; derived from the draw seed when unset

    // rho with -dim/2 ln(1 - rho^2) = mi.
    static double rho_for_mi(double mi, std::size_t dim);
    double true_mi() const;
    void validate() const;
};

// bins-1 interior cut points of the standard normal at probabilities j/bins.
std::vector<double> equiprobable_edges(std::size_t bins);

// Index of the bin containing `value` given ascending interior edges.
int quantize(double value, std::span<const double> edges);

struct GaussianPairDraw {
    DiscreteSample x;
    DiscreteSample y;
    double true_mi = 0.0;
};

GaussianPairDraw sample_gaussian_pair(const GaussianPairSpec& spec, std::size_t n, std::uint64_t seed);

// d x d standard-normal matrix, redrawn until |det| > 1e-9 (at most 100 tries).
Eigen::MatrixXd draw_invertible_mixing(std::size_t dim, std::uint64_t seed);

// Row-wise z = (W y)^3 where rows of y are observations.
Eigen::MatrixXd cubic_transform(const Eigen::MatrixXd& y, const Eigen::MatrixXd& mixing);
Eigen::MatrixXd cubic_transform(const Eigen::MatrixXd& y, std::uint64_t seed);

// MI of one (X_i, Y_i) pair after equiprobable quantization of both
// coordinates, by quadrature over the bivariate normal cells.
double quantized_gaussian_pair_mi(double rho, std::size_t bins);

// Full joint probability array over small discrete spaces, row-major in axis order.
class JointTable {
public:
    JointTable(std::vector<std::size_t> shape, std::vector<double> probabilities);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t axes() const { return shape_.size(); }
    std::size_t cells() const { return probs_.size(); }
    std::span<const double> probabilities() const { return probs_; }
    double at(std::span<const std::size_t> index) const;

    // Marginal over the listed axes, row-major in the listed order.
    std::vector<double> marginal(std::span<const std::size_t> keep) const;

    // n rows, one column per axis.
    DiscreteSample sample(std::size_t n, std::uint64_t seed) const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> probs_;
};

double oracle_entropy(const JointTable& table, std::span<const std::size_t> axes);
double oracle_conditional_entropy(const JointTable& table, std::span<const std::size_t> target_axes,
                                  std::span<const std::size_t> given_axes);
double oracle_mi(const JointTable& table, std::span<const std::size_t> x_axes, std::span<const std::size_t> y_axes);
double oracle_cmi(const JointTable& table, std::span<const std::size_t> x_axes, std::span<const std::size_t> y_axes,
                  std::span<const std::size_t> z_axes);

// Stationary joint of (X_t, Y_t, Y_{t+1}) for the coupled process below.
JointTable coupled_markov_table(double coupling, std::size_t alphabet = 2);

struct CoupledSeries {
    std::vector<int> x;
    std::vector<int> y;
    double true_te = 0.0;
};

// X i.i.d. uniform; Y_{t+1} = X_t with probability `coupling`, otherwise a
// fresh uniform draw. true_te = I(X_t; Y_{t+1} | Y_t) from the exact table.
CoupledSeries coupled_markov(std::size_t n, double coupling, std::uint64_t seed, std::size_t alphabet = 2);

// Binary Y -> Z -> X chain over axes (x, y, z); X and Y are independent given Z.
JointTable markov_chain_fixture();

// Binary Y -> X <- Z collider over axes (x, y, z).
JointTable collider_fixture();

// One labeled conditional-independence case over axes (x, y, z).
struct CitTriplet {
    JointTable table;
    int label = 0;          // 1: X and Y dependent given Z
    std::string structure;  // chain, fork, collider, direct
    double true_cmi = 0.0;
};

// `dependent` cases with I(X;Y|Z) >= 0.03 nats and `independent` cases built
// as p(z) p(x|z) p(y|z), alphabets drawn from {2, 3}.
std::vector<CitTriplet> cit_corpus(std::size_t dependent, std::size_t independent, std::uint64_t seed);

}  // namespace njee
