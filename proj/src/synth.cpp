#include "njee/synth.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "njee/random.hpp"

namespace njee {

DistributionKind parse_distribution_kind(std::string_view name) {
    if (name == "uniform") return DistributionKind::uniform;
    if (name == "zipf") return DistributionKind::zipf;
    if (name == "geometric") return DistributionKind::geometric;
    if (name == "mixture" || name == "zipf_geometric_mixture") return DistributionKind::zipf_geometric_mixture;
    if (name == "laplace" || name == "discrete_laplace") return DistributionKind::discrete_laplace;
    throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
}

std::string_view to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::uniform: return "uniform";
        case DistributionKind::zipf: return "zipf";
        case DistributionKind::geometric: return "geometric";
        case DistributionKind::zipf_geometric_mixture: return "mixture";
        case DistributionKind::discrete_laplace: return "laplace";
    }
    return "unknown";
}

namespace {

void normalize(std::vector<double>& w) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= total;
}

std::vector<double> zipf_mass(std::size_t k, double alpha) {
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = std::pow(static_cast<double>(i + 1), -alpha);
    normalize(w);
    return w;
}

// Geometric on {0, 1, ...} truncated to k symbols: P(i) proportional to (1-p)^i.
std::vector<double> geometric_mass(std::size_t k, double p) {
    std::vector<double> w(k);
    const double log_q = std::log1p(-p);
    for (std::size_t i = 0; i < k; ++i) w[i] = std::exp(static_cast<double>(i) * log_q);
    normalize(w);
    return w;
}

// Two-sided p(x) proportional to exp(-|x| / sigma) on integers, truncated at the
// smallest K with total tail mass beyond |x| > K below 1e-12. Symbol = x + K.
std::vector<double> laplace_mass(double sigma) {
    const double r = std::exp(-1.0 / sigma);
    std::size_t half_width = 0;
    if (r > 0.0) {
        const double bound = std::log(1e-12 * (1.0 + r) / 2.0) / std::log(r);
        half_width = static_cast<std::size_t>(std::max(0.0, std::ceil(bound - 1.0)));
        if (half_width > (std::size_t{1} << 24)) throw std::invalid_argument("discrete Laplace sigma too large");
    }
    std::vector<double> w(2 * half_width + 1);
    for (std::size_t s = 0; s < w.size(); ++s) {
        const double x = std::abs(static_cast<double>(s) - static_cast<double>(half_width));
        w[s] = std::exp(-x / sigma);
    }
    normalize(w);
    return w;
}

}  // namespace

std::vector<double> DistributionSpec::probabilities() const {
    if (kind != DistributionKind::discrete_laplace && alphabet_size == 0) {
        throw std::invalid_argument("alphabet size must be positive");
    }
    switch (kind) {
        case DistributionKind::uniform:
            return std::vector<double>(alphabet_size, 1.0 / static_cast<double>(alphabet_size));
        case DistributionKind::zipf:
            if (!(alpha > 0.0)) throw std::invalid_argument("zipf alpha must be positive");
            return zipf_mass(alphabet_size, alpha);
        case DistributionKind::geometric:
            if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric p must lie in (0,1)");
            return geometric_mass(alphabet_size, p);
        case DistributionKind::zipf_geometric_mixture: {
            if (!(alpha > 0.0)) throw std::invalid_argument("zipf alpha must be positive");
            if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric p must lie in (0,1)");
            auto z = zipf_mass(alphabet_size, alpha);
            const auto g = geometric_mass(alphabet_size, p);
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = 0.5 * z[i] + 0.5 * g[i];
            return z;
        }
        case DistributionKind::discrete_laplace:
            if (!(sigma > 0.0)) throw std::invalid_argument("discrete Laplace sigma must be positive");
            return laplace_mass(sigma);
    }
    throw std::invalid_argument("unknown distribution kind");
}

double exact_entropy(std::span<const double> probabilities) {
    double h = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

namespace {

std::vector<double> cumulative(std::span<const double> probs) {
    std::vector<double> cdf(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cdf.begin());
    return cdf;
}

std::size_t draw_index(const std::vector<double>& cdf, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, cdf.back());
    const double u = unit(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

UnivariateDraw sample_univariate(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    const auto probs = spec.probabilities();
    const auto cdf = cumulative(probs);
    Rng rng(derive_seed(seed, 0x5A3B1E));
    UnivariateDraw draw;
    draw.alphabet_size = probs.size();
    draw.exact_entropy = exact_entropy(probs);
    draw.symbols.resize(n);
    for (auto& s : draw.symbols) s = static_cast<int>(draw_index(cdf, rng));
    return draw;
}

// ---------------------------------------------------------------------------
// Gaussian pairs

double GaussianPairSpec::rho_for_mi(double mi, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    if (mi < 0.0) throw std::invalid_argument("mutual information must be nonnegative");
    return std::sqrt(-std::expm1(-2.0 * mi / static_cast<double>(dim)));
}

double GaussianPairSpec::true_mi() const {
    return -0.5 * static_cast<double>(dim) * std::log1p(-rho * rho);
}

void GaussianPairSpec::validate() const {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("|rho| must be below 1");
    if (bins_per_dim < 2) throw std::invalid_argument("bins_per_dim must be at least 2");
}

std::vector<double> equiprobable_edges(std::size_t bins) {
    if (bins < 2) throw std::invalid_argument("at least 2 bins required");
    const boost::math::normal_distribution<double> standard;
    std::vector<double> edges(bins - 1);
    for (std::size_t j = 1; j < bins; ++j) {
        edges[j - 1] = boost::math::quantile(standard, static_cast<double>(j) / static_cast<double>(bins));
    }
    return edges;
}

int quantize(double value, std::span<const double> edges) {
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

Eigen::MatrixXd draw_invertible_mixing(std::size_t dim, std::uint64_t seed) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng(derive_seed(seed, 0xC0B1C000ULL + static_cast<std::uint64_t>(attempt)));
        Eigen::MatrixXd w(dim, dim);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
        }
        if (std::abs(w.partialPivLu().determinant()) > 1e-9) return w;
    }
    throw std::runtime_error("could not draw an invertible mixing matrix in 100 attempts");
}

Eigen::MatrixXd cubic_transform(const Eigen::MatrixXd& y, const Eigen::MatrixXd& mixing) {
    if (y.cols() != mixing.cols()) throw ShapeError("cubic_transform: dimension mismatch");
    Eigen::MatrixXd z = y * mixing.transpose();
    return z.array().cube().matrix();
}

Eigen::MatrixXd cubic_transform(const Eigen::MatrixXd& y, std::uint64_t seed) {
    return cubic_transform(y, draw_invertible_mixing(static_cast<std::size_t>(y.cols()), seed));
}

GaussianPairDraw sample_gaussian_pair(const GaussianPairSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    const std::size_t d = spec.dim;
    const double noise = std::sqrt(1.0 - spec.rho * spec.rho);
    Rng rng(derive_seed(seed, 0x6A055));
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd xs(n, d);
    Eigen::MatrixXd ys(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double a = normal(rng);
            const double b = normal(rng);
            xs(i, j) = a;
            ys(i, j) = spec.rho * a + noise * b;
        }
    }

    const auto edges = equiprobable_edges(spec.bins_per_dim);
    std::vector<std::vector<double>> y_edges(d, edges);
    if (spec.cubic) {
        const Eigen::MatrixXd w = draw_invertible_mixing(d, spec.mixing_seed.value_or(derive_seed(seed, 0xCB)));
        ys = cubic_transform(ys, w);
        // (W y)_j ~ N(0, |w_j|^2) and cubing is monotone, so equiprobable cut
        // points are the cubed standard-normal cut points scaled by |w_j|.
        for (std::size_t j = 0; j < d; ++j) {
            const double scale = w.row(static_cast<Eigen::Index>(j)).norm();
            for (double& e : y_edges[j]) e = std::pow(scale * e, 3.0);
        }
    }

    std::vector<int> xd(n * d);
    std::vector<int> yd(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            xd[i * d + j] = quantize(xs(i, j), edges);
            yd[i * d + j] = quantize(ys(i, j), y_edges[j]);
        }
    }
    std::vector<std::size_t> alphabets(d, spec.bins_per_dim);
    return GaussianPairDraw{DiscreteSample(n, alphabets, std::move(xd)), DiscreteSample(n, alphabets, std::move(yd)),
                            spec.true_mi()};
}

double quantized_gaussian_pair_mi(double rho, std::size_t bins) {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("|rho| must be below 1");
    const boost::math::normal_distribution<double> standard;
    auto edges = equiprobable_edges(bins);
    constexpr double kFar = 12.0;
    edges.insert(edges.begin(), -kFar);
    edges.push_back(kFar);
    const double s = std::sqrt(1.0 - rho * rho);
    const double marginal = 1.0 / static_cast<double>(bins);

    double mi = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        for (std::size_t j = 0; j < bins; ++j) {
            const double lo = edges[j];
            const double hi = edges[j + 1];
            auto integrand = [&](double x) {
                const double upper = j + 1 == bins ? 1.0 : boost::math::cdf(standard, (hi - rho * x) / s);
                const double lower = j == 0 ? 0.0 : boost::math::cdf(standard, (lo - rho * x) / s);
                return boost::math::pdf(standard, x) * (upper - lower);
            };
            const double cell =
                boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, edges[i], edges[i + 1], 12, 1e-13);
            if (cell > 0.0) mi += cell * std::log(cell / (marginal * marginal));
        }
    }
    return mi;
}

// ---------------------------------------------------------------------------
// Joint tables

JointTable::JointTable(std::vector<std::size_t> shape, std::vector<double> probabilities)
    : shape_(std::move(shape)), probs_(std::move(probabilities)) {
    if (shape_.empty()) throw std::invalid_argument("a joint table needs at least one axis");
    std::size_t cells = 1;
    for (std::size_t s : shape_) {
        if (s == 0) throw std::invalid_argument("axis sizes must be positive");
        cells *= s;
        if (cells > (std::size_t{1} << 20)) throw std::invalid_argument("joint table exceeds 2^20 cells");
    }
    if (probs_.size() != cells) throw std::invalid_argument("probability count does not match table shape");
    double total = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0)) throw std::invalid_argument("joint probabilities must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("joint probabilities must sum to 1");
}

double JointTable::at(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw std::invalid_argument("index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) flat = flat * shape_[a] + index[a];
    return probs_[flat];
}

std::vector<double> JointTable::marginal(std::span<const std::size_t> keep) const {
    std::size_t out_cells = 1;
    for (std::size_t a : keep) {
        if (a >= shape_.size()) throw std::out_of_range("axis index out of range");
        out_cells *= shape_[a];
    }
    std::vector<double> out(out_cells, 0.0);
    std::vector<std::size_t> index(shape_.size(), 0);
    for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t a = shape_.size(); a-- > 0;) {
            index[a] = rest % shape_[a];
            rest /= shape_[a];
        }
        std::size_t target = 0;
        for (std::size_t a : keep) target = target * shape_[a] + index[a];
        out[target] += probs_[flat];
    }
    return out;
}

DiscreteSample JointTable::sample(std::size_t n, std::uint64_t seed) const {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    const auto cdf = cumulative(probs_);
    Rng rng(derive_seed(seed, 0x7AB1E));
    const std::size_t d = shape_.size();
    std::vector<int> data(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rest = draw_index(cdf, rng);
        for (std::size_t a = d; a-- > 0;) {
            data[i * d + a] = static_cast<int>(rest % shape_[a]);
            rest /= shape_[a];
        }
    }
    return DiscreteSample(n, shape_, std::move(data));
}

namespace {

void require_disjoint(std::initializer_list<std::span<const std::size_t>> groups) {
    std::set<std::size_t> seen;
    for (const auto& g : groups) {
        for (std::size_t a : g) {
            if (!seen.insert(a).second) throw std::invalid_argument("oracle axis groups overlap");
        }
    }
}

std::vector<std::size_t> join(std::initializer_list<std::span<const std::size_t>> groups) {
    std::vector<std::size_t> out;
    for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
}

}  // namespace

double oracle_entropy(const JointTable& table, std::span<const std::size_t> axes) {
    if (axes.empty()) return 0.0;
    require_disjoint({axes});
    return exact_entropy(table.marginal(axes));
}

double oracle_conditional_entropy(const JointTable& table, std::span<const std::size_t> target_axes,
                                  std::span<const std::size_t> given_axes) {
    require_disjoint({target_axes, given_axes});
    return oracle_entropy(table, join({target_axes, given_axes})) - oracle_entropy(table, given_axes);
}

double oracle_mi(const JointTable& table, std::span<const std::size_t> x_axes, std::span<const std::size_t> y_axes) {
    require_disjoint({x_axes, y_axes});
    const double value =
        oracle_entropy(table, x_axes) + oracle_entropy(table, y_axes) - oracle_entropy(table, join({x_axes, y_axes}));
    return std::max(value, 0.0);
}

double oracle_cmi(const JointTable& table, std::span<const std::size_t> x_axes, std::span<const std::size_t> y_axes,
                  std::span<const std::size_t> z_axes) {
    require_disjoint({x_axes, y_axes, z_axes});
    const double value = oracle_entropy(table, join({x_axes, z_axes})) + oracle_entropy(table, join({y_axes, z_axes})) -
                         oracle_entropy(table, join({x_axes, y_axes, z_axes})) - oracle_entropy(table, z_axes);
    return std::max(value, 0.0);
}

JointTable coupled_markov_table(double coupling, std::size_t alphabet) {
    if (!(coupling >= 0.0 && coupling <= 1.0)) throw std::invalid_argument("coupling must lie in [0,1]");
    if (alphabet < 2) throw std::invalid_argument("alphabet must have at least 2 symbols");
    const double a = static_cast<double>(alphabet);
    std::vector<double> probs(alphabet * alphabet * alphabet);
    for (std::size_t x = 0; x < alphabet; ++x) {
        for (std::size_t y = 0; y < alphabet; ++y) {
            for (std::size_t next = 0; next < alphabet; ++next) {
                const double transition = coupling * (next == x ? 1.0 : 0.0) + (1.0 - coupling) / a;
                probs[(x * alphabet + y) * alphabet + next] = transition / (a * a);
            }
        }
    }
    // Renormalize away the rounding of 1/a^3 sums.
    normalize(probs);
    return JointTable({alphabet, alphabet, alphabet}, std::move(probs));
}

CoupledSeries coupled_markov(std::size_t n, double coupling, std::uint64_t seed, std::size_t alphabet) {
    const JointTable table = coupled_markov_table(coupling, alphabet);
    Rng rng(derive_seed(seed, 0x3A4C0));
    std::uniform_int_distribution<int> symbol(0, static_cast<int>(alphabet) - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CoupledSeries s;
    s.x.resize(n);
    s.y.resize(n);
    for (std::size_t t = 0; t < n; ++t) s.x[t] = symbol(rng);
    if (n > 0) s.y[0] = symbol(rng);
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const bool copy = unit(rng) < coupling;
        const int fresh = symbol(rng);
        s.y[t + 1] = copy ? s.x[t] : fresh;
    }
    const std::size_t x_axis[] = {0};
    const std::size_t next_axis[] = {2};
    const std::size_t past_axis[] = {1};
    s.true_te = oracle_cmi(table, x_axis, next_axis, past_axis);
    return s;
}

JointTable markov_chain_fixture() {
    const double py[2] = {0.4, 0.6};
    const double pz_y[2][2] = {{0.8, 0.2}, {0.3, 0.7}};
    const double px_z[2][2] = {{0.9, 0.1}, {0.25, 0.75}};
    std::vector<double> p(8);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y)
            for (std::size_t z = 0; z < 2; ++z) p[x * 4 + y * 2 + z] = py[y] * pz_y[y][z] * px_z[z][x];
    return JointTable({2, 2, 2}, std::move(p));
}

JointTable collider_fixture() {
    const double px1[2][2] = {{0.1, 0.6}, {0.7, 0.95}};
    std::vector<double> p(8);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y)
            for (std::size_t z = 0; z < 2; ++z) {
                const double q = px1[y][z];
                p[x * 4 + y * 2 + z] = 0.25 * (x == 1 ? q : 1.0 - q);
            }
    return JointTable({2, 2, 2}, std::move(p));
}

namespace {

// Random conditional mass function with entries bounded away from 0.
std::vector<double> random_pmf(std::size_t size, Rng& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> p(size);
    for (double& v : p) v = u(rng);
    normalize(p);
    return p;
}

// Cheap sharpening so dependent cases carry usable signal.
std::vector<double> sharpened_pmf(std::size_t size, Rng& rng) {
    auto p = random_pmf(size, rng);
    for (double& v : p) v = v * v * v;
    normalize(p);
    return p;
}

}  // namespace

std::vector<CitTriplet> cit_corpus(std::size_t dependent, std::size_t independent, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xC17));
    std::uniform_int_distribution<std::size_t> alphabet(2, 3);
    const std::size_t ax[] = {0}, ay[] = {1}, az[] = {2};
    std::vector<CitTriplet> corpus;
    corpus.reserve(dependent + independent);

    std::size_t made = 0;
    std::size_t tries = 0;
    while (made < dependent) {
        if (++tries > 100 * (dependent + 1)) throw std::runtime_error("cit_corpus: could not reach the CMI floor");
        const std::size_t sx = alphabet(rng), sy = alphabet(rng), sz = alphabet(rng);
        const bool collider = made % 2 == 0;
        const auto pz = random_pmf(sz, rng);
        std::vector<std::vector<double>> py(collider ? 1 : sz);
        for (auto& row : py) row = random_pmf(sy, rng);
        std::vector<std::vector<double>> px(sy * sz);
        for (auto& row : px) row = sharpened_pmf(sx, rng);
        std::vector<double> p(sx * sy * sz);
        for (std::size_t x = 0; x < sx; ++x)
            for (std::size_t y = 0; y < sy; ++y)
                for (std::size_t z = 0; z < sz; ++z) {
                    const double y_mass = collider ? py[0][y] : py[z][y];
                    p[(x * sy + y) * sz + z] = pz[z] * y_mass * px[y * sz + z][x];
                }
        JointTable table({sx, sy, sz}, std::move(p));
        const double cmi = oracle_cmi(table, ax, ay, az);
        if (cmi < 0.03) continue;
        corpus.push_back(CitTriplet{std::move(table), 1, collider ? "collider" : "direct", cmi});
        ++made;
    }

    for (std::size_t i = 0; i < independent; ++i) {
        const std::size_t sx = alphabet(rng), sy = alphabet(rng), sz = alphabet(rng);
        const auto pz = sharpened_pmf(sz, rng);
        std::vector<std::vector<double>> py(sz), px(sz);
        for (auto& row : py) row = sharpened_pmf(sy, rng);
        for (auto& row : px) row = sharpened_pmf(sx, rng);
        std::vector<double> p(sx * sy * sz);
        for (std::size_t x = 0; x < sx; ++x)
            for (std::size_t y = 0; y < sy; ++y)
                for (std::size_t z = 0; z < sz; ++z) p[(x * sy + y) * sz + z] = pz[z] * py[z][y] * px[z][x];
        JointTable table({sx, sy, sz}, std::move(p));
        const double cmi = oracle_cmi(table, ax, ay, az);
        corpus.push_back(CitTriplet{std::move(table), 0, i % 2 == 0 ? "chain" : "fork", cmi});
    }
    return corpus;
}

}  // namespace njee

