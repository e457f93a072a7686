#include "doctest.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"
#include "njee/io.hpp"
#include "njee/roc.hpp"

using namespace njee;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / ("njee_harness_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const fs::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

}  // namespace

TEST_CASE("ROC examples") {
    const std::vector<double> separated{0.9, 0.8, 0.7, 0.1};
    const std::vector<int> labels{1, 1, 0, 0};
    CHECK(roc_curve(separated, labels).auc == 1.0);
    CHECK(pairwise_auc(separated, labels) == 1.0);

    const std::vector<double> swapped{0.9, 0.7, 0.8, 0.1};
    CHECK(roc_curve(swapped, labels).auc == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(pairwise_auc(swapped, labels) == doctest::Approx(0.75).epsilon(1e-15));

    const std::vector<double> tied{0.5, 0.5};
    const std::vector<int> one_each{1, 0};
    CHECK(roc_curve(tied, one_each).auc == doctest::Approx(0.5).epsilon(1e-15));

    const std::vector<int> one_class{1, 1, 1, 1};
    CHECK_THROWS_AS(roc_curve(separated, one_class), std::invalid_argument);
    CHECK_THROWS_AS(roc_curve(separated, std::vector<int>{1, 0}), std::invalid_argument);
}

TEST_CASE("AUC of randomly shuffled labels is near one half") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u;
    std::vector<double> scores(200);
    for (double& s : scores) s = u(rng);
    std::vector<int> labels(200);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i < 100 ? 1 : 0;
    std::shuffle(labels.begin(), labels.end(), rng);
    // 100 positives x 100 negatives = 10^4 pairs.
    CHECK(std::abs(roc_curve(scores, labels).auc - 0.5) <= 0.05);
}

TEST_CASE("ROC is monotone, AUC matches pair counting and is transform invariant") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> scores(60);
        std::vector<int> labels(60);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            labels[i] = static_cast<int>(rng() % 2);
            // Coarse rounding makes ties common.
            scores[i] = std::round((normal(rng) + labels[i]) * 4.0) / 4.0;
        }
        labels[0] = 0;
        labels[1] = 1;
        const auto curve = roc_curve(scores, labels);
        CHECK(curve.auc >= 0.0);
        CHECK(curve.auc <= 1.0);
        CHECK(curve.auc == doctest::Approx(pairwise_auc(scores, labels)).epsilon(1e-12));
        REQUIRE(curve.points.size() >= 2);
        CHECK(curve.points.front().false_positive_rate == 0.0);
        CHECK(curve.points.front().true_positive_rate == 0.0);
        CHECK(curve.points.back().false_positive_rate == 1.0);
        CHECK(curve.points.back().true_positive_rate == 1.0);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].false_positive_rate >= curve.points[i - 1].false_positive_rate);
            CHECK(curve.points[i].true_positive_rate >= curve.points[i - 1].true_positive_rate);
        }
        std::vector<double> transformed(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) transformed[i] = std::exp(3.0 * scores[i]) - 7.0;
        CHECK(roc_curve(transformed, labels).auc == doctest::Approx(curve.auc).epsilon(1e-12));
    }
}

TEST_CASE("integer CSV reading") {
    const auto dir = scratch_dir();
    const auto good = read_integer_csv(write_text(dir / "good.csv", "a,b\n0,3\n1,2\n2,0\n"));
    CHECK(good.header == std::vector<std::string>{"a", "b"});
    CHECK(good.rows() == 3);
    const auto sample = to_sample(good);
    CHECK(sample.alphabet_size(0) == 3);
    CHECK(sample.alphabet_size(1) == 4);
    CHECK(sample.at(1, 1) == 2);

    const auto constant = to_sample(read_integer_csv(write_text(dir / "const.csv", "c\n0\n0\n")));
    CHECK(constant.alphabet_size(0) == 2);

    CHECK_THROWS_WITH_AS(read_integer_csv(write_text(dir / "bad.csv", "a,b\n0,1\n1,x\n")), doctest::Contains(".csv:3:"),
                         DataError);
    CHECK_THROWS_WITH_AS(read_integer_csv(write_text(dir / "ragged.csv", "a,b\n0,1\n1\n")),
                         doctest::Contains(".csv:3:"), DataError);
    CHECK_THROWS_WITH_AS(read_integer_csv(write_text(dir / "neg.csv", "a\n-1\n")), doctest::Contains(".csv:2:"),
                         DataError);
    CHECK_THROWS_AS(read_integer_csv(write_text(dir / "empty.csv", "")), DataError);
    CHECK_THROWS_AS(read_integer_csv(dir / "missing.csv"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("series CSV round trip and errors") {
    const auto dir = scratch_dir();
    const SeriesFrame frame{"s", {"2021-03-01", "2021-03-02", "2021-03-04"}, {101.5, 99.25, 100.0}};
    write_series_csv(dir / "s.csv", frame);
    const auto back = read_series_csv(dir / "s.csv");
    CHECK(back.timestamps == frame.timestamps);
    CHECK(back.values == frame.values);
    CHECK_THROWS_WITH_AS(read_series_csv(write_text(dir / "bad.csv", "timestamp,value\n2021-03-01,1\n2021-03-02,abc\n")),
                         doctest::Contains(".csv:3:"), DataError);
    CHECK_THROWS_AS(read_series_csv(write_text(dir / "hdr.csv", "date,price\n2021-03-01,1\n")), DataError);
    CHECK_THROWS_AS(read_series_csv(write_text(dir / "order.csv", "timestamp,value\n2021-03-02,1\n2021-03-01,2\n")),
                    DataError);
    fs::remove_all(dir);
}

TEST_CASE("csv writer formatting") {
    CsvWriter csv({"name", "n", "value"});
    csv.row("njee", 10, 0.5);
    csv.row(std::string("plugin"), std::size_t{3}, 1.0 / 3.0);
    CHECK(csv.str() == "name,n,value\nnjee,10,0.5\nplugin,3,0.333333333333\n");
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("sha256 and manifests") {
    const auto dir = scratch_dir();
    CHECK(sha256_file(write_text(dir / "abc.txt", "abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CsvWriter csv({"x"});
    csv.row(1);
    RunManifest manifest;
    manifest.command_line = "njee entropy --n 10";
    manifest.config = {{"n", 10}};
    manifest.seed = 7;
    manifest.start_time = utc_timestamp();
    write_with_manifest(dir / "out.csv", csv, manifest);
    std::ifstream in(dir / "out.csv.manifest.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["output"]["sha256"] == sha256_file(dir / "out.csv"));
    CHECK(j["output"]["file"] == "out.csv");
    CHECK(j["seed"] == 7);
    CHECK(j["config"]["n"] == 10);
    CHECK(j["version"] == library_version());
    fs::remove_all(dir);
}
