#pragma once

// CSV ingestion/emission and run manifests.

#include "json.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "njee/discrete.hpp"
#include "njee/timeseries.hpp"

namespace njee {

// Malformed or unreadable input data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntegerTable {
    std::vector<std::string> header;
    std::vector<std::vector<int>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

// Header row, then nonnegative integers. Errors carry the 1-based line number.
IntegerTable read_integer_csv(const std::filesystem::path& path);

// Columns of the table as a sample; alphabet size of each column = max + 1.
DiscreteSample to_sample(const IntegerTable& table);

// `timestamp,value` with a header row.
SeriesFrame read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const SeriesFrame& frame);

// "%.12g"; non-finite values print as nan/inf.
std::string format_number(double value);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    template <class... Cells>
    void row(const Cells&... cells) {
        std::string line;
        (append(line, cells), ...);
        line.pop_back();
        body_ += line;
        body_ += '\n';
    }

    std::string str() const { return header_ + body_; }
    void save(const std::filesystem::path& path) const;

private:
    static void append(std::string& line, const std::string& s) { line += s + ','; }
    static void append(std::string& line, const char* s) { line += std::string(s) + ','; }
    static void append(std::string& line, double v) { line += format_number(v) + ','; }
    template <class Int>
        requires std::is_integral_v<Int>
    static void append(std::string& line, Int v) {
        line += std::to_string(v) + ',';
    }

    std::string header_;
    std::string body_;
};

std::string sha256_file(const std::filesystem::path& path);

// Metadata written next to every results CSV as <csv>.manifest.json.
struct RunManifest {
    std::string command_line;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string start_time;
    std::string end_time;
    std::string version;
    std::string output_file;
    std::string output_sha256;

    nlohmann::json to_json() const;
};

std::string library_version();
std::string utc_timestamp();

// Writes the CSV then its manifest (digest computed from the written file).
void write_with_manifest(const std::filesystem::path& csv_path, const CsvWriter& csv, RunManifest manifest);

}  // namespace njee
