#include "njee/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace njee {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto first = cell.find_first_not_of(" \t\r");
        const auto last = cell.find_last_not_of(" \t\r");
        cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string location(const std::filesystem::path& path, std::size_t line) {
    std::ostringstream out;
    out << path.string() << ":" << line << ": ";
    return out.str();
}

std::ifstream open_for_reading(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

bool is_blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

IntegerTable read_integer_csv(const std::filesystem::path& path) {
    std::ifstream in = open_for_reading(path);
    IntegerTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        table.header = split_csv_line(line);
        break;
    }
    if (table.header.empty()) throw DataError(path.string() + ": missing header row");
    table.columns.assign(table.header.size(), {});
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != table.header.size()) {
            std::ostringstream msg;
            msg << location(path, line_no) << "expected " << table.header.size() << " fields, found " << cells.size();
            throw DataError(msg.str());
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            int value = 0;
            const auto& s = cells[c];
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
                throw DataError(location(path, line_no) + "field '" + s + "' is not an integer");
            }
            if (value < 0) throw DataError(location(path, line_no) + "negative symbol " + s);
            table.columns[c].push_back(value);
        }
    }
    if (table.rows() == 0) throw DataError(path.string() + ": no data rows");
    return table;
}

DiscreteSample to_sample(const IntegerTable& table) {
    std::vector<std::size_t> alphabets;
    for (const auto& col : table.columns) {
        const int top = *std::max_element(col.begin(), col.end());
        alphabets.push_back(std::max<std::size_t>(static_cast<std::size_t>(top) + 1, 2));
    }
    return DiscreteSample::from_columns(table.columns, std::move(alphabets));
}

SeriesFrame read_series_csv(const std::filesystem::path& path) {
    std::ifstream in = open_for_reading(path);
    SeriesFrame frame;
    frame.name = path.stem().string();
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2) {
            std::ostringstream msg;
            msg << location(path, line_no) << "expected 2 fields (timestamp,value), found " << cells.size();
            throw DataError(msg.str());
        }
        if (!header_seen) {
            if (cells[0] != "timestamp" || cells[1] != "value") {
                throw DataError(location(path, line_no) + "expected header 'timestamp,value'");
            }
            header_seen = true;
            continue;
        }
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(cells[1], &used);
            if (used != cells[1].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw DataError(location(path, line_no) + "value '" + cells[1] + "' is not a number");
        }
        frame.timestamps.push_back(cells[0]);
        frame.values.push_back(value);
    }
    if (!header_seen) throw DataError(path.string() + ": missing header row");
    try {
        frame.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return frame;
}

void write_series_csv(const std::filesystem::path& path, const SeriesFrame& frame) {
    CsvWriter csv({"timestamp", "value"});
    for (std::size_t i = 0; i < frame.values.size(); ++i) csv.row(frame.timestamps[i], frame.values[i]);
    csv.save(path);
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) header_ += ',';
        header_ += header[i];
    }
    header_ += '\n';
}

void CsvWriter::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << str();
}

}  // namespace njee
