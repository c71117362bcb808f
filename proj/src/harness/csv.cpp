#include "mbfs/harness/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mbfs/error.hpp"

namespace mbfs::harness {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& v) {
    if (s == "inf" || s == "+inf") { v = std::numeric_limits<double>::infinity(); return true; }
    if (s == "-inf") { v = -std::numeric_limits<double>::infinity(); return true; }
    const char* end = s.data() + s.size();
    const char* begin = s.data();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    return ec == std::errc() && ptr == end && begin != end;
}

// Parses "x<i>_<j>".
bool parse_feature_column(const std::string& name, std::size_t& i, std::size_t& j) {
    if (name.size() < 4 || name[0] != 'x') return false;
    const auto us = name.find('_');
    if (us == std::string::npos || us == 1 || us + 1 == name.size()) return false;
    auto digits = [](const std::string& s) { return !s.empty() && std::all_of(s.begin(), s.end(), ::isdigit); };
    const std::string a = name.substr(1, us - 1);
    const std::string b = name.substr(us + 1);
    if (!digits(a) || !digits(b)) return false;
    i = std::stoul(a);
    j = std::stoul(b);
    return true;
}

}  // namespace

std::size_t Table::column_index(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::invalid_argument, "no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        t.header = split_csv_line(line);
        break;
    }
    if (t.header.empty()) throw Error(ErrorKind::parse_error, "CSV has no header row");
    t.columns.assign(t.header.size(), {});
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != t.header.size()) {
            throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(t.header.size()) + " fields, found " +
                                                    std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            double v;
            if (!parse_double(fields[c], v)) {
                throw Error(ErrorKind::parse_error, "line " + std::to_string(line_no) + ": column '" + t.header[c] +
                                                        "' is not a number: '" + fields[c] + "'");
            }
            t.columns[c].push_back(v);
        }
    }
    return t;
}

Table read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot open '" + path + "'");
    try {
        return read_csv(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << format_double(table.columns[c][r]);
        out << '\n';
    }
}

Dataset dataset_from_table(const Table& table) {
    std::map<std::size_t, std::map<std::size_t, std::size_t>> blocks;  // i -> j -> column
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        std::size_t i, j;
        if (parse_feature_column(table.header[c], i, j)) blocks[i][j] = c;
    }
    if (blocks.empty()) throw Error(ErrorKind::parse_error, "CSV has no x<i>_<j> feature columns");
    Dataset data;
    const std::size_t n = table.rows();
    if (n == 0) throw Error(ErrorKind::parse_error, "CSV has no data rows");
    std::size_t expect = 0;
    for (const auto& [i, cols] : blocks) {
        if (i != expect++) throw Error(ErrorKind::parse_error, "feature blocks must be numbered 0..m-1");
        std::vector<double> v;
        v.reserve(n * cols.size());
        for (std::size_t r = 0; r < n; ++r) {
            for (const auto& [j, c] : cols) v.push_back(table.columns[c][r]);
        }
        data.features.emplace_back(n, cols.size(), std::move(v));
    }
    data.y = knn::SampleBlock(n, 1, table.columns[table.column_index("y")]);
    return data;
}

Table dataset_to_table(const Dataset& data, const std::vector<std::pair<std::string, knn::SampleBlock>>& extra) {
    Table t;
    for (std::size_t i = 0; i < data.m(); ++i) {
        for (std::size_t j = 0; j < data.features[i].d(); ++j) {
            t.header.push_back("x" + std::to_string(i) + "_" + std::to_string(j));
            std::vector<double> col(data.n());
            for (std::size_t r = 0; r < data.n(); ++r) col[r] = data.features[i](r, j);
            t.columns.push_back(std::move(col));
        }
    }
    t.header.push_back("y");
    t.columns.push_back(data.y.values());
    for (const auto& [name, block] : extra) {
        for (std::size_t j = 0; j < block.d(); ++j) {
            t.header.push_back(block.d() == 1 ? name : name + "_" + std::to_string(j));
            std::vector<double> col(block.n());
            for (std::size_t r = 0; r < block.n(); ++r) col[r] = block(r, j);
            t.columns.push_back(std::move(col));
        }
    }
    return t;
}

knn::SampleBlock select_columns(const Table& table, const std::string& spec) {
    std::vector<std::size_t> cols;
    std::istringstream ss(spec);
    std::string name;
    while (std::getline(ss, name, ',')) {
        name = trim(name);
        if (name.empty()) continue;
        const auto exact = std::find(table.header.begin(), table.header.end(), name);
        if (exact != table.header.end()) {
            cols.push_back(static_cast<std::size_t>(exact - table.header.begin()));
            continue;
        }
        const std::size_t before = cols.size();
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (table.header[c].rfind(name + "_", 0) == 0) cols.push_back(c);
        }
        if (cols.size() == before) throw Error(ErrorKind::invalid_argument, "no column matches '" + name + "'");
    }
    if (cols.empty()) throw Error(ErrorKind::invalid_argument, "empty column selection");
    const std::size_t n = table.rows();
    std::vector<double> v;
    v.reserve(n * cols.size());
    for (std::size_t r = 0; r < n; ++r) {
        for (const std::size_t c : cols) v.push_back(table.columns[c][r]);
    }
    return knn::SampleBlock(n, cols.size(), std::move(v));
}

}  // namespace mbfs::harness
