#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "mbfs/dataset.hpp"

namespace mbfs::harness {

// Numeric table with a mandatory header row. Values are stored by column.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t column_index(const std::string& name) const;  // throws if absent
};

Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Table& table);

/// Splits one CSV line on commas (no quoting) and trims surrounding blanks.
std::vector<std::string> split_csv_line(const std::string& line);

// Columns named x<i>_<j> form feature block i (j ascending), column y is the
// target. Block indices must run 0..m-1; other columns are ignored.
Dataset dataset_from_table(const Table& table);

// Header x<i>_<j> for every feature coordinate, then y, then the extra
// columns. Values are written with 17 significant digits.
Table dataset_to_table(const Dataset& data, const std::vector<std::pair<std::string, knn::SampleBlock>>& extra = {});

// "x3" selects every column x3_<j>; any other name selects that column.
// Several names may be joined by commas.
knn::SampleBlock select_columns(const Table& table, const std::string& spec);

std::string format_double(double v);

}  // namespace mbfs::harness
