#pragma once

#include <ostream>
#include <vector>

namespace mbfs::harness {

struct RocRow {
    double threshold = 0.0;
    double true_positive_rate = 0.0;
    double false_positive_rate = 0.0;
};

// Rows are sorted by ascending threshold, so both rates are non-increasing
// down the table. The last row has threshold +inf and rates 0.
struct RocTable {
    std::vector<RocRow> rows;
    double auc = 0.0;
};

// Positive class: labels[k] == true (relation is independent). A relation is
// declared positive when score >= threshold. AUC is the trapezoid area.
RocTable roc_sweep(const std::vector<bool>& labels, const std::vector<double>& scores);

void write_roc_csv(std::ostream& out, const RocTable& table);

}  // namespace mbfs::harness
