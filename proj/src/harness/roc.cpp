#include "mbfs/harness/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mbfs/error.hpp"
#include "mbfs/harness/csv.hpp"

namespace mbfs::harness {

RocTable roc_sweep(const std::vector<bool>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size()) throw Error(ErrorKind::dimension_mismatch, "labels and scores differ in length");
    for (double s : scores) {
        if (std::isnan(s)) throw Error(ErrorKind::non_finite, "ROC scores must not be NaN");
    }
    const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorKind::invalid_argument, "AUC is undefined with a single class");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Walk thresholds from high to low, one step per distinct score.
    std::vector<RocRow> desc{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
    std::size_t tp = 0, fp = 0;
    double auc = 0.0;
    for (std::size_t k = 0; k < order.size();) {
        const double t = scores[order[k]];
        while (k < order.size() && scores[order[k]] == t) {
            (labels[order[k]] ? tp : fp) += 1;
            ++k;
        }
        RocRow row{t, static_cast<double>(tp) / static_cast<double>(pos), static_cast<double>(fp) / static_cast<double>(neg)};
        const RocRow& prev = desc.back();
        auc += 0.5 * (row.false_positive_rate - prev.false_positive_rate) *
               (row.true_positive_rate + prev.true_positive_rate);
        desc.push_back(row);
    }
    RocTable table;
    table.rows.assign(desc.rbegin(), desc.rend());
    table.auc = auc;
    return table;
}

void write_roc_csv(std::ostream& out, const RocTable& table) {
    out << "threshold,true_positive_rate,false_positive_rate\n";
    for (const auto& r : table.rows) {
        out << format_double(r.threshold) << ',' << format_double(r.true_positive_rate) << ','
            << format_double(r.false_positive_rate) << '\n';
    }
}

}  // namespace mbfs::harness
