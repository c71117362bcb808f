#include "mbfs/dataset.hpp"

#include <string>

#include "mbfs/error.hpp"

namespace mbfs {

std::vector<std::size_t> Dataset::feature_dims() const {
    std::vector<std::size_t> dims;
    for (const auto& f : features) dims.push_back(f.d());
    return dims;
}

void Dataset::validate() const {
    if (features.empty()) throw Error(ErrorKind::dimension_mismatch, "dataset has no features");
    if (y.empty() || y.d() != 1) throw Error(ErrorKind::dimension_mismatch, "target must be a single column");
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].n() != y.n()) {
            throw Error(ErrorKind::dimension_mismatch, "feature " + std::to_string(i) + " has " +
                                                           std::to_string(features[i].n()) + " samples, target has " +
                                                           std::to_string(y.n()));
        }
    }
}

}  // namespace mbfs
