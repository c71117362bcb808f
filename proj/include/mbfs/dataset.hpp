#pragma once

#include <cstddef>
#include <vector>

#include "mbfs/knn/sample_block.hpp"

namespace mbfs {

// Feature blocks X_1..X_m (block i is n x d_i) and a scalar target.
struct Dataset {
    std::vector<knn::SampleBlock> features;
    knn::SampleBlock y;

    std::size_t n() const { return y.n(); }
    std::size_t m() const { return features.size(); }
    std::vector<std::size_t> feature_dims() const;

    // Throws when there are no features, y is not one column, or the sample
    // counts disagree.
    void validate() const;
};

}  // namespace mbfs
