#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "mbfs/dataset.hpp"

namespace mbfs::harness {

struct IngestResult {
    Dataset data;
    std::vector<std::string> feature_names;
    std::vector<std::string> entities;          // one per kept sample
    std::vector<std::string> dropped_entities;  // too little history
};

// Input columns: entity, time, feature columns..., label. Rows of an entity
// are ordered by time; its label is the label of its last row (non-zero ->
// 1). Feature block i holds `window` values of feature i taken `stride` steps
// apart and ending at the last step, oldest first. Entities with fewer than
// (window - 1) * stride + 1 rows are dropped.
IngestResult ingest_timeseries(std::istream& csv, std::size_t window, std::size_t stride = 1);
IngestResult ingest_timeseries_file(const std::string& path, std::size_t window, std::size_t stride = 1);

}  // namespace mbfs::harness
