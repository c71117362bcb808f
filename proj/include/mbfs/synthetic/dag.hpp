#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbfs/dataset.hpp"
#include "mbfs/knn/sample_block.hpp"
#include "mbfs/synthetic/bullseye.hpp"

namespace mbfs::synthetic {

// Directed graph over features X_0..X_{m-1} and the target Y. Node index m is
// Y. Names in JSON are "x0".."x{m-1}" and "y".
struct DagSpec {
    std::size_t m = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // (from, to)
    double epsilon = 0.3;
    Rings rings = kWideRings;

    std::size_t target() const { return m; }
    std::size_t num_nodes() const { return m + 1; }

    // Throws on out-of-range nodes, self loops, duplicate edges or cycles.
    void validate() const;
    std::vector<std::vector<std::size_t>> parents() const;
    std::vector<std::vector<std::size_t>> children() const;
    std::vector<std::size_t> topological_order() const;
};

// x0->x1, x0->x2, x1->x3, x5->x4, x2->y, x4->y.
DagSpec default_dag_spec(double epsilon = 0.3);

std::string node_name(const DagSpec& dag, std::size_t node);
std::size_t node_index(const DagSpec& dag, const std::string& name);

nlohmann::json to_json(const DagSpec& dag);
DagSpec dag_spec_from_json(const nlohmann::json& j);

// Every feature is a point in R^3 at a uniformly random direction. Roots draw
// their radius from the ring law; other nodes use the mean magnitude of
// their parents plus U(-eps, eps). Y is the mean magnitude of its parents
// plus noise, or a ring-law draw when it has none.
using DagDataset = Dataset;

DagDataset gen_bullseye_dag(const DagSpec& dag, std::size_t n, std::uint64_t seed);

/// True when i and j are d-separated given S (Bayes-ball reachability).
bool d_separated(const DagSpec& dag, std::size_t i, std::size_t j, const std::vector<std::size_t>& S);

/// Parents, children and the children's other parents of `node`, sorted.
std::vector<std::size_t> markov_blanket_of(const DagSpec& dag, std::size_t node);

}  // namespace mbfs::synthetic
