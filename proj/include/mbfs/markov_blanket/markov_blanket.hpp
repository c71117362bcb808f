#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "mbfs/ci/ci_test.hpp"
#include "mbfs/dataset.hpp"
#include "mbfs/mapper/mapper.hpp"
#include "mbfs/synthetic/dag.hpp"

namespace mbfs::mb {

enum class Backend { mapped_knn, raw_knn, oracle };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& name);

struct MbConfig {
    std::size_t delta = 3;
    Backend backend = Backend::raw_knn;
    ci::CiConfig ci{};
};

enum class Phase { adjacency, coparent };

struct TestRecord {
    std::size_t i = 0;
    std::vector<std::size_t> S;
    double statistic = 0.0;
    double p_value = 1.0;
    bool independent = false;
    Phase phase = Phase::adjacency;
};

struct MbResult {
    std::vector<std::size_t> adjacents;
    std::vector<std::size_t> coparents;
    std::vector<std::size_t> selected;  // sorted union
    std::vector<TestRecord> test_log;
};

// Decides Y independent of X_i given X_S. The record's phase is filled in by
// the caller.
using CiPredicate = std::function<TestRecord(std::size_t i, const std::vector<std::size_t>& S)>;

// Adjacency search for c = 0..delta: each feature still adjacent at the start
// of level c is tested against the c-subsets of the current Adj without it,
// in lexicographic order, and removed at the first independence. Every
// feature outside Adj is then tested given all of Adj; dependent ones are
// coparents.
MbResult find_markov_blanket(std::size_t m, std::size_t delta, const CiPredicate& test);

/// The d-separation oracle as a CI predicate (p = 1 when separated, else 0).
CiPredicate oracle_predicate(const synthetic::DagSpec& dag);

// k-NN permutation test on the given feature blocks. The seed of each test is
// derived from cfg.seed and (i, S) alone, so it does not depend on the order
// in which tests run.
CiPredicate knn_predicate(const std::vector<knn::SampleBlock>& blocks, const knn::SampleBlock& y,
                          const ci::CiConfig& cfg);

// raw_knn and mapped_knn run on `data` (mapped_knn needs `model`); the oracle
// backend needs `dag`.
MbResult find_markov_blanket(const Dataset& data, const MbConfig& cfg, const mapper::MappingModel* model,
                             const synthetic::DagSpec* dag = nullptr);

struct Relation {
    std::size_t i = 0;
    std::vector<std::size_t> S;
    bool independent = false;  // Y d-separated from X_i given X_S
};

/// All (i, S) with |S| <= delta over the features, S ascending, labelled by d-separation.
std::vector<Relation> relation_suite(const synthetic::DagSpec& dag, std::size_t delta);

/// Columns i, S (semicolon-joined), statistic, p_value, decision.
void write_test_log_csv(std::ostream& out, const std::vector<TestRecord>& log);

/// Seed for the test of (i, S) under base seed `seed`.
std::uint64_t relation_seed(std::uint64_t seed, std::size_t i, const std::vector<std::size_t>& S);

}  // namespace mbfs::mb
