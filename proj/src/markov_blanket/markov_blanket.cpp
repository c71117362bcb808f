#include "mbfs/markov_blanket/markov_blanket.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "mbfs/error.hpp"
#include "mbfs/rng.hpp"

namespace mbfs::mb {
namespace {

// Calls visit(S) for every c-subset of `items` in lexicographic order; stops
// when visit returns true.
bool for_each_subset(const std::vector<std::size_t>& items, std::size_t c,
                     const std::function<bool(const std::vector<std::size_t>&)>& visit) {
    if (c > items.size()) return false;
    std::vector<std::size_t> pos(c);
    for (std::size_t k = 0; k < c; ++k) pos[k] = k;
    std::vector<std::size_t> S(c);
    while (true) {
        for (std::size_t k = 0; k < c; ++k) S[k] = items[pos[k]];
        if (visit(S)) return true;
        std::size_t k = c;
        while (k > 0 && pos[k - 1] == items.size() - c + (k - 1)) --k;
        if (k == 0) return false;
        ++pos[k - 1];
        for (std::size_t t = k; t < c; ++t) pos[t] = pos[t - 1] + 1;
    }
}

std::string set_string(const std::vector<std::size_t>& S) {
    std::string s;
    for (std::size_t k = 0; k < S.size(); ++k) {
        if (k) s += ';';
        s += std::to_string(S[k]);
    }
    return s;
}

}  // namespace

std::string to_string(Backend b) {
    switch (b) {
        case Backend::mapped_knn: return "mapped_knn";
        case Backend::raw_knn: return "raw_knn";
        case Backend::oracle: return "oracle";
    }
    return "unknown";
}

Backend backend_from_string(const std::string& name) {
    if (name == "mapped_knn") return Backend::mapped_knn;
    if (name == "raw_knn") return Backend::raw_knn;
    if (name == "oracle") return Backend::oracle;
    throw Error(ErrorKind::parse_error, "unknown backend '" + name + "'");
}

MbResult find_markov_blanket(std::size_t m, std::size_t delta, const CiPredicate& test) {
    MbResult res;
    std::vector<std::size_t> adj(m);
    for (std::size_t i = 0; i < m; ++i) adj[i] = i;

    for (std::size_t c = 0; c <= delta; ++c) {
        const std::vector<std::size_t> level = adj;
        for (const std::size_t i : level) {
            std::vector<std::size_t> others;
            for (const std::size_t j : adj) {
                if (j != i) others.push_back(j);
            }
            const bool removed = for_each_subset(others, c, [&](const std::vector<std::size_t>& S) {
                TestRecord rec = test(i, S);
                rec.i = i;
                rec.S = S;
                rec.phase = Phase::adjacency;
                res.test_log.push_back(rec);
                return rec.independent;
            });
            if (removed) adj.erase(std::find(adj.begin(), adj.end(), i));
        }
        if (adj.size() <= c + 1) break;  // no feature has c + 1 other neighbours left
    }

    for (std::size_t i = 0; i < m; ++i) {
        if (std::find(adj.begin(), adj.end(), i) != adj.end()) continue;
        TestRecord rec = test(i, adj);
        rec.i = i;
        rec.S = adj;
        rec.phase = Phase::coparent;
        res.test_log.push_back(rec);
        if (!rec.independent) res.coparents.push_back(i);
    }
    res.adjacents = adj;
    res.selected = adj;
    res.selected.insert(res.selected.end(), res.coparents.begin(), res.coparents.end());
    std::sort(res.selected.begin(), res.selected.end());
    return res;
}

CiPredicate oracle_predicate(const synthetic::DagSpec& dag) {
    return [dag](std::size_t i, const std::vector<std::size_t>& S) {
        TestRecord rec;
        rec.independent = synthetic::d_separated(dag, dag.target(), i, S);
        rec.statistic = rec.independent ? 0.0 : 1.0;
        rec.p_value = rec.independent ? 1.0 : 0.0;
        return rec;
    };
}

std::uint64_t relation_seed(std::uint64_t seed, std::size_t i, const std::vector<std::size_t>& S) {
    std::uint64_t h = splitmix64(i + 1);
    for (const std::size_t s : S) h = splitmix64(h ^ (s + 0x100));
    return derive_seed(seed, h);
}

CiPredicate knn_predicate(const std::vector<knn::SampleBlock>& blocks, const knn::SampleBlock& y,
                          const ci::CiConfig& cfg) {
    return [&blocks, &y, cfg](std::size_t i, const std::vector<std::size_t>& S) {
        std::optional<knn::SampleBlock> z;
        if (!S.empty()) {
            std::vector<const knn::SampleBlock*> parts;
            for (const std::size_t s : S) parts.push_back(&blocks.at(s));
            z = knn::hconcat(parts);
        }
        ci::CiConfig c = cfg;
        c.seed = relation_seed(cfg.seed, i, S);
        ci::CiTestResult r;
        try {
            r = ci::ci_test(blocks.at(i), y, z, c);
        } catch (const Error& e) {
            throw Error(e.kind(), "test of Y vs x" + std::to_string(i) + " given {" + set_string(S) + "}: " + e.what());
        }
        TestRecord rec;
        rec.statistic = r.statistic;
        rec.p_value = r.p_value;
        rec.independent = r.independent;
        return rec;
    };
}

MbResult find_markov_blanket(const Dataset& data, const MbConfig& cfg, const mapper::MappingModel* model,
                             const synthetic::DagSpec* dag) {
    if (cfg.backend == Backend::oracle) {
        if (!dag) throw Error(ErrorKind::invalid_argument, "oracle backend needs a DAG");
        return find_markov_blanket(dag->m, cfg.delta, oracle_predicate(*dag));
    }
    data.validate();
    std::vector<knn::SampleBlock> blocks;
    if (cfg.backend == Backend::mapped_knn) {
        if (!model) throw Error(ErrorKind::invalid_argument, "mapped_knn backend needs a trained mapping model");
        blocks = mapper::map_dataset(*model, data);
    } else {
        blocks = data.features;
    }
    return find_markov_blanket(data.m(), cfg.delta, knn_predicate(blocks, data.y, cfg.ci));
}

std::vector<Relation> relation_suite(const synthetic::DagSpec& dag, std::size_t delta) {
    dag.validate();
    std::vector<Relation> out;
    for (std::size_t i = 0; i < dag.m; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < dag.m; ++j) {
            if (j != i) others.push_back(j);
        }
        for (std::size_t c = 0; c <= std::min(delta, others.size()); ++c) {
            for_each_subset(others, c, [&](const std::vector<std::size_t>& S) {
                out.push_back({i, S, synthetic::d_separated(dag, dag.target(), i, S)});
                return false;
            });
        }
    }
    return out;
}

void write_test_log_csv(std::ostream& out, const std::vector<TestRecord>& log) {
    out << "i,S,statistic,p_value,decision\n";
    char buf[64];
    for (const auto& r : log) {
        out << r.i << ',' << set_string(r.S) << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.statistic);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.p_value);
        out << buf << ',' << (r.independent ? "independent" : "dependent") << '\n';
    }
}

}  // namespace mbfs::mb
