#include "mbfs/synthetic/dag.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "mbfs/error.hpp"

namespace mbfs::synthetic {

void DagSpec::validate() const {
    if (m == 0) throw Error(ErrorKind::invalid_argument, "DAG needs at least one feature");
    if (!(epsilon >= 0.0 && epsilon <= 0.5)) throw Error(ErrorKind::invalid_argument, "epsilon must lie in [0, 0.5]");
    validate_rings(rings);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [a, b] : edges) {
        if (a >= num_nodes() || b >= num_nodes()) throw Error(ErrorKind::invalid_argument, "edge endpoint out of range");
        if (a == b) throw Error(ErrorKind::cyclic_graph, "self loop on " + node_name(*this, a));
        if (!seen.insert({a, b}).second) {
            throw Error(ErrorKind::invalid_argument,
                        "duplicate edge " + node_name(*this, a) + "->" + node_name(*this, b));
        }
    }
    topological_order();
}

std::vector<std::vector<std::size_t>> DagSpec::parents() const {
    std::vector<std::vector<std::size_t>> out(num_nodes());
    for (const auto& [a, b] : edges) out.at(b).push_back(a);
    for (auto& p : out) std::sort(p.begin(), p.end());
    return out;
}

std::vector<std::vector<std::size_t>> DagSpec::children() const {
    std::vector<std::vector<std::size_t>> out(num_nodes());
    for (const auto& [a, b] : edges) out.at(a).push_back(b);
    for (auto& c : out) std::sort(c.begin(), c.end());
    return out;
}

std::vector<std::size_t> DagSpec::topological_order() const {
    const auto ch = children();
    std::vector<std::size_t> indegree(num_nodes(), 0);
    for (const auto& e : edges) ++indegree.at(e.second);
    std::vector<std::size_t> ready, order;
    for (std::size_t v = 0; v < num_nodes(); ++v) {
        if (indegree[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
        const std::size_t v = ready.front();
        ready.erase(ready.begin());
        order.push_back(v);
        for (const std::size_t c : ch[v]) {
            if (--indegree[c] == 0) ready.push_back(c);
        }
    }
    if (order.size() != num_nodes()) throw Error(ErrorKind::cyclic_graph, "edge list contains a cycle");
    return order;
}

DagSpec default_dag_spec(double epsilon) {
    DagSpec d;
    d.m = 6;
    d.edges = {{0, 1}, {0, 2}, {1, 3}, {5, 4}, {2, 6}, {4, 6}};
    d.epsilon = epsilon;
    return d;
}

std::string node_name(const DagSpec& dag, std::size_t node) {
    if (node == dag.target()) return "y";
    if (node > dag.m) throw Error(ErrorKind::invalid_argument, "node index out of range");
    return "x" + std::to_string(node);
}

std::size_t node_index(const DagSpec& dag, const std::string& name) {
    if (name == "y") return dag.target();
    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const std::size_t i = std::stoul(name.substr(1));
        if (i < dag.m) return i;
    }
    throw Error(ErrorKind::parse_error, "unknown node name '" + name + "'");
}

nlohmann::json to_json(const DagSpec& dag) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : dag.edges) edges.push_back({node_name(dag, a), node_name(dag, b)});
    return {{"m", dag.m},
            {"edges", edges},
            {"epsilon", dag.epsilon},
            {"rings", {{dag.rings[0].lo, dag.rings[0].hi}, {dag.rings[1].lo, dag.rings[1].hi}}}};
}

DagSpec dag_spec_from_json(const nlohmann::json& j) {
    DagSpec d;
    try {
        d.m = j.at("m").get<std::size_t>();
        if (j.contains("epsilon")) d.epsilon = j.at("epsilon").get<double>();
        if (j.contains("rings")) {
            const auto& r = j.at("rings");
            if (r.size() != 2) throw Error(ErrorKind::parse_error, "\"rings\" must hold two intervals");
            for (std::size_t k = 0; k < 2; ++k) d.rings[k] = {r.at(k).at(0).get<double>(), r.at(k).at(1).get<double>()};
        }
        for (const auto& e : j.at("edges")) {
            if (e.size() != 2) throw Error(ErrorKind::parse_error, "each edge must be a [from, to] pair");
            d.edges.emplace_back(node_index(d, e.at(0).get<std::string>()), node_index(d, e.at(1).get<std::string>()));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorKind::parse_error, std::string("invalid DAG JSON: ") + ex.what());
    }
    d.validate();
    return d;
}

DagDataset gen_bullseye_dag(const DagSpec& dag, std::size_t n, std::uint64_t seed) {
    dag.validate();
    if (n == 0) throw Error(ErrorKind::invalid_argument, "n must be positive");
    const auto par = dag.parents();
    const auto order = dag.topological_order();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> noise(-dag.epsilon, dag.epsilon);

    std::vector<std::vector<double>> feats(dag.m, std::vector<double>(3 * n));
    std::vector<double> y(n);
    std::vector<double> magnitude(dag.num_nodes());
    for (std::size_t s = 0; s < n; ++s) {
        for (const std::size_t v : order) {
            double radius;
            if (par[v].empty()) {
                radius = draw_ring_radius(dag.rings, rng);
            } else {
                double mean = 0.0;
                for (const std::size_t p : par[v]) mean += magnitude[p];
                radius = mean / static_cast<double>(par[v].size());
                if (dag.epsilon > 0.0) radius += noise(rng);
            }
            if (v == dag.target()) {
                y[s] = radius;
                magnitude[v] = std::abs(radius);
                continue;
            }
            double dir[3];
            double norm = 0.0;
            do {
                for (double& c : dir) c = gauss(rng);
                norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
            } while (norm == 0.0);
            for (std::size_t c = 0; c < 3; ++c) feats[v][3 * s + c] = radius * dir[c] / norm;
            magnitude[v] = std::abs(radius);
        }
    }
    DagDataset out;
    for (auto& f : feats) out.features.emplace_back(n, 3, std::move(f));
    out.y = SampleBlock(n, 1, std::move(y));
    return out;
}

bool d_separated(const DagSpec& dag, std::size_t i, std::size_t j, const std::vector<std::size_t>& S) {
    const std::size_t N = dag.num_nodes();
    if (i >= N || j >= N || i == j) throw Error(ErrorKind::invalid_argument, "d-separation needs two distinct nodes");
    std::vector<char> observed(N, 0);
    for (const std::size_t s : S) {
        if (s >= N || s == i || s == j) {
            throw Error(ErrorKind::invalid_argument, "conditioning set must exclude the queried nodes");
        }
        observed[s] = 1;
    }
    const auto par = dag.parents();
    const auto ch = dag.children();

    // Nodes with an observed descendant (or observed themselves) open colliders.
    std::vector<char> opens(N, 0);
    std::vector<std::size_t> stack(S.begin(), S.end());
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        if (opens[v]) continue;
        opens[v] = 1;
        for (const std::size_t p : par[v]) stack.push_back(p);
    }

    // Reachability over (node, arrived-from-child) states.
    std::vector<char> visited(2 * N, 0);
    std::vector<std::pair<std::size_t, bool>> todo{{i, true}};
    while (!todo.empty()) {
        const auto [v, up] = todo.back();
        todo.pop_back();
        if (visited[2 * v + (up ? 1 : 0)]) continue;
        visited[2 * v + (up ? 1 : 0)] = 1;
        if (v == j && !observed[v]) return false;
        if (up && !observed[v]) {
            for (const std::size_t p : par[v]) todo.emplace_back(p, true);
            for (const std::size_t c : ch[v]) todo.emplace_back(c, false);
        } else if (!up) {
            if (!observed[v]) {
                for (const std::size_t c : ch[v]) todo.emplace_back(c, false);
            }
            if (opens[v]) {
                for (const std::size_t p : par[v]) todo.emplace_back(p, true);
            }
        }
    }
    return true;
}

std::vector<std::size_t> markov_blanket_of(const DagSpec& dag, std::size_t node) {
    const auto par = dag.parents();
    const auto ch = dag.children();
    std::set<std::size_t> mb(par.at(node).begin(), par.at(node).end());
    for (const std::size_t c : ch[node]) {
        mb.insert(c);
        mb.insert(par[c].begin(), par[c].end());
    }
    mb.erase(node);
    return {mb.begin(), mb.end()};
}

}  // namespace mbfs::synthetic
