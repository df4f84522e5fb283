#include "kgprobe/centrality.hpp"

#include <cmath>
#include <deque>
#include <set>

#include "kgprobe/errors.hpp"

namespace kgprobe {

std::string_view centrality_name(CentralityKind kind) noexcept {
    switch (kind) {
        case CentralityKind::degree: return "degree";
        case CentralityKind::betweenness: return "betweenness";
        case CentralityKind::pagerank: return "pagerank";
    }
    return "degree";
}

NodeIndex::NodeIndex(const std::vector<Triple>& triples) {
    auto intern = [&](const std::string& label) {
        auto [it, inserted] = ids_.emplace(label, labels_.size());
        if (inserted) labels_.push_back(label);
        return it->second;
    };
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& t : triples) {
        const auto u = intern(t.subject);
        const auto v = intern(t.object);
        if (u != v && seen.emplace(u, v).second) edges_.emplace_back(u, v);
    }
}

std::size_t NodeIndex::id(std::string_view label) const {
    auto it = ids_.find(label);
    if (it == ids_.end()) throw Error("unknown node '" + std::string(label) + "'");
    return it->second;
}

double CentralityScores::at(std::string_view node) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == node) return scores(static_cast<Eigen::Index>(i));
    }
    throw Error("unknown node '" + std::string(node) + "'");
}

CentralityScores degree_centrality(const std::vector<Triple>& triples) {
    NodeIndex index(triples);
    CentralityScores out{CentralityKind::degree, index.labels(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(index.size()))};
    for (const auto& t : triples) {
        out.scores(static_cast<Eigen::Index>(index.id(t.subject))) += 1.0;
        out.scores(static_cast<Eigen::Index>(index.id(t.object))) += 1.0;
    }
    return out;
}

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

Adjacency out_adjacency(const NodeIndex& index) {
    Adjacency adj(index.size());
    for (auto [u, v] : index.edges()) adj[u].push_back(v);
    return adj;
}

// Single-source stage of Brandes: BFS order, predecessor lists and path counts.
struct ShortestPathDag {
    std::vector<std::size_t> order;
    std::vector<std::vector<std::size_t>> preds;
    std::vector<double> sigma;
};

ShortestPathDag bfs_dag(const Adjacency& adj, std::size_t source) {
    const auto n = adj.size();
    ShortestPathDag dag;
    dag.preds.assign(n, {});
    dag.sigma.assign(n, 0.0);
    std::vector<long> dist(n, -1);
    dist[source] = 0;
    dag.sigma[source] = 1.0;
    std::deque<std::size_t> queue{source};
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        dag.order.push_back(v);
        for (auto w : adj[v]) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if (dist[w] == dist[v] + 1) {
                dag.sigma[w] += dag.sigma[v];
                dag.preds[w].push_back(v);
            }
        }
    }
    return dag;
}

}  // namespace

CentralityScores betweenness_centrality(const std::vector<Triple>& triples) {
    NodeIndex index(triples);
    const auto n = index.size();
    const auto adj = out_adjacency(index);
    CentralityScores out{CentralityKind::betweenness, index.labels(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
    for (std::size_t s = 0; s < n; ++s) {
        const auto dag = bfs_dag(adj, s);
        std::vector<double> delta(n, 0.0);
        for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
            const auto w = *it;
            for (auto v : dag.preds[w]) delta[v] += dag.sigma[v] / dag.sigma[w] * (1.0 + delta[w]);
            if (w != s) out.scores(static_cast<Eigen::Index>(w)) += delta[w];
        }
    }
    return out;
}

std::vector<double> edge_betweenness(const std::vector<Triple>& triples) {
    NodeIndex index(triples);
    const auto n = index.size();
    const auto adj = out_adjacency(index);
    std::map<std::pair<std::size_t, std::size_t>, double> edge_score;
    for (auto e : index.edges()) edge_score[e] = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto dag = bfs_dag(adj, s);
        std::vector<double> delta(n, 0.0);
        for (auto it = dag.order.rbegin(); it != dag.order.rend(); ++it) {
            const auto w = *it;
            for (auto v : dag.preds[w]) {
                const double c = dag.sigma[v] / dag.sigma[w] * (1.0 + delta[w]);
                edge_score[{v, w}] += c;
                delta[v] += c;
            }
        }
    }
    std::vector<double> out;
    out.reserve(triples.size());
    for (const auto& t : triples) {
        const auto u = index.id(t.subject);
        const auto v = index.id(t.object);
        out.push_back(u == v ? 0.0 : edge_score.at({u, v}));
    }
    return out;
}

CentralityScores pagerank(const std::vector<Triple>& triples, const PageRankOptions& options) {
    NodeIndex index(triples);
    const auto n = static_cast<Eigen::Index>(index.size());
    if (n == 0) throw Error("pagerank of an empty graph");
    const auto adj = out_adjacency(index);
    const double inv_n = 1.0 / static_cast<double>(n);

    Eigen::VectorXd rank = Eigen::VectorXd::Constant(n, inv_n);
    Eigen::VectorXd next(n);
    double delta = 0.0;
    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        double dangling = 0.0;
        for (Eigen::Index u = 0; u < n; ++u) {
            if (adj[static_cast<std::size_t>(u)].empty()) dangling += rank(u);
        }
        next.setConstant((1.0 - options.damping) * inv_n + options.damping * dangling * inv_n);
        for (Eigen::Index u = 0; u < n; ++u) {
            const auto& outs = adj[static_cast<std::size_t>(u)];
            if (outs.empty()) continue;
            const double share = options.damping * rank(u) / static_cast<double>(outs.size());
            for (auto v : outs) next(static_cast<Eigen::Index>(v)) += share;
        }
        next /= next.sum();
        delta = (next - rank).lpNorm<1>();
        rank.swap(next);
        if (delta < options.tol) {
            return {CentralityKind::pagerank, index.labels(), rank};
        }
    }
    throw ConvergenceError("pagerank did not converge in " + std::to_string(options.max_iter) + " iterations", delta);
}

CentralityScores centrality(const std::vector<Triple>& triples, CentralityKind kind) {
    switch (kind) {
        case CentralityKind::degree: return degree_centrality(triples);
        case CentralityKind::betweenness: return betweenness_centrality(triples);
        case CentralityKind::pagerank: return pagerank(triples);
    }
    return degree_centrality(triples);
}

}  // namespace kgprobe
