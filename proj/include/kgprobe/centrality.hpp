#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "kgprobe/kg_core.hpp"

namespace kgprobe {

enum class CentralityKind { degree, betweenness, pagerank };

std::string_view centrality_name(CentralityKind kind) noexcept;

// Node set of a triple list, in first-appearance order (subject before object).
class NodeIndex {
public:
    explicit NodeIndex(const std::vector<Triple>& triples);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t id(std::string_view label) const;
    bool contains(std::string_view label) const { return ids_.find(label) != ids_.end(); }

    // Distinct directed edges (u, v), u != v, in first-appearance order.
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }

private:
    std::vector<std::string> labels_;
    std::map<std::string, std::size_t, std::less<>> ids_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

struct CentralityScores {
    CentralityKind kind = CentralityKind::degree;
    std::vector<std::string> nodes;
    Eigen::VectorXd scores;

    double at(std::string_view node) const;
};

// Total degree (in + out) counted over triples; a self-loop counts twice.
CentralityScores degree_centrality(const std::vector<Triple>& triples);

// Exact unnormalized directed betweenness (Brandes) on the simple digraph
// underlying the triples.
CentralityScores betweenness_centrality(const std::vector<Triple>& triples);

// Directed edge betweenness, reported per triple: parallel triples share the
// score of their (subject, object) edge and self-loops score 0.
std::vector<double> edge_betweenness(const std::vector<Triple>& triples);

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-10;
    std::size_t max_iter = 200;
};

// Power iteration with uniform teleport; dangling mass is spread uniformly.
// Converged when the L1 change drops below tol. Throws ConvergenceError.
CentralityScores pagerank(const std::vector<Triple>& triples, const PageRankOptions& options = {});

CentralityScores centrality(const std::vector<Triple>& triples, CentralityKind kind);

inline CentralityScores degree_centrality(const LocalGraph& g) { return degree_centrality(g.triples); }
inline CentralityScores betweenness_centrality(const LocalGraph& g) { return betweenness_centrality(g.triples); }
inline CentralityScores pagerank(const LocalGraph& g, const PageRankOptions& o = {}) { return pagerank(g.triples, o); }

}  // namespace kgprobe
