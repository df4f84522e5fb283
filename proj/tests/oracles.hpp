#pragma once

// Brute-force reference implementations. They share no code with the library
// beyond plain data (the stopword list and the cue inventory), so agreement
// with the library is evidence rather than tautology.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kgprobe/kg_core.hpp"
#include "kgprobe/text.hpp"

namespace oracle {

inline std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        const bool sep = std::isspace(c) || (c < 128 && std::ispunct(c));
        if (sep) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c < 128 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::string joined(const std::vector<std::string>& ws) {
    std::string s;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (i) s += ' ';
        s += ws[i];
    }
    return s;
}

inline std::set<std::string> content_terms(const std::string& text) {
    const auto& stop = kgprobe::default_stopwords();
    std::set<std::string> out;
    for (auto& w : words(text)) {
        if (w.size() < 2) continue;
        if (std::find(stop.begin(), stop.end(), w) != stop.end()) continue;
        out.insert(w);
    }
    return out;
}

// Fraction of distinct objects whose word sequence occurs as a contiguous
// window of the hypothesis word sequence.
inline double trr(const std::string& hypothesis, const std::vector<std::string>& objects, bool masked) {
    if (masked) return 0.0;
    std::set<std::vector<std::string>> distinct;
    for (const auto& o : objects) {
        auto ws = words(o);
        if (!ws.empty()) distinct.insert(ws);
    }
    if (distinct.empty()) return 0.0;
    const auto hyp = words(hypothesis);
    std::size_t hits = 0;
    for (const auto& obj : distinct) {
        bool found = false;
        for (std::size_t i = 0; !found && i + obj.size() <= hyp.size(); ++i) {
            bool all = true;
            for (std::size_t j = 0; all && j < obj.size(); ++j) all = hyp[i + j] == obj[j];
            found = all;
        }
        hits += found;
    }
    return static_cast<double>(hits) / static_cast<double>(distinct.size());
}

inline double rfs(const std::string& hypothesis, const std::set<kgprobe::RelationRole>& roles,
                  const std::map<kgprobe::RelationRole, std::vector<std::string>>& cues, bool relations_removed) {
    if (relations_removed || roles.empty()) return 0.0;
    const auto text = joined(words(hypothesis));
    std::size_t hits = 0;
    for (auto r : roles) {
        auto it = cues.find(r);
        if (it == cues.end()) continue;
        bool any = false;
        for (const auto& c : it->second) any = any || text.find(joined(words(c))) != std::string::npos;
        hits += any;
    }
    return static_cast<double>(hits) / static_cast<double>(roles.size());
}

inline double ktc(const std::string& hypothesis, const std::vector<std::string>& objects, bool masked) {
    if (masked) return 0.0;
    std::set<std::string> ref;
    for (const auto& o : objects) {
        auto t = content_terms(o);
        ref.insert(t.begin(), t.end());
    }
    if (ref.empty()) return 0.0;
    const auto hyp = content_terms(hypothesis);
    std::size_t shared = 0;
    for (const auto& t : ref) shared += hyp.count(t);
    return static_cast<double>(shared) / static_cast<double>(ref.size());
}

// Simple digraph on node labels, built the way a reader would by hand.
struct Digraph {
    std::vector<std::string> nodes;
    std::set<std::pair<std::size_t, std::size_t>> edges;

    std::size_t index(const std::string& label) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i] == label) return i;
        nodes.push_back(label);
        return nodes.size() - 1;
    }

    explicit Digraph(const std::vector<kgprobe::Triple>& triples) {
        for (const auto& t : triples) {
            const auto s = index(t.subject);
            const auto o = index(t.object);
            if (s != o) edges.insert({s, o});
        }
    }
};

inline std::map<std::string, double> degree(const std::vector<kgprobe::Triple>& triples) {
    std::map<std::string, double> out;
    for (const auto& t : triples) {
        out[t.subject] += 1.0;
        out[t.object] += 1.0;
    }
    return out;
}

// Enumerates every simple path between every ordered pair, keeps the shortest
// ones and credits each interior node with its share.
inline std::map<std::string, double> betweenness(const std::vector<kgprobe::Triple>& triples) {
    Digraph g(triples);
    const std::size_t n = g.nodes.size();
    std::vector<double> score(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = 0; t < n; ++t) {
            if (s == t) continue;
            std::vector<std::vector<std::size_t>> paths;
            std::vector<std::size_t> cur{s};
            std::vector<bool> on(n, false);
            on[s] = true;
            auto dfs = [&](auto&& self, std::size_t u) -> void {
                if (u == t) {
                    paths.push_back(cur);
                    return;
                }
                for (const auto& [a, b] : g.edges) {
                    if (a != u || on[b]) continue;
                    on[b] = true;
                    cur.push_back(b);
                    self(self, b);
                    cur.pop_back();
                    on[b] = false;
                }
            };
            dfs(dfs, s);
            if (paths.empty()) continue;
            std::size_t shortest = paths.front().size();
            for (const auto& p : paths) shortest = std::min(shortest, p.size());
            double count = 0;
            std::vector<double> through(n, 0.0);
            for (const auto& p : paths) {
                if (p.size() != shortest) continue;
                count += 1;
                for (std::size_t i = 1; i + 1 < p.size(); ++i) through[p[i]] += 1;
            }
            for (std::size_t v = 0; v < n; ++v) score[v] += through[v] / count;
        }
    }
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < n; ++i) out[g.nodes[i]] = score[i];
    return out;
}

// Stationary vector from (I - d M) x = (1 - d)/N 1, with dangling columns
// replaced by the uniform distribution.
inline std::map<std::string, double> pagerank(const std::vector<kgprobe::Triple>& triples, double d = 0.85) {
    Digraph g(triples);
    const auto n = static_cast<Eigen::Index>(g.nodes.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> out_deg(g.nodes.size(), 0.0);
    for (const auto& [a, b] : g.edges) out_deg[a] += 1;
    for (const auto& [a, b] : g.edges) m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = 1.0 / out_deg[a];
    for (Eigen::Index j = 0; j < n; ++j)
        if (out_deg[static_cast<std::size_t>(j)] == 0) m.col(j).setConstant(1.0 / static_cast<double>(n));
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - d * m;
    const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, (1.0 - d) / static_cast<double>(n));
    const Eigen::VectorXd x = a.fullPivLu().solve(rhs);
    std::map<std::string, double> out;
    for (Eigen::Index i = 0; i < n; ++i) out[g.nodes[static_cast<std::size_t>(i)]] = x(i);
    return out;
}

// Exhaustive sign-flip test: share of the 2^n patterns whose |mean| reaches
// the observed |mean|.
inline double exact_permutation_p(const std::vector<double>& diffs) {
    const std::size_t n = diffs.size();
    double obs = 0;
    for (double d : diffs) obs += d;
    obs = std::abs(obs / static_cast<double>(n));
    std::uint64_t count = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (mask >> i & 1U) ? -diffs[i] : diffs[i];
        if (std::abs(s / static_cast<double>(n)) >= obs - 1e-9 * std::max(1.0, obs)) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace oracle
