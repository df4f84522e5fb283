#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include <Eigen/Dense>

#include "kgprobe/http.hpp"
#include "kgprobe/text.hpp"

namespace kgprobe {

struct EmbeddingVector {
    std::string provider;
    Eigen::VectorXd values;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    // Throws UnembeddableError for text without content words.
    virtual EmbeddingVector embed(std::string_view text) const = 0;
};

// Deterministic signed feature hashing over content words. Each term lands in
// bucket fnv1a64(term) % D with a sign taken from a remixed hash bit; counts
// accumulate and the result is L2-normalized.
class HashingEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDefaultDimension = 4096;

    explicit HashingEmbedder(TermNormalizer normalizer = {}, std::size_t dimension = kDefaultDimension);

    std::string id() const override { return "hashing-" + std::to_string(dimension_); }
    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) const override;

    // Bucket and sign used for one term; exposed for tests.
    std::size_t bucket(std::string_view term) const;
    double sign(std::string_view term) const;

private:
    TermNormalizer normalizer_;
    std::size_t dimension_;
};

struct HttpEmbedderOptions {
    std::string endpoint;
    std::string vector_path = "vector";
    std::map<std::string, std::string> headers;
    RetryPolicy retry;
    std::chrono::seconds timeout{60};
};

// POSTs {"text": ...} and reads a numeric array at `vector_path`.
class HttpEmbedder final : public EmbeddingProvider {
public:
    explicit HttpEmbedder(HttpEmbedderOptions options);

    std::string id() const override { return "http:" + options_.endpoint; }
    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) const override;

private:
    HttpEmbedderOptions options_;
    mutable std::size_t dimension_ = 0;
    mutable std::mutex dimension_mutex_;
};

// Memoizes another provider. Concurrent lookups share a reader lock; inserts
// take the writer lock.
class CachedEmbedder final : public EmbeddingProvider {
public:
    explicit CachedEmbedder(std::shared_ptr<const EmbeddingProvider> inner);

    std::string id() const override { return inner_->id(); }
    std::size_t dimension() const override { return inner_->dimension(); }
    EmbeddingVector embed(std::string_view text) const override;

    std::size_t size() const;

private:
    std::shared_ptr<const EmbeddingProvider> inner_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::string, EmbeddingVector> cache_;
};

// 1 - cosine, clamped to [0, 2]. Values within 1e-12 of zero snap to 0 so
// identical bags of words compare exactly equal.
double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b);

double semantic_distance(std::string_view a, std::string_view b, const EmbeddingProvider& provider);

}  // namespace kgprobe
