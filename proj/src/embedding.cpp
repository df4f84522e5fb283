#include "kgprobe/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "kgprobe/errors.hpp"
#include "kgprobe/rng.hpp"

namespace kgprobe {

HashingEmbedder::HashingEmbedder(TermNormalizer normalizer, std::size_t dimension)
    : normalizer_(std::move(normalizer)), dimension_(dimension) {
    if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::size_t HashingEmbedder::bucket(std::string_view term) const {
    return static_cast<std::size_t>(fnv1a64(term) % dimension_);
}

double HashingEmbedder::sign(std::string_view term) const {
    return (splitmix64(fnv1a64(term)) >> 63) ? -1.0 : 1.0;
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension_));
    for (const auto& term : normalizer_.term_sequence(text))
        v[static_cast<Eigen::Index>(bucket(term))] += sign(term);
    const double norm = v.norm();
    // Signed collisions can cancel, so test the norm rather than the term count.
    if (norm == 0.0) throw UnembeddableError();
    return {id(), v / norm};
}

HttpEmbedder::HttpEmbedder(HttpEmbedderOptions options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw ConfigError("http embedder requires an endpoint");
}

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
    const nlohmann::json body{{"text", std::string(text)}};
    const auto response = with_retries(options_.retry, [&] {
        return post_json(options_.endpoint, body, options_.headers, options_.timeout);
    });
    if (response.status != 200)
        throw ParseError("embedding endpoint returned status " + std::to_string(response.status), response.body);

    Eigen::VectorXd v;
    try {
        const auto doc = nlohmann::json::parse(response.body);
        const auto& arr = at_path(doc, options_.vector_path);
        v.resize(static_cast<Eigen::Index>(arr.size()));
        for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr.at(i).get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed embedding response: ") + e.what(), response.body);
    }
    if (v.size() == 0 || v.norm() == 0.0) throw UnembeddableError();

    std::lock_guard lock(dimension_mutex_);
    if (dimension_ == 0) dimension_ = static_cast<std::size_t>(v.size());
    if (dimension_ != static_cast<std::size_t>(v.size()))
        throw ParseError("embedding dimension changed from " + std::to_string(dimension_) + " to " +
                             std::to_string(v.size()),
                         response.body);
    return {id(), std::move(v)};
}

CachedEmbedder::CachedEmbedder(std::shared_ptr<const EmbeddingProvider> inner) : inner_(std::move(inner)) {
    if (!inner_) throw ConfigError("cached embedder needs a provider");
}

EmbeddingVector CachedEmbedder::embed(std::string_view text) const {
    const std::string key(text);
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto v = inner_->embed(text);
    std::unique_lock lock(mutex_);
    return cache_.try_emplace(key, std::move(v)).first->second;
}

std::size_t CachedEmbedder::size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size())
        throw ValidationError("embedding", "dimension mismatch between vectors");
    const double denom = a.values.norm() * b.values.norm();
    if (denom == 0.0) throw UnembeddableError();
    const double d = std::clamp(1.0 - a.values.dot(b.values) / denom, 0.0, 2.0);
    return d < 1e-12 ? 0.0 : d;
}

double semantic_distance(std::string_view a, std::string_view b, const EmbeddingProvider& provider) {
    const auto ea = provider.embed(a);
    if (a == b) return 0.0;
    return cosine_distance(ea, provider.embed(b));
}

}  // namespace kgprobe
