#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace kgprobe {

std::string to_lower_ascii(std::string_view text);

// Lowercase and trim. Node labels are compared in this form.
std::string normalize_label(std::string_view label);

// Lowercase, ASCII punctuation mapped to whitespace, split on whitespace.
// No filtering; order and repeats are kept.
std::vector<std::string> tokenize(std::string_view text);

// tokenize() joined by single spaces. Two strings that differ only in case,
// punctuation or whitespace map to the same phrase.
std::string normalize_phrase(std::string_view text);

// Whole-phrase containment on normalize_phrase() output: the needle must
// start and end on token boundaries of the haystack. Empty needle never
// matches.
bool contains_phrase(std::string_view normalized_haystack, std::string_view normalized_needle);

// Plain substring containment on normalize_phrase() output.
bool contains_substring(std::string_view normalized_haystack, std::string_view normalized_needle);

// Number of UTF-8 code points. Invalid continuation bytes count as one each.
std::size_t utf8_length(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view text);

const std::vector<std::string>& default_stopwords();

// Content-word extraction shared by the metrics, the triple ranker and the
// hashing embedder.
class TermNormalizer {
public:
    TermNormalizer();
    explicit TermNormalizer(const std::vector<std::string>& stopwords);

    // Distinct content words: tokenize(), then drop stopwords and tokens
    // shorter than two bytes.
    std::set<std::string> terms(std::string_view text) const;

    // Same filter as terms() but keeps order and repeats.
    std::vector<std::string> term_sequence(std::string_view text) const;

    bool is_stopword(const std::string& token) const { return stopwords_.count(token) != 0; }
    std::size_t stopword_count() const noexcept { return stopwords_.size(); }

private:
    std::unordered_set<std::string> stopwords_;
};

}  // namespace kgprobe
