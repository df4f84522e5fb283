#include "kgprobe/text.hpp"

#include <cctype>

namespace kgprobe {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

bool is_separator(unsigned char c) { return c < 0x80 && (std::isspace(c) || std::ispunct(c)); }

}  // namespace

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 0x80) c = static_cast<char>(std::tolower(u));
    }
    return out;
}

std::string trim(std::string_view text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && is_space(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(text[e - 1]))) --e;
    return std::string(text.substr(b, e - b));
}

std::string normalize_label(std::string_view label) { return to_lower_ascii(trim(label)); }

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (is_separator(u)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string normalize_phrase(std::string_view text) { return join(tokenize(text), " "); }

bool contains_phrase(std::string_view haystack, std::string_view needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    std::size_t pos = haystack.find(needle);
    while (pos != std::string_view::npos) {
        const bool left_ok = pos == 0 || haystack[pos - 1] == ' ';
        const std::size_t end = pos + needle.size();
        const bool right_ok = end == haystack.size() || haystack[end] == ' ';
        if (left_ok && right_ok) return true;
        pos = haystack.find(needle, pos + 1);
    }
    return false;
}

bool contains_substring(std::string_view haystack, std::string_view needle) {
    return !needle.empty() && haystack.find(needle) != std::string_view::npos;
}

std::size_t utf8_length(std::string_view text) {
    std::size_t n = 0;
    for (char c : text) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words = {
        "a",       "about",   "above",   "after",   "again",  "against", "all",     "also",
        "am",      "an",      "and",     "any",     "are",    "as",      "at",      "be",
        "because", "been",    "before",  "being",   "below",  "between", "both",    "but",
        "by",      "can",     "could",   "did",     "do",     "does",    "doing",   "down",
        "during",  "each",    "either",  "few",     "for",    "from",    "further", "had",
        "has",     "have",    "having",  "he",      "her",    "here",    "hers",    "him",
        "his",     "how",     "however", "if",      "in",     "into",    "is",      "it",
        "its",     "itself",  "just",    "may",     "me",     "might",   "more",    "most",
        "must",    "my",      "no",      "nor",     "not",    "now",     "of",      "off",
        "on",      "once",    "only",    "or",      "other",  "our",     "ours",    "out",
        "over",    "own",     "same",    "shall",   "she",    "should",  "so",      "some",
        "such",    "than",    "that",    "the",     "their",  "theirs",  "them",    "then",
        "there",   "these",   "they",    "this",    "those",  "through", "thus",    "to",
        "too",     "under",   "until",   "up",      "upon",   "very",    "via",     "was",
        "we",      "were",    "what",    "when",    "where",  "whether", "which",   "while",
        "who",     "whom",    "why",     "will",    "with",   "within",  "without", "would",
        "yet",     "you",     "your",    "yours",
    };
    return words;
}

TermNormalizer::TermNormalizer() : TermNormalizer(default_stopwords()) {}

TermNormalizer::TermNormalizer(const std::vector<std::string>& stopwords) {
    for (const auto& w : stopwords) stopwords_.insert(to_lower_ascii(w));
}

std::vector<std::string> TermNormalizer::term_sequence(std::string_view text) const {
    std::vector<std::string> out;
    for (auto& tok : tokenize(text)) {
        if (tok.size() < 2 || is_stopword(tok)) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

std::set<std::string> TermNormalizer::terms(std::string_view text) const {
    auto seq = term_sequence(text);
    return {std::make_move_iterator(seq.begin()), std::make_move_iterator(seq.end())};
}

}  // namespace kgprobe
