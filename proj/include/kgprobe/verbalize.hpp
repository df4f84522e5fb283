#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgprobe/kg_core.hpp"
#include "kgprobe/variants.hpp"

namespace kgprobe {

enum class VerbalizeStyle { compact, expanded };

std::optional<VerbalizeStyle> parse_style(std::string_view name) noexcept;
std::string_view style_name(VerbalizeStyle style) noexcept;

struct VerbalizeConfig {
    std::string header = "Knowledge graph facts:\n";
    std::string entity_header = "Knowledge graph entities: ";
    // Per-role sentence with {subject}, {relation} and {object} slots.
    std::map<RelationRole, std::string> sentences;

    static VerbalizeConfig defaults();
};

VerbalizeConfig parse_verbalize_config(const nlohmann::json& doc);

struct PromptContext {
    std::string condition;
    std::string text;
    std::size_t length_proxy = 0;
    // Structured copy of what was verbalized; mock backends read these.
    std::vector<Triple> triples;
    std::vector<std::string> objects;
    bool entities_masked = false;
};

struct Prompt {
    std::string problem_id;
    std::string condition;
    std::string problem_statement;
    std::string full_text;
    PromptContext context;
};

// The dense variant asks for the expanded style; everything else uses the
// requested style. nullopt requests automatic selection.
VerbalizeStyle effective_style(const KgVariant& variant, std::optional<VerbalizeStyle> requested);

// compact: one arrow-joined subject/relation/object line per triple.
// expanded: one role sentence per triple.
// Entity-only variants render a comma list; no_kg renders nothing.
PromptContext verbalize_triples(const KgVariant& variant, VerbalizeStyle style,
                                const VerbalizeConfig& config = VerbalizeConfig::defaults());

// Substitutes the {problem} and {context} slots, each of which must occur
// exactly once. Throws ValidationError otherwise.
Prompt assemble_prompt(const ProblemRecord& problem, const PromptContext& ctx, std::string_view prompt_template);

// Characters (UTF-8 code points) in the context block.
std::size_t context_length_proxy(const PromptContext& ctx);

std::string default_prompt_template();

}  // namespace kgprobe
