#include "kgprobe/verbalize.hpp"

#include "kgprobe/errors.hpp"
#include "kgprobe/text.hpp"

namespace kgprobe {

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + needle.size()))
        ++n;
    return n;
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
        text.replace(pos, from.size(), to);
}

std::string readable_relation(std::string relation) {
    for (auto& c : relation) {
        if (c == '_') c = ' ';
    }
    return relation;
}

}  // namespace

std::optional<VerbalizeStyle> parse_style(std::string_view name) noexcept {
    if (name == "compact") return VerbalizeStyle::compact;
    if (name == "expanded") return VerbalizeStyle::expanded;
    return std::nullopt;
}

std::string_view style_name(VerbalizeStyle style) noexcept {
    return style == VerbalizeStyle::compact ? "compact" : "expanded";
}

VerbalizeConfig VerbalizeConfig::defaults() {
    VerbalizeConfig c;
    c.sentences = {
        {RelationRole::failure, "The failure mode of {subject} is {object}, recorded as {relation}."},
        {RelationRole::intervention, "The intervention applied to {subject} is {object}, recorded as {relation}."},
        {RelationRole::mechanism, "{subject} acts through the mechanism {object}, recorded as {relation}."},
        {RelationRole::property, "The target property for {subject} is {object}, recorded as {relation}."},
        {RelationRole::component, "The component involved in {subject} is {object}, recorded as {relation}."},
        {RelationRole::system, "The material system of {subject} is {object}, recorded as {relation}."},
        {RelationRole::outcome, "The claimed outcome for {subject} is {object}, recorded as {relation}."},
    };
    return c;
}

VerbalizeConfig parse_verbalize_config(const nlohmann::json& doc) {
    auto c = VerbalizeConfig::defaults();
    if (doc.is_null()) return c;
    c.header = doc.value("header", c.header);
    c.entity_header = doc.value("entity_header", c.entity_header);
    if (doc.contains("sentences")) {
        for (const auto& [key, value] : doc.at("sentences").items()) {
            auto role = parse_role(key);
            if (!role) throw ConfigError("verbalize.sentences: unknown role '" + key + "'");
            c.sentences[*role] = value.get<std::string>();
        }
    }
    for (auto role : kAllRoles) {
        if (!c.sentences.count(role))
            throw ConfigError("verbalize.sentences: missing role '" + std::string(role_name(role)) + "'");
    }
    return c;
}

VerbalizeStyle effective_style(const KgVariant& variant, std::optional<VerbalizeStyle> requested) {
    if (requested) return *requested;
    return variant.expanded ? VerbalizeStyle::expanded : VerbalizeStyle::compact;
}

PromptContext verbalize_triples(const KgVariant& variant, VerbalizeStyle style, const VerbalizeConfig& config) {
    PromptContext ctx;
    ctx.condition = variant.condition;
    ctx.entities_masked = variant.entities_masked;
    ctx.objects = variant.objects();
    if (variant.relations_removed) {
        if (!variant.entities.empty()) ctx.text = config.entity_header + join(variant.entities, ", ") + "\n";
    } else if (!variant.triples.empty()) {
        ctx.triples = variant.triples;
        std::string text = config.header;
        for (const auto& t : variant.triples) {
            if (style == VerbalizeStyle::compact) {
                text += t.subject + " —" + t.relation + "→ " + t.object + "\n";
            } else {
                std::string sentence = config.sentences.at(t.role);
                replace_all(sentence, "{subject}", t.subject);
                replace_all(sentence, "{relation}", readable_relation(t.relation));
                replace_all(sentence, "{object}", t.object);
                text += sentence + "\n";
            }
        }
        ctx.text = std::move(text);
    }
    ctx.length_proxy = utf8_length(ctx.text);
    return ctx;
}

Prompt assemble_prompt(const ProblemRecord& problem, const PromptContext& ctx, std::string_view prompt_template) {
    if (count_occurrences(prompt_template, "{problem}") != 1)
        throw ValidationError("template", "must contain the {problem} slot exactly once");
    if (count_occurrences(prompt_template, "{context}") != 1)
        throw ValidationError("template", "must contain the {context} slot exactly once");

    std::string text(prompt_template);
    const auto p = text.find("{problem}");
    const auto c = text.find("{context}");
    // Substitute the later slot first so the earlier offset stays valid.
    if (p > c) {
        text.replace(p, 9, problem.problem_statement);
        text.replace(c, 9, ctx.text);
    } else {
        text.replace(c, 9, ctx.text);
        text.replace(p, 9, problem.problem_statement);
    }
    if (count_occurrences(text, problem.problem_statement) != 1)
        throw ValidationError("problem_statement", "must appear exactly once in the assembled prompt");

    return Prompt{problem.id, ctx.condition, problem.problem_statement, std::move(text), ctx};
}

std::size_t context_length_proxy(const PromptContext& ctx) { return utf8_length(ctx.text); }

std::string default_prompt_template() {
    return "You are a materials scientist. Propose one concise, testable scientific hypothesis that addresses the "
           "problem below.\n\nProblem: {problem}\n\n{context}\nHypothesis:";
}

}  // namespace kgprobe
