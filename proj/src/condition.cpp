#include "kgprobe/condition.hpp"

#include <charconv>

#include "kgprobe/errors.hpp"
#include "kgprobe/text.hpp"

namespace kgprobe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(std::string_view tag, const std::string& why) {
    throw ValidationError("condition", "'" + std::string(tag) + "': " + why);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto end = s.find(sep, pos);
        out.push_back(s.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return out;
}

std::size_t parse_count(std::string_view tag, std::string_view text, std::size_t min_value) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        bad(tag, "expected a non-negative integer, got '" + std::string(text) + "'");
    if (value < min_value) bad(tag, "count must be at least " + std::to_string(min_value));
    return value;
}

ConditionStep parse_step(std::string_view tag, std::string_view text) {
    const auto parts = split(text, ':');
    const auto head = parts[0];
    auto need = [&](std::size_t n) {
        if (parts.size() != n) bad(tag, "step '" + std::string(text) + "' has the wrong number of fields");
    };
    if (head == "no_kg") {
        need(1);
        return step::NoKg{};
    }
    if (head == "density") {
        need(2);
        if (parts[1] == "sparse") return step::Density{DensityLevel::sparse};
        if (parts[1] == "medium") return step::Density{DensityLevel::medium};
        if (parts[1] == "dense") return step::Density{DensityLevel::dense};
        bad(tag, "unknown density level");
    }
    if (head == "ontology") {
        need(2);
        if (parts[1] == "t1") return step::Ontology{OntologyTier::t1};
        if (parts[1] == "t3") return step::Ontology{OntologyTier::t3};
        bad(tag, "unknown ontology tier");
    }
    if (head == "topology") {
        need(2);
        if (parts[1] == "2hop") return step::Topology{TopologyMode::two_hop};
        if (parts[1] == "full_path") return step::Topology{TopologyMode::full_path};
        bad(tag, "unknown topology mode");
    }
    if (head == "control") {
        need(2);
        if (parts[1] == "random") return step::Control{ControlKind::random};
        if (parts[1] == "shuffled") return step::Control{ControlKind::shuffled};
        if (parts[1] == "entity_only") return step::Control{ControlKind::entity_only};
        if (parts[1] == "rel_skeleton") return step::Control{ControlKind::rel_skeleton};
        bad(tag, "unknown control");
    }
    if (head == "topk") {
        need(3);
        auto sel = parse_selector(parts[1]);
        if (!sel) bad(tag, "unknown selector '" + std::string(parts[1]) + "'");
        return step::TopK{*sel, parse_count(tag, parts[2], 1)};
    }
    if (head == "holdout") {
        need(2);
        if (parts[1] != "outcome") bad(tag, "only holdout:outcome is defined");
        return step::Holdout{};
    }
    if (head == "knockout") {
        need(3);
        const auto kind = parts[1];
        step::Knockout k{RemovalKind::bridge, 0};
        if (kind == "bridge") {
            k.kind = RemovalKind::bridge;
        } else if (kind == "peripheral") {
            k.kind = RemovalKind::peripheral;
        } else if (kind == "random") {
            k.kind = RemovalKind::random;
        } else if (kind.substr(0, 5) == "role.") {
            auto role = parse_role(kind.substr(5));
            if (!role) bad(tag, "unknown role '" + std::string(kind.substr(5)) + "'");
            k.kind = RemovalKind::role;
            k.role = *role;
        } else if (kind.substr(0, 4) == "top.") {
            auto sel = parse_selector(kind.substr(4));
            if (!sel) bad(tag, "unknown selector '" + std::string(kind.substr(4)) + "'");
            k.kind = RemovalKind::top;
            k.selector = *sel;
        } else {
            bad(tag, "unknown knockout kind '" + std::string(kind) + "'");
        }
        k.count = parse_count(tag, parts[2], k.kind == RemovalKind::role ? 0 : 1);
        return k;
    }
    bad(tag, "unknown step '" + std::string(head) + "'");
}

}  // namespace

std::string_view selector_name(Selector s) noexcept {
    switch (s) {
        case Selector::semantic: return "semantic";
        case Selector::random: return "random";
        case Selector::degree: return "degree";
        case Selector::betweenness: return "betweenness";
        case Selector::pagerank: return "pagerank";
    }
    return "semantic";
}

std::optional<Selector> parse_selector(std::string_view name) noexcept {
    for (auto s : kAllSelectors) {
        if (selector_name(s) == name) return s;
    }
    return std::nullopt;
}

std::string format_step(const ConditionStep& s) {
    return std::visit(
        overloaded{
            [](const step::NoKg&) -> std::string { return "no_kg"; },
            [](const step::Density& d) -> std::string {
                return d.level == DensityLevel::sparse ? "density:sparse"
                       : d.level == DensityLevel::medium ? "density:medium"
                                                         : "density:dense";
            },
            [](const step::Ontology& o) -> std::string { return "ontology:" + std::string(tier_name(o.tier)); },
            [](const step::Topology& t) -> std::string {
                return t.mode == TopologyMode::two_hop ? "topology:2hop" : "topology:full_path";
            },
            [](const step::Control& c) -> std::string {
                switch (c.kind) {
                    case ControlKind::random: return "control:random";
                    case ControlKind::shuffled: return "control:shuffled";
                    case ControlKind::entity_only: return "control:entity_only";
                    case ControlKind::rel_skeleton: return "control:rel_skeleton";
                }
                return "";
            },
            [](const step::TopK& t) -> std::string {
                return "topk:" + std::string(selector_name(t.selector)) + ":" + std::to_string(t.k);
            },
            [](const step::Holdout&) -> std::string { return "holdout:outcome"; },
            [](const step::Knockout& k) -> std::string {
                std::string kind;
                switch (k.kind) {
                    case RemovalKind::bridge: kind = "bridge"; break;
                    case RemovalKind::peripheral: kind = "peripheral"; break;
                    case RemovalKind::random: kind = "random"; break;
                    case RemovalKind::role: kind = "role." + std::string(role_name(k.role)); break;
                    case RemovalKind::top: kind = "top." + std::string(selector_name(k.selector)); break;
                }
                return "knockout:" + kind + ":" + std::to_string(k.count);
            },
        },
        s);
}

std::string Condition::tag() const {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out += '+';
        out += format_step(steps[i]);
    }
    return out;
}

Condition parse_condition(std::string_view tag) {
    if (tag.empty()) bad(tag, "empty condition");
    Condition c;
    for (auto part : split(tag, '+')) {
        if (part.empty()) bad(tag, "empty step");
        c.steps.push_back(parse_step(tag, part));
    }
    if (c.steps.size() > 1) {
        for (const auto& s : c.steps) {
            if (std::holds_alternative<step::NoKg>(s)) bad(tag, "no_kg cannot be composed");
        }
    }
    return c;
}

std::vector<Condition> parse_condition_list(std::string_view tags) {
    std::vector<Condition> out;
    for (auto part : split(tags, ',')) {
        auto t = trim(part);
        if (!t.empty()) out.push_back(parse_condition(t));
    }
    return out;
}

}  // namespace kgprobe
