#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kgprobe/kg_core.hpp"

namespace kgprobe {

enum class DensityLevel { sparse, medium, dense };
enum class TopologyMode { two_hop, full_path };
enum class ControlKind { random, shuffled, entity_only, rel_skeleton };
enum class Selector { semantic, random, degree, betweenness, pagerank };
enum class RemovalKind { bridge, peripheral, random, role, top };

std::string_view selector_name(Selector s) noexcept;
std::optional<Selector> parse_selector(std::string_view name) noexcept;
inline constexpr Selector kAllSelectors[] = {Selector::semantic, Selector::random, Selector::degree,
                                             Selector::betweenness, Selector::pagerank};

namespace step {
struct NoKg {
    bool operator==(const NoKg&) const = default;
};
struct Density {
    DensityLevel level;
    bool operator==(const Density&) const = default;
};
struct Ontology {
    OntologyTier tier;
    bool operator==(const Ontology&) const = default;
};
struct Topology {
    TopologyMode mode;
    bool operator==(const Topology&) const = default;
};
struct Control {
    ControlKind kind;
    bool operator==(const Control&) const = default;
};
struct TopK {
    Selector selector;
    std::size_t k;
    bool operator==(const TopK&) const = default;
};
struct Holdout {
    bool operator==(const Holdout&) const = default;
};
struct Knockout {
    RemovalKind kind;
    std::size_t count;
    RelationRole role = RelationRole::outcome;   // kind == role
    Selector selector = Selector::semantic;      // kind == top
    bool operator==(const Knockout&) const = default;
};
}  // namespace step

using ConditionStep =
    std::variant<step::NoKg, step::Density, step::Ontology, step::Topology, step::Control, step::TopK, step::Holdout,
                 step::Knockout>;

// A parsed condition tag. Grammar (steps joined by '+'):
//   no_kg | density:{sparse|medium|dense} | ontology:{t1|t3} | topology:{2hop|full_path}
//   | control:{random|shuffled|entity_only|rel_skeleton}
//   | topk:{semantic|random|degree|betweenness|pagerank}:<k>
//   | holdout:outcome
//   | knockout:{bridge|peripheral|random|role.<role>|top.<selector>}:<count>
struct Condition {
    std::vector<ConditionStep> steps;

    std::string tag() const;
    bool operator==(const Condition&) const = default;
};

// Throws ValidationError("condition", ...) on anything outside the grammar.
Condition parse_condition(std::string_view tag);

std::string format_step(const ConditionStep& s);

// Comma-separated list of tags.
std::vector<Condition> parse_condition_list(std::string_view tags);

}  // namespace kgprobe
