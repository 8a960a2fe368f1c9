#pragma once

#include "safesple/evidence/evidence.hpp"
#include "safesple/gsn/binding.hpp"
#include "safesple/gsn/template.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace safesple::instantiation {

enum class Status { satisfied, violated, unresolved };
const char* to_string(Status s);
std::optional<Status> parse_status(std::string_view s);

/// Node status from its children: violated if any child is violated,
/// satisfied if all are (and there is at least one), otherwise unresolved.
Status combine(const std::vector<Status>& children);

/// One operand of an evaluated check: a parameter (bound or not) or a
/// template constant, which has no provenance.
struct OperandValue {
    std::optional<std::string> parameter;
    std::optional<Value> value;
    std::optional<Provenance> provenance;
};

struct CheckEvaluation {
    std::string check_id;
    std::string description;
    Status status = Status::unresolved;
    std::vector<OperandValue> operands; // left, right, rightUpper
    std::optional<double> margin_factor;
};

/// Evaluates `check` against `bindings`. Unresolved when any operand is
/// unbound. Throws BindingTypeError when a bound value does not have the
/// representation the comparator needs.
CheckEvaluation evaluate_check(const gsn::EvidenceCheck& check, const std::map<std::string, Binding>& bindings);

struct InstanceNode {
    std::string id; // "<instanceId>:<templateNodeId>"
    std::string template_node_id;
    gsn::NodeKind kind = gsn::NodeKind::goal;
    std::string text;
    /// Contexts report whether all their placeholders are bound; they do not
    /// take part in propagation.
    Status status = Status::unresolved;
    bool undeveloped = false;
    std::optional<CheckEvaluation> evaluation;
};

struct InstanceEdge {
    std::string from;
    std::string to;
    std::string relation; // supportedBy | inContextOf
};

struct SafetyCaseInstance {
    std::string instance_id;
    std::string template_id;
    std::string template_version;
    /// Only the template's parameters.
    std::map<std::string, Binding> bindings;
    std::set<std::string> unresolved;
    std::vector<InstanceNode> nodes; // template declaration order
    std::vector<InstanceEdge> edges;
    std::map<std::string, Status> node_statuses; // template node id -> status
    std::map<std::string, std::string> trace_links; // instance node id -> template node id
    Status top_goal_status = Status::unresolved;
    evidence::Timestamp generated_at{};

    const InstanceNode& node(std::string_view template_node_id) const;
};

/// Binds `bundle` (plus feature-class values selected by the bundle's
/// configuration under `schema`) to `t`, evaluates every check and
/// propagates statuses to the root goal. Feature-class values fill
/// parameters the evidence left unbound or bound only by a default rule;
/// ranges contribute their lower bound. The instance id is the first 16
/// hex digits of a SHA-256 over template id, version and the canonical
/// bindings.
///
/// Throws BindingTypeError when a bound value does not fit its parameter's
/// semantic type, std::invalid_argument when `schema` belongs to another
/// template. A default-constructed schema maps nothing.
SafetyCaseInstance instantiate(const gsn::SafetyCaseTemplate& t, const gsn::BindingSchema& schema,
                               const evidence::EvidenceBundle& bundle);

nlohmann::json to_json(const SafetyCaseInstance& inst);
/// Graph-description text; statuses are node attributes.
std::string to_dot(const SafetyCaseInstance& inst);

/// Candidate templates in evaluation order: the pilot case first, then the
/// wind case unless `pilot_case` is known to be satisfied. Throws
/// CatalogError when the catalog is empty or has no pilot case.
std::vector<std::string> select_templates(const gsn::Catalog& catalog, std::optional<Status> pilot_case = std::nullopt);

struct EvidenceRequirement {
    std::string solution_id;
    std::string check_id;
    std::vector<std::string> parameters;
    std::string description;
    bool unresolved = true;
    std::vector<std::string> missing;
};

/// One item per solution node with a check, in declaration order. Without
/// a bundle every item is flagged.
std::vector<EvidenceRequirement> required_evidence(const gsn::SafetyCaseTemplate& t,
                                                   const evidence::EvidenceBundle* bundle = nullptr);
nlohmann::json to_json(const EvidenceRequirement& r);

struct ExplanationEntry {
    std::string instance_node_id;
    std::string template_node_id;
    Status status = Status::unresolved;
    /// e.g. "[Gusts] 8 m/s (weather-service) <= [MaxAllowedWindSpd] 3 m/s (default)"
    std::string condition;
    std::vector<OperandValue> operands;
    /// Template node ids from the leaf up to the root goal.
    std::vector<std::string> chain;
};

struct Explanation {
    std::string instance_id;
    std::string template_id;
    Status top_goal_status = Status::unresolved;
    std::vector<ExplanationEntry> entries;
};

/// One entry per leaf (node without supportedBy children) that is not
/// satisfied. Throws ExplainError when the top goal is satisfied.
Explanation explain_denial(const SafetyCaseInstance& inst, const gsn::SafetyCaseTemplate& t);
nlohmann::json to_json(const Explanation& e);

/// "8 m/s", "25 C", "unlimited", "light".
std::string format_quantity(const Value& v, gsn::SemanticType type);

} // namespace safesple::instantiation
