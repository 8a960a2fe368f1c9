#pragma once

#include "safesple/values.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace safesple::gsn {

enum class NodeKind { goal, strategy, context, solution, assumption, justification };

enum class SemanticType {
    wind_speed,      // m/s
    temperature,     // degrees C
    visibility,      // km, +inf when unlimited
    precipitation,   // level
    duration,        // minutes
    charge_fraction, // 0..1
    certification,   // certified or not
    flight_hours,    // hours
    identifier,
};

enum class Source { vehicle, weather, pilot, mission, airspace, regulation };

enum class Comparator { less_or_equal, greater_or_equal, within_closed_interval, level_at_most, equals, boolean_true };

const char* to_string(NodeKind k);
const char* to_string(SemanticType t);
const char* to_string(Source s);
const char* to_string(Comparator c);

struct ParameterRef {
    std::string name;
    SemanticType type = SemanticType::identifier;
    Source source = Source::vehicle;
};

/// Whether `v` has the representation used for parameters of type `t`.
bool value_matches(SemanticType t, const Value& v);

/// Reads a JSON scalar as a value of type `t`; nullopt when it does not fit.
/// Visibility accepts the string "unlimited".
std::optional<Value> value_from_json(SemanticType t, const nlohmann::json& j);
nlohmann::json value_to_json(const Value& v);

struct GsnNode {
    std::string id;
    NodeKind kind = NodeKind::goal;
    std::string text;
    /// Placeholder names in order of first appearance in `text`.
    std::vector<std::string> params;
    std::vector<std::string> attached_contexts;
    bool undeveloped = false;
};

/// Names inside `[Name]` placeholders, in order of first appearance.
std::vector<std::string> extract_placeholders(std::string_view text);

/// Replaces each placeholder by `lookup(name)`; placeholders for which
/// lookup returns nullopt are left as written.
template <typename Lookup>
std::string substitute(std::string_view text, Lookup&& lookup);

struct Operand {
    std::optional<std::string> param;
    std::optional<Value> constant;
};

struct EvidenceCheck {
    std::string check_id;
    Comparator comparator = Comparator::equals;
    std::string left;
    std::optional<Operand> right;
    std::optional<Operand> right_upper;
    /// Multiplies the left operand before comparison.
    std::optional<double> margin_factor;

    /// Parameter names referenced, left first.
    std::vector<std::string> parameters() const;
    /// e.g. "2 x [MissionDuration] <= [AvailableFlightTime]"
    std::string describe() const;
};

using Edge = std::pair<std::string, std::string>;

class SafetyCaseTemplate {
public:
    const std::string& id() const noexcept { return id_; }
    const std::string& version() const noexcept { return version_; }
    const std::string& root_goal() const noexcept { return root_; }

    const std::vector<GsnNode>& nodes() const noexcept { return nodes_; }
    bool contains(std::string_view node_id) const;
    /// Throws std::out_of_range for unknown ids.
    const GsnNode& node(std::string_view node_id) const;

    const std::map<std::string, ParameterRef>& parameters() const noexcept { return parameters_; }
    const ParameterRef* parameter(std::string_view name) const;

    const std::vector<Edge>& supported_by() const noexcept { return supported_by_; }
    const std::vector<Edge>& in_context_of() const noexcept { return in_context_of_; }
    const std::map<std::string, EvidenceCheck>& checks() const noexcept { return checks_; }
    const EvidenceCheck* check(std::string_view solution_id) const;

    std::vector<std::string> children(std::string_view node_id) const;
    std::vector<std::string> parents(std::string_view node_id) const;
    /// Solution nodes in declaration order.
    std::vector<std::string> solutions() const;
    /// supportedBy topological order from the root; ties by declaration order.
    std::vector<std::string> topological_order() const;
    /// `node_id` followed by its first-parent ancestors up to the root goal.
    std::vector<std::string> chain_to_root(std::string_view node_id) const;

    friend SafetyCaseTemplate template_from_json(const nlohmann::json& j);

private:
    std::string id_;
    std::string version_;
    std::string root_;
    std::vector<GsnNode> nodes_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::map<std::string, ParameterRef> parameters_;
    std::vector<Edge> supported_by_;
    std::vector<Edge> in_context_of_;
    std::map<std::string, EvidenceCheck> checks_;
};

/// Throws StructureError on cycles, orphan nodes, undeclared placeholders,
/// dangling or ill-typed checks, and malformed fields.
SafetyCaseTemplate template_from_json(const nlohmann::json& j);
/// Also throws ParseError when `source` is not JSON.
SafetyCaseTemplate load_template(std::string_view source);
SafetyCaseTemplate load_template_file(const std::filesystem::path& path);
nlohmann::json to_json(const SafetyCaseTemplate& t);

/// Graph-description text, one node or edge per line.
std::string to_dot(const SafetyCaseTemplate& t);

struct Finding {
    enum class Kind { unpropagated_parameter, missing_check, undeveloped_goal };
    Kind kind;
    std::string node_id;
    std::string message;
};

const char* to_string(Finding::Kind k);

std::vector<Finding> validate_template(const SafetyCaseTemplate& t);

/// Templates ordered by id.
class Catalog {
public:
    Catalog() = default;
    explicit Catalog(std::vector<SafetyCaseTemplate> templates);

    const std::vector<SafetyCaseTemplate>& templates() const noexcept { return templates_; }
    const SafetyCaseTemplate* find(std::string_view id) const;
    bool empty() const noexcept { return templates_.empty(); }

private:
    std::vector<SafetyCaseTemplate> templates_;
};

/// Every *.json file in `dir`.
Catalog load_catalog(const std::filesystem::path& dir);

inline constexpr std::string_view pilot_template_id = "pilot-case";
inline constexpr std::string_view wind_template_id = "wind-case";

template <typename Lookup>
std::string substitute(std::string_view text, Lookup&& lookup) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto open = text.find('[', i);
        if (open == std::string_view::npos) break;
        const auto close = text.find(']', open);
        if (close == std::string_view::npos) break;
        out.append(text.substr(i, open - i));
        const std::string name(text.substr(open + 1, close - open - 1));
        const auto names = extract_placeholders(text.substr(open, close - open + 1));
        std::optional<std::string> replacement;
        if (!names.empty()) replacement = lookup(name);
        if (replacement) out += *replacement;
        else out.append(text.substr(open, close - open + 1));
        i = close + 1;
    }
    out.append(text.substr(i));
    return out;
}

} // namespace safesple::gsn
