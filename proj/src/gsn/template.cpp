#include "safesple/gsn/template.hpp"

#include "safesple/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace safesple::gsn {

using nlohmann::json;

namespace {

constexpr std::array node_kind_names{"goal", "strategy", "context", "solution", "assumption", "justification"};
constexpr std::array semantic_type_names{"windSpeed", "temperature",    "visibility",  "precipitation", "duration",
                                         "chargeFraction", "certification", "flightHours", "identifier"};
constexpr std::array source_names{"vehicle", "weather", "pilot", "mission", "airspace", "regulation"};
constexpr std::array comparator_names{"lessOrEqual",  "greaterOrEqual", "withinClosedInterval",
                                      "levelAtMost", "equals",         "booleanTrue"};

template <typename E, std::size_t N>
std::optional<E> lookup_name(const std::array<const char*, N>& names, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i)
        if (s == names[i]) return static_cast<E>(i);
    return std::nullopt;
}

bool is_parameter_name(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); });
}

bool is_numeric(SemanticType t) {
    switch (t) {
    case SemanticType::wind_speed:
    case SemanticType::temperature:
    case SemanticType::visibility:
    case SemanticType::duration:
    case SemanticType::charge_fraction:
    case SemanticType::flight_hours: return true;
    default: return false;
    }
}

[[noreturn]] void structure(const std::string& where, const std::string& message) {
    throw StructureError(where.empty() ? message : where + ": " + message);
}

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) structure(where, std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string string_field(const json& j, const char* key, const std::string& where) {
    const auto& v = field(j, key, where);
    if (!v.is_string() || v.get_ref<const std::string&>().empty())
        structure(where, std::string("field '") + key + "' must be a non-empty string");
    return v.get<std::string>();
}

std::vector<Edge> edges(const json& j, const char* key) {
    std::vector<Edge> out;
    if (!j.contains(key)) return out;
    const auto& list = j.at(key);
    if (!list.is_array()) structure(key, "must be a list of [from, to] pairs");
    for (const auto& e : list) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            structure(key, "every edge must be a [from, to] pair of node ids");
        out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return out;
}

std::size_t line_of(std::string_view text, std::size_t byte, std::size_t& column) {
    std::size_t line = 1;
    column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return line;
}

} // namespace

const char* to_string(NodeKind k) { return node_kind_names[static_cast<std::size_t>(k)]; }
const char* to_string(SemanticType t) { return semantic_type_names[static_cast<std::size_t>(t)]; }
const char* to_string(Source s) { return source_names[static_cast<std::size_t>(s)]; }
const char* to_string(Comparator c) { return comparator_names[static_cast<std::size_t>(c)]; }

const char* to_string(Finding::Kind k) {
    switch (k) {
    case Finding::Kind::unpropagated_parameter: return "unpropagated-parameter";
    case Finding::Kind::missing_check: return "missing-check";
    case Finding::Kind::undeveloped_goal: return "undeveloped-goal";
    }
    return "?";
}

bool value_matches(SemanticType t, const Value& v) {
    if (is_numeric(t)) return std::holds_alternative<double>(v) && !std::isnan(std::get<double>(v));
    switch (t) {
    case SemanticType::precipitation: return std::holds_alternative<Precipitation>(v);
    case SemanticType::certification: return std::holds_alternative<bool>(v);
    default: return std::holds_alternative<std::string>(v);
    }
}

std::optional<Value> value_from_json(SemanticType t, const json& j) {
    if (is_numeric(t)) {
        if (j.is_number()) return Value{j.get<double>()};
        if (t == SemanticType::visibility && j == "unlimited") return Value{HUGE_VAL};
        return std::nullopt;
    }
    switch (t) {
    case SemanticType::precipitation:
        if (j.is_string())
            if (auto p = parse_precipitation(j.get_ref<const std::string&>())) return Value{*p};
        return std::nullopt;
    case SemanticType::certification:
        if (j.is_boolean()) return Value{j.get<bool>()};
        return std::nullopt;
    default:
        if (j.is_string()) return Value{j.get<std::string>()};
        return std::nullopt;
    }
}

json value_to_json(const Value& v) {
    struct {
        json operator()(bool b) const { return b; }
        json operator()(double d) const { return std::isinf(d) ? json("unlimited") : json(d); }
        json operator()(Precipitation p) const { return to_string(p); }
        json operator()(const std::string& s) const { return s; }
    } visitor;
    return std::visit(visitor, v);
}

std::vector<std::string> extract_placeholders(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while ((i = text.find('[', i)) != std::string_view::npos) {
        const auto close = text.find(']', i);
        if (close == std::string_view::npos) break;
        const auto name = text.substr(i + 1, close - i - 1);
        if (is_parameter_name(name) && std::find(out.begin(), out.end(), name) == out.end())
            out.emplace_back(name);
        i = close + 1;
    }
    return out;
}

std::vector<std::string> EvidenceCheck::parameters() const {
    std::vector<std::string> out{left};
    for (const auto* op : {&right, &right_upper})
        if (*op && (*op)->param && std::find(out.begin(), out.end(), *(*op)->param) == out.end())
            out.push_back(*(*op)->param);
    return out;
}

std::string EvidenceCheck::describe() const {
    const auto operand = [](const std::optional<Operand>& op) {
        if (!op) return std::string("?");
        return op->param ? "[" + *op->param + "]" : format_value(*op->constant);
    };
    std::string lhs = "[" + left + "]";
    if (margin_factor) lhs = format_value(*margin_factor) + " x " + lhs;
    switch (comparator) {
    case Comparator::less_or_equal: return lhs + " <= " + operand(right);
    case Comparator::greater_or_equal: return lhs + " >= " + operand(right);
    case Comparator::within_closed_interval:
        return lhs + " in [" + operand(right) + ", " + operand(right_upper) + "]";
    case Comparator::level_at_most: return lhs + " at most " + operand(right);
    case Comparator::equals: return lhs + " = " + operand(right);
    case Comparator::boolean_true: return lhs + " is true";
    }
    return lhs;
}

bool SafetyCaseTemplate::contains(std::string_view node_id) const { return index_.find(node_id) != index_.end(); }

const GsnNode& SafetyCaseTemplate::node(std::string_view node_id) const {
    const auto it = index_.find(node_id);
    if (it == index_.end()) throw std::out_of_range("unknown node " + std::string(node_id));
    return nodes_[it->second];
}

const ParameterRef* SafetyCaseTemplate::parameter(std::string_view name) const {
    const auto it = parameters_.find(std::string(name));
    return it == parameters_.end() ? nullptr : &it->second;
}

const EvidenceCheck* SafetyCaseTemplate::check(std::string_view solution_id) const {
    const auto it = checks_.find(std::string(solution_id));
    return it == checks_.end() ? nullptr : &it->second;
}

std::vector<std::string> SafetyCaseTemplate::children(std::string_view node_id) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : supported_by_)
        if (from == node_id) out.push_back(to);
    return out;
}

std::vector<std::string> SafetyCaseTemplate::parents(std::string_view node_id) const {
    std::vector<std::string> out;
    for (const auto& [from, to] : supported_by_)
        if (to == node_id) out.push_back(from);
    return out;
}

std::vector<std::string> SafetyCaseTemplate::solutions() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.kind == NodeKind::solution) out.push_back(n.id);
    return out;
}

std::vector<std::string> SafetyCaseTemplate::topological_order() const {
    std::map<std::string, int> indegree;
    std::set<std::string> in_tree{root_};
    for (const auto& [from, to] : supported_by_) {
        ++indegree[to];
        in_tree.insert(from);
        in_tree.insert(to);
    }
    std::vector<std::string> out;
    std::set<std::string> done;
    while (out.size() < in_tree.size()) {
        bool progressed = false;
        for (const auto& n : nodes_) {
            if (!in_tree.count(n.id) || done.count(n.id) || indegree[n.id] != 0) continue;
            out.push_back(n.id);
            done.insert(n.id);
            for (const auto& c : children(n.id)) --indegree[c];
            progressed = true;
            break;
        }
        if (!progressed) break;
    }
    return out;
}

std::vector<std::string> SafetyCaseTemplate::chain_to_root(std::string_view node_id) const {
    std::vector<std::string> out{std::string(node_id)};
    for (auto ps = parents(node_id); !ps.empty(); ps = parents(out.back())) {
        out.push_back(ps.front());
        if (out.size() > nodes_.size()) break;
    }
    return out;
}

SafetyCaseTemplate template_from_json(const json& j) {
    if (!j.is_object()) structure("", "template must be an object");
    SafetyCaseTemplate t;
    t.id_ = string_field(j, "templateId", "");
    t.version_ = string_field(j, "version", t.id_);
    t.root_ = string_field(j, "rootGoal", t.id_);

    if (j.contains("parameters")) {
        const auto& ps = j.at("parameters");
        if (!ps.is_array()) structure("parameters", "must be a list");
        for (const auto& p : ps) {
            ParameterRef ref;
            ref.name = string_field(p, "name", "parameters");
            const std::string where = "parameter " + ref.name;
            if (!is_parameter_name(ref.name)) structure(where, "name must match [A-Za-z][A-Za-z0-9]*");
            const auto type = lookup_name<SemanticType>(semantic_type_names, string_field(p, "type", where));
            if (!type) structure(where, "unknown type " + p.at("type").get<std::string>());
            const auto source = lookup_name<Source>(source_names, string_field(p, "source", where));
            if (!source) structure(where, "unknown source " + p.at("source").get<std::string>());
            ref.type = *type;
            ref.source = *source;
            if (!t.parameters_.emplace(ref.name, ref).second) structure(where, "declared twice");
        }
    }

    const auto& ns = field(j, "nodes", t.id_);
    if (!ns.is_array() || ns.empty()) structure("nodes", "must be a non-empty list");
    for (const auto& n : ns) {
        GsnNode node;
        node.id = string_field(n, "id", "nodes");
        const std::string where = "node " + node.id;
        const auto kind = lookup_name<NodeKind>(node_kind_names, string_field(n, "kind", where));
        if (!kind) structure(where, "unknown kind " + n.at("kind").get<std::string>());
        node.kind = *kind;
        if (!field(n, "text", where).is_string()) structure(where, "text must be a string");
        node.text = n.at("text").get<std::string>();
        node.params = extract_placeholders(node.text);
        for (const auto& p : node.params)
            if (!t.parameters_.count(p)) structure(where, "placeholder [" + p + "] is not a declared parameter");
        if (n.contains("undeveloped")) {
            if (!n.at("undeveloped").is_boolean()) structure(where, "undeveloped must be a boolean");
            node.undeveloped = n.at("undeveloped").get<bool>();
            if (node.undeveloped && node.kind != NodeKind::goal && node.kind != NodeKind::strategy)
                structure(where, "only goals and strategies can be undeveloped");
        }
        if (!t.index_.emplace(node.id, t.nodes_.size()).second) structure(where, "duplicate node id");
        t.nodes_.push_back(std::move(node));
    }
    if (!t.contains(t.root_)) structure(t.id_, "root goal " + t.root_ + " is not a node");
    if (t.node(t.root_).kind != NodeKind::goal) structure(t.id_, "root " + t.root_ + " is not a goal");

    t.supported_by_ = edges(j, "supportedBy");
    t.in_context_of_ = edges(j, "inContextOf");
    std::set<Edge> seen;
    for (const auto& e : t.supported_by_) {
        const std::string where = "supportedBy " + e.first + " -> " + e.second;
        if (!t.contains(e.first) || !t.contains(e.second)) structure(where, "unknown node");
        if (!seen.insert(e).second) structure(where, "duplicate edge");
        const auto from = t.node(e.first).kind;
        const auto to = t.node(e.second).kind;
        const bool ok = (from == NodeKind::goal &&
                         (to == NodeKind::strategy || to == NodeKind::goal || to == NodeKind::solution)) ||
                        (from == NodeKind::strategy && (to == NodeKind::goal || to == NodeKind::solution));
        if (!ok)
            structure(where, std::string("a ") + to_string(from) + " cannot be supported by a " + to_string(to));
        if (e.second == t.root_) structure(where, "the root goal cannot be supported by another node");
    }
    seen.clear();
    for (const auto& e : t.in_context_of_) {
        const std::string where = "inContextOf " + e.first + " -> " + e.second;
        if (!t.contains(e.first) || !t.contains(e.second)) structure(where, "unknown node");
        if (!seen.insert(e).second) structure(where, "duplicate edge");
        const auto from = t.node(e.first).kind;
        const auto to = t.node(e.second).kind;
        if (to != NodeKind::context && to != NodeKind::assumption && to != NodeKind::justification)
            structure(where, "target must be a context, assumption or justification");
        if (from != NodeKind::goal && from != NodeKind::strategy && from != NodeKind::solution)
            structure(where, "source must be a goal, strategy or solution");
        t.nodes_[t.index_.at(e.first)].attached_contexts.push_back(e.second);
    }

    // acyclic, then reachable
    std::map<std::string, int> state;
    const auto visit = [&](auto&& self, const std::string& id) -> void {
        state[id] = 1;
        for (const auto& c : t.children(id)) {
            if (state[c] == 1) structure("supportedBy", "cycle through " + c);
            if (state[c] == 0) self(self, c);
        }
        state[id] = 2;
    };
    for (const auto& n : t.nodes_)
        if (state[n.id] == 0) visit(visit, n.id);

    std::set<std::string> reachable;
    std::vector<std::string> stack{t.root_};
    while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        if (!reachable.insert(id).second) continue;
        for (const auto& c : t.children(id)) stack.push_back(c);
        for (const auto& c : t.node(id).attached_contexts) reachable.insert(c);
    }
    for (const auto& n : t.nodes_)
        if (!reachable.count(n.id)) structure("node " + n.id, "orphan: not reachable from root goal " + t.root_);

    if (j.contains("checks")) {
        const auto& cs = j.at("checks");
        if (!cs.is_array()) structure("checks", "must be a list");
        for (const auto& c : cs) {
            EvidenceCheck check;
            const auto solution = string_field(c, "solution", "checks");
            const std::string where = "check on " + solution;
            if (!t.contains(solution)) structure(where, "dangling: no such node");
            if (t.node(solution).kind != NodeKind::solution) structure(where, "dangling: not a solution node");
            check.check_id = string_field(c, "checkId", where);
            const auto cmp = lookup_name<Comparator>(comparator_names, string_field(c, "comparator", where));
            if (!cmp) structure(where, "unknown comparator " + c.at("comparator").get<std::string>());
            check.comparator = *cmp;
            check.left = string_field(c, "left", where);
            const auto* left = t.parameter(check.left);
            if (!left) structure(where, "unknown parameter " + check.left);

            const auto operand = [&](const char* key) -> std::optional<Operand> {
                if (!c.contains(key)) return std::nullopt;
                const auto& o = c.at(key);
                Operand op;
                if (o.is_object() && o.contains("param")) {
                    if (!o.at("param").is_string()) structure(where, std::string(key) + ".param must be a string");
                    op.param = o.at("param").get<std::string>();
                    const auto* p = t.parameter(*op.param);
                    if (!p) structure(where, "unknown parameter " + *op.param);
                    if (p->type != left->type)
                        structure(where, "operand types differ: " + check.left + " is " + to_string(left->type) +
                                             ", " + *op.param + " is " + to_string(p->type));
                } else if (o.is_object() && o.contains("value")) {
                    op.constant = value_from_json(left->type, o.at("value"));
                    if (!op.constant)
                        structure(where, std::string(key) + " constant is not a " + to_string(left->type));
                } else {
                    structure(where, std::string(key) + " must be {\"param\": …} or {\"value\": …}");
                }
                return op;
            };
            check.right = operand("right");
            check.right_upper = operand("rightUpper");
            if (c.contains("marginFactor")) {
                const auto& m = c.at("marginFactor");
                if (!m.is_number() || m.get<double>() <= 0) structure(where, "marginFactor must be a positive number");
                check.margin_factor = m.get<double>();
            }

            const bool numeric = is_numeric(left->type);
            switch (check.comparator) {
            case Comparator::less_or_equal:
            case Comparator::greater_or_equal:
                if (!numeric) structure(where, "ordering comparators need numeric operands");
                if (!check.right || check.right_upper) structure(where, "needs exactly one right operand");
                break;
            case Comparator::within_closed_interval:
                if (!numeric) structure(where, "interval comparator needs numeric operands");
                if (!check.right || !check.right_upper) structure(where, "needs right and rightUpper");
                break;
            case Comparator::level_at_most:
                if (left->type != SemanticType::precipitation) structure(where, "levelAtMost needs precipitation");
                if (!check.right || check.right_upper) structure(where, "needs exactly one right operand");
                break;
            case Comparator::equals:
                if (!check.right || check.right_upper) structure(where, "needs exactly one right operand");
                break;
            case Comparator::boolean_true:
                if (left->type != SemanticType::certification) structure(where, "booleanTrue needs a certification");
                if (check.right || check.right_upper) structure(where, "booleanTrue takes no right operand");
                break;
            }
            if (check.margin_factor && !numeric) structure(where, "marginFactor needs a numeric operand");
            if (!t.checks_.emplace(solution, std::move(check)).second) structure(where, "solution checked twice");
        }
    }
    return t;
}

SafetyCaseTemplate load_template(std::string_view source) {
    json j;
    try {
        j = json::parse(source.begin(), source.end());
    } catch (const json::parse_error& e) {
        std::size_t column = 0;
        const std::size_t line = line_of(source, e.byte == 0 ? 0 : e.byte - 1, column);
        throw ParseError(line, column, "malformed template document");
    }
    return template_from_json(j);
}

SafetyCaseTemplate load_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_template(buf.str());
}

json to_json(const SafetyCaseTemplate& t) {
    json j;
    j["templateId"] = t.id();
    j["version"] = t.version();
    j["rootGoal"] = t.root_goal();
    j["parameters"] = json::array();
    for (const auto& [name, p] : t.parameters())
        j["parameters"].push_back({{"name", name}, {"type", to_string(p.type)}, {"source", to_string(p.source)}});
    j["nodes"] = json::array();
    for (const auto& n : t.nodes()) {
        json node{{"id", n.id}, {"kind", to_string(n.kind)}, {"text", n.text}, {"params", n.params}};
        if (n.undeveloped) node["undeveloped"] = true;
        j["nodes"].push_back(std::move(node));
    }
    const auto edge_list = [](const std::vector<Edge>& es) {
        json out = json::array();
        for (const auto& [a, b] : es) out.push_back({a, b});
        return out;
    };
    j["supportedBy"] = edge_list(t.supported_by());
    j["inContextOf"] = edge_list(t.in_context_of());
    j["checks"] = json::array();
    for (const auto& [solution, c] : t.checks()) {
        json check{{"solution", solution}, {"checkId", c.check_id}, {"comparator", to_string(c.comparator)},
                   {"left", c.left}};
        const auto operand = [](const Operand& o) {
            return o.param ? json{{"param", *o.param}} : json{{"value", value_to_json(*o.constant)}};
        };
        if (c.right) check["right"] = operand(*c.right);
        if (c.right_upper) check["rightUpper"] = operand(*c.right_upper);
        if (c.margin_factor) check["marginFactor"] = *c.margin_factor;
        j["checks"].push_back(std::move(check));
    }
    return j;
}

namespace {

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

} // namespace

std::string to_dot(const SafetyCaseTemplate& t) {
    std::ostringstream out;
    out << "digraph \"" << dot_escape(t.id()) << "\" {\n";
    for (const auto& n : t.nodes()) {
        out << "  \"" << dot_escape(n.id) << "\" [kind=" << to_string(n.kind) << ", label=\"" << dot_escape(n.text)
            << "\"";
        if (n.undeveloped) out << ", undeveloped=true";
        out << "];\n";
    }
    for (const auto& [a, b] : t.supported_by())
        out << "  \"" << dot_escape(a) << "\" -> \"" << dot_escape(b) << "\" [relation=supportedBy];\n";
    for (const auto& [a, b] : t.in_context_of())
        out << "  \"" << dot_escape(a) << "\" -> \"" << dot_escape(b) << "\" [relation=inContextOf];\n";
    out << "}\n";
    return out.str();
}

std::vector<Finding> validate_template(const SafetyCaseTemplate& t) {
    std::vector<Finding> findings;

    // parameters visible at each node: contexts of the node and of every ancestor
    std::map<std::string, std::set<std::string>> visible;
    for (const auto& id : t.topological_order()) {
        auto& v = visible[id];
        for (const auto& p : t.parents(id)) {
            const auto& pv = visible[p];
            v.insert(pv.begin(), pv.end());
        }
        for (const auto& c : t.node(id).attached_contexts)
            for (const auto& p : t.node(c).params) v.insert(p);
    }

    std::map<std::string, std::vector<std::string>> missing; // parameter -> nodes using it unseen
    for (const auto& id : t.topological_order()) {
        const auto& n = t.node(id);
        std::vector<std::string> used = n.params;
        if (const auto* c = t.check(id))
            for (const auto& p : c->parameters())
                if (std::find(used.begin(), used.end(), p) == used.end()) used.push_back(p);
        for (const auto& p : used)
            if (!visible[id].count(p)) missing[p].push_back(id);
    }
    for (const auto& [param, users] : missing) {
        std::string list;
        for (const auto& u : users) list += (list.empty() ? "" : ", ") + u;
        findings.push_back({Finding::Kind::unpropagated_parameter, users.front(),
                            "[" + param + "] used at " + list + " but absent from every ancestor context"});
    }

    for (const auto& n : t.nodes()) {
        if (n.kind == NodeKind::solution && !t.check(n.id))
            findings.push_back({Finding::Kind::missing_check, n.id, "solution " + n.id + " has no evidence check"});
        if (n.kind == NodeKind::goal && !n.undeveloped && t.children(n.id).empty())
            findings.push_back(
                {Finding::Kind::undeveloped_goal, n.id, "goal " + n.id + " has no support and is not marked undeveloped"});
    }
    return findings;
}

Catalog::Catalog(std::vector<SafetyCaseTemplate> templates) : templates_(std::move(templates)) {
    std::sort(templates_.begin(), templates_.end(),
              [](const auto& a, const auto& b) { return a.id() < b.id(); });
    for (std::size_t i = 1; i < templates_.size(); ++i)
        if (templates_[i].id() == templates_[i - 1].id()) throw StructureError("duplicate template " + templates_[i].id());
}

const SafetyCaseTemplate* Catalog::find(std::string_view id) const {
    for (const auto& t : templates_)
        if (t.id() == id) return &t;
    return nullptr;
}

Catalog load_catalog(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<SafetyCaseTemplate> templates;
    for (const auto& f : files) {
        try {
            templates.push_back(load_template_file(f));
        } catch (const ParseError& e) {
            throw ParseError(e.line(), e.column(), f.filename().string() + ": " + e.message());
        } catch (const StructureError& e) {
            throw StructureError(f.filename().string() + ": " + e.what());
        }
    }
    return Catalog(std::move(templates));
}

} // namespace safesple::gsn
