#include "safesple/instantiation/instance.hpp"

#include "safesple/error.hpp"
#include "safesple/hash.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace safesple::instantiation {

using nlohmann::json;

namespace {

constexpr std::size_t id_digits = 16;

double number(const Value& v, const std::string& what) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw BindingTypeError(what + " is not a number: " + format_value(v));
}

std::string num(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", d);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

bool is_argument_node(gsn::NodeKind k) {
    return k == gsn::NodeKind::goal || k == gsn::NodeKind::strategy || k == gsn::NodeKind::solution;
}

const char* comparator_symbol(gsn::Comparator c) {
    switch (c) {
    case gsn::Comparator::less_or_equal:
    case gsn::Comparator::level_at_most: return "<=";
    case gsn::Comparator::greater_or_equal: return ">=";
    case gsn::Comparator::equals: return "==";
    case gsn::Comparator::within_closed_interval: return "in";
    case gsn::Comparator::boolean_true: return "is";
    }
    return "?";
}

std::string describe_operand(const OperandValue& o, const gsn::SafetyCaseTemplate& t) {
    if (!o.parameter) return o.value ? format_value(*o.value) : "?";
    std::string out = "[" + *o.parameter + "] ";
    if (!o.value) return out + "? (unresolved)";
    const auto* p = t.parameter(*o.parameter);
    out += p ? format_quantity(*o.value, p->type) : format_value(*o.value);
    if (o.provenance) out += std::string(" (") + to_string(*o.provenance) + ")";
    return out;
}

std::string describe_condition(const CheckEvaluation& e, gsn::Comparator c, const gsn::SafetyCaseTemplate& t) {
    std::string left = describe_operand(e.operands.at(0), t);
    if (e.margin_factor) left = num(*e.margin_factor) + " x " + left;
    switch (c) {
    case gsn::Comparator::boolean_true: return left + " is true";
    case gsn::Comparator::within_closed_interval:
        return left + " in [" + describe_operand(e.operands.at(1), t) + ", " + describe_operand(e.operands.at(2), t) +
               "]";
    default: return left + " " + comparator_symbol(c) + " " + describe_operand(e.operands.at(1), t);
    }
}

json operand_json(const OperandValue& o) {
    json j = json::object();
    if (o.parameter) j["parameter"] = *o.parameter;
    j["value"] = o.value ? gsn::value_to_json(*o.value) : json(nullptr);
    if (o.provenance) j["provenance"] = to_string(*o.provenance);
    return j;
}

} // namespace

const char* to_string(Status s) {
    switch (s) {
    case Status::satisfied: return "satisfied";
    case Status::violated: return "violated";
    case Status::unresolved: return "unresolved";
    }
    return "?";
}

std::optional<Status> parse_status(std::string_view s) {
    for (auto st : {Status::satisfied, Status::violated, Status::unresolved})
        if (s == to_string(st)) return st;
    return std::nullopt;
}

Status combine(const std::vector<Status>& children) {
    if (children.empty()) return Status::unresolved;
    bool all = true;
    for (auto s : children) {
        if (s == Status::violated) return Status::violated;
        if (s != Status::satisfied) all = false;
    }
    return all ? Status::satisfied : Status::unresolved;
}

std::string format_quantity(const Value& v, gsn::SemanticType type) {
    const auto* d = std::get_if<double>(&v);
    if (!d) return format_value(v);
    if (std::isinf(*d)) return format_value(v);
    switch (type) {
    case gsn::SemanticType::wind_speed: return num(*d) + " m/s";
    case gsn::SemanticType::temperature: return num(*d) + " C";
    case gsn::SemanticType::visibility: return num(*d) + " km";
    case gsn::SemanticType::duration: return num(*d) + " min";
    case gsn::SemanticType::flight_hours: return num(*d) + " h";
    default: return num(*d);
    }
}

CheckEvaluation evaluate_check(const gsn::EvidenceCheck& check, const std::map<std::string, Binding>& bindings) {
    CheckEvaluation e;
    e.check_id = check.check_id;
    e.description = check.describe();
    e.margin_factor = check.margin_factor;

    auto resolve = [&](const gsn::Operand& o) {
        OperandValue v;
        if (o.param) {
            v.parameter = *o.param;
            if (auto it = bindings.find(*o.param); it != bindings.end()) {
                v.value = it->second.value;
                v.provenance = it->second.provenance;
            }
        } else {
            v.value = o.constant;
        }
        return v;
    };
    e.operands.push_back(resolve(gsn::Operand{check.left, std::nullopt}));
    if (check.right) e.operands.push_back(resolve(*check.right));
    if (check.right_upper) e.operands.push_back(resolve(*check.right_upper));

    if (std::any_of(e.operands.begin(), e.operands.end(), [](const auto& o) { return !o.value; })) {
        e.status = Status::unresolved;
        return e;
    }

    const std::string what = "check " + check.check_id;
    Value left = *e.operands[0].value;
    if (check.margin_factor) left = number(left, what + " left operand") * *check.margin_factor;
    auto right = [&](std::size_t i) { return *e.operands.at(i).value; };

    bool ok = false;
    switch (check.comparator) {
    case gsn::Comparator::less_or_equal:
        ok = number(left, what) <= number(right(1), what);
        break;
    case gsn::Comparator::greater_or_equal:
        ok = number(left, what) >= number(right(1), what);
        break;
    case gsn::Comparator::within_closed_interval: {
        const double x = number(left, what);
        ok = number(right(1), what) <= x && x <= number(right(2), what);
        break;
    }
    case gsn::Comparator::level_at_most: {
        const auto* l = std::get_if<Precipitation>(&left);
        const auto r = right(1);
        const auto* rp = std::get_if<Precipitation>(&r);
        if (!l || !rp) throw BindingTypeError(what + " compares non-precipitation values");
        ok = *l <= *rp;
        break;
    }
    case gsn::Comparator::equals:
        if (left.index() != right(1).index()) throw BindingTypeError(what + " compares values of different types");
        ok = left == right(1);
        break;
    case gsn::Comparator::boolean_true: {
        const auto* b = std::get_if<bool>(&left);
        if (!b) throw BindingTypeError(what + " expects a boolean");
        ok = *b;
        break;
    }
    }
    e.status = ok ? Status::satisfied : Status::violated;
    return e;
}

const InstanceNode& SafetyCaseInstance::node(std::string_view template_node_id) const {
    for (const auto& n : nodes)
        if (n.template_node_id == template_node_id) return n;
    throw std::out_of_range("no instance node for " + std::string(template_node_id));
}

SafetyCaseInstance instantiate(const gsn::SafetyCaseTemplate& t, const gsn::BindingSchema& schema,
                               const evidence::EvidenceBundle& bundle) {
    if (!schema.template_id().empty() && schema.template_id() != t.id())
        throw std::invalid_argument("binding schema for " + schema.template_id() + " used with " + t.id());

    SafetyCaseInstance inst;
    inst.template_id = t.id();
    inst.template_version = t.version();
    inst.generated_at = bundle.assembled_at;

    auto bind = [&](const std::string& name, const Binding& b) {
        const auto& p = *t.parameter(name);
        if (!gsn::value_matches(p.type, b.value))
            throw BindingTypeError("[" + name + "] expects " + to_string(p.type) + ", got " + format_value(b.value));
        inst.bindings[name] = b;
    };
    for (const auto& [name, p] : t.parameters())
        if (auto it = bundle.bindings.find(name); it != bundle.bindings.end()) bind(name, it->second);
    for (const auto& [name, cls] : schema.classes_for(bundle.configuration)) {
        auto it = inst.bindings.find(name);
        if (it == inst.bindings.end() || it->second.provenance == Provenance::default_rule)
            bind(name, Binding{cls.low, Provenance::feature_class});
    }
    for (const auto& [name, p] : t.parameters())
        if (!inst.bindings.count(name)) inst.unresolved.insert(name);

    json canonical{{"templateId", t.id()}, {"version", t.version()}, {"bindings", json::object()}};
    for (const auto& [name, b] : inst.bindings)
        canonical["bindings"][name] = {{"value", gsn::value_to_json(b.value)}, {"provenance", to_string(b.provenance)}};
    inst.instance_id = sha256_hex(canonical.dump()).substr(0, id_digits);

    std::map<std::string, CheckEvaluation> evaluations;
    for (const auto& [id, check] : t.checks()) evaluations.emplace(id, evaluate_check(check, inst.bindings));

    auto order = t.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto& n = t.node(*it);
        Status s = Status::unresolved;
        if (n.kind == gsn::NodeKind::solution) {
            if (auto e = evaluations.find(n.id); e != evaluations.end()) s = e->second.status;
        } else {
            std::vector<Status> children;
            for (const auto& c : t.children(n.id)) children.push_back(inst.node_statuses.at(c));
            s = combine(children);
        }
        inst.node_statuses[n.id] = s;
    }

    auto prefixed = [&](const std::string& id) { return inst.instance_id + ":" + id; };
    for (const auto& n : t.nodes()) {
        InstanceNode node;
        node.id = prefixed(n.id);
        node.template_node_id = n.id;
        node.kind = n.kind;
        node.undeveloped = n.undeveloped;
        node.text = gsn::substitute(n.text, [&](const std::string& name) -> std::optional<std::string> {
            const auto* p = t.parameter(name);
            if (!p) return std::nullopt;
            auto b = inst.bindings.find(name);
            if (b == inst.bindings.end()) return "[" + name + ":?]";
            return format_quantity(b->second.value, p->type);
        });
        if (is_argument_node(n.kind)) {
            node.status = inst.node_statuses.at(n.id);
        } else {
            const bool bound = std::all_of(n.params.begin(), n.params.end(),
                                           [&](const auto& p) { return inst.bindings.count(p) > 0; });
            node.status = bound ? Status::satisfied : Status::unresolved;
            inst.node_statuses[n.id] = node.status;
        }
        if (auto e = evaluations.find(n.id); e != evaluations.end()) node.evaluation = e->second;
        inst.trace_links[node.id] = n.id;
        inst.nodes.push_back(std::move(node));
    }
    for (const auto& [from, to] : t.supported_by()) inst.edges.push_back({prefixed(from), prefixed(to), "supportedBy"});
    for (const auto& [from, to] : t.in_context_of()) inst.edges.push_back({prefixed(from), prefixed(to), "inContextOf"});
    inst.top_goal_status = inst.node_statuses.at(t.root_goal());
    return inst;
}

json to_json(const SafetyCaseInstance& inst) {
    json j;
    j["instanceId"] = inst.instance_id;
    j["templateId"] = inst.template_id;
    j["templateVersion"] = inst.template_version;
    j["generatedAt"] = evidence::format_timestamp(inst.generated_at);
    j["topGoalStatus"] = to_string(inst.top_goal_status);
    j["bindings"] = json::object();
    for (const auto& [name, b] : inst.bindings)
        j["bindings"][name] = {{"value", gsn::value_to_json(b.value)},
                               {"display", format_value(b.value)},
                               {"provenance", to_string(b.provenance)}};
    j["unresolved"] = inst.unresolved;
    j["nodes"] = json::array();
    for (const auto& n : inst.nodes) {
        json node{{"id", n.id},
                  {"templateNodeId", n.template_node_id},
                  {"kind", to_string(n.kind)},
                  {"text", n.text},
                  {"status", to_string(n.status)}};
        if (n.undeveloped) node["undeveloped"] = true;
        if (n.evaluation) {
            const auto& e = *n.evaluation;
            json check{{"checkId", e.check_id}, {"description", e.description}, {"status", to_string(e.status)}};
            check["operands"] = json::array();
            for (const auto& o : e.operands) check["operands"].push_back(operand_json(o));
            if (e.margin_factor) check["marginFactor"] = *e.margin_factor;
            node["check"] = std::move(check);
        }
        j["nodes"].push_back(std::move(node));
    }
    j["edges"] = json::array();
    for (const auto& e : inst.edges) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"relation", e.relation}});
    j["nodeStatuses"] = json::object();
    for (const auto& [id, s] : inst.node_statuses) j["nodeStatuses"][id] = to_string(s);
    j["traceLinks"] = inst.trace_links;
    return j;
}

std::string to_dot(const SafetyCaseInstance& inst) {
    std::string out = "digraph \"" + escape(inst.instance_id) + "\" {\n";
    for (const auto& n : inst.nodes) {
        out += "  \"" + escape(n.id) + "\" [kind=" + to_string(n.kind) + ", status=" + to_string(n.status) +
               ", trace=\"" + escape(n.template_node_id) + "\", label=\"" + escape(n.text) + "\"";
        if (n.undeveloped) out += ", undeveloped=true";
        out += "];\n";
    }
    for (const auto& e : inst.edges)
        out += "  \"" + escape(e.from) + "\" -> \"" + escape(e.to) + "\" [relation=" + e.relation + "];\n";
    out += "}\n";
    return out;
}

std::vector<std::string> select_templates(const gsn::Catalog& catalog, std::optional<Status> pilot_case) {
    if (catalog.empty()) throw CatalogError("template catalog is empty");
    if (!catalog.find(gsn::pilot_template_id))
        throw CatalogError("catalog has no " + std::string(gsn::pilot_template_id) + " template");
    std::vector<std::string> out{std::string(gsn::pilot_template_id)};
    if (pilot_case != Status::satisfied && catalog.find(gsn::wind_template_id))
        out.emplace_back(gsn::wind_template_id);
    return out;
}

std::vector<EvidenceRequirement> required_evidence(const gsn::SafetyCaseTemplate& t,
                                                   const evidence::EvidenceBundle* bundle) {
    std::vector<EvidenceRequirement> out;
    for (const auto& id : t.solutions()) {
        const auto* check = t.check(id);
        if (!check) continue;
        EvidenceRequirement r;
        r.solution_id = id;
        r.check_id = check->check_id;
        r.parameters = check->parameters();
        r.description = check->describe();
        for (const auto& p : r.parameters)
            if (!bundle || !bundle->bindings.count(p)) r.missing.push_back(p);
        r.unresolved = !r.missing.empty();
        out.push_back(std::move(r));
    }
    return out;
}

json to_json(const EvidenceRequirement& r) {
    return {{"solutionId", r.solution_id}, {"checkId", r.check_id},   {"parameters", r.parameters},
            {"description", r.description}, {"unresolved", r.unresolved}, {"missing", r.missing}};
}

Explanation explain_denial(const SafetyCaseInstance& inst, const gsn::SafetyCaseTemplate& t) {
    if (inst.template_id != t.id()) throw ExplainError("instance of " + inst.template_id + " explained with " + t.id());
    if (inst.top_goal_status == Status::satisfied)
        throw ExplainError("instance " + inst.instance_id + " is satisfied; nothing to explain");
    Explanation ex;
    ex.instance_id = inst.instance_id;
    ex.template_id = inst.template_id;
    ex.top_goal_status = inst.top_goal_status;
    for (const auto& n : inst.nodes) {
        if (!is_argument_node(n.kind) || n.status == Status::satisfied || !t.children(n.template_node_id).empty())
            continue;
        ExplanationEntry e;
        e.instance_node_id = n.id;
        e.template_node_id = n.template_node_id;
        e.status = n.status;
        if (n.evaluation) {
            e.operands = n.evaluation->operands;
            e.condition = describe_condition(*n.evaluation, t.check(n.template_node_id)->comparator, t);
        } else {
            e.condition = n.kind == gsn::NodeKind::solution ? "no evidence check" : "undeveloped";
        }
        e.chain = t.chain_to_root(n.template_node_id);
        ex.entries.push_back(std::move(e));
    }
    return ex;
}

json to_json(const Explanation& e) {
    json j{{"instanceId", e.instance_id}, {"templateId", e.template_id}, {"topGoalStatus", to_string(e.top_goal_status)}};
    j["entries"] = json::array();
    for (const auto& x : e.entries) {
        json entry{{"instanceNodeId", x.instance_node_id},
                   {"templateNodeId", x.template_node_id},
                   {"status", to_string(x.status)},
                   {"condition", x.condition},
                   {"chain", x.chain}};
        entry["operands"] = json::array();
        for (const auto& o : x.operands) entry["operands"].push_back(operand_json(o));
        j["entries"].push_back(std::move(entry));
    }
    return j;
}

} // namespace safesple::instantiation
