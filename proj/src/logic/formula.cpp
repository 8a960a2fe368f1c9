#include "safesple/logic/formula.hpp"

#include <stdexcept>

namespace safesple::logic {

struct Formula::Node {
    Connective connective;
    std::string name;
    std::vector<Formula> operands;
};

Formula::Formula() : Formula(top()) {}

Formula::Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Formula Formula::make(Connective c, std::string name, std::vector<Formula> operands) {
    return Formula(std::make_shared<const Node>(Node{c, std::move(name), std::move(operands)}));
}

Formula Formula::top() {
    static const Formula t = make(Connective::constant_true, {}, {});
    return t;
}

Formula Formula::bottom() {
    static const Formula f = make(Connective::constant_false, {}, {});
    return f;
}

Formula Formula::var(std::string name) {
    if (name.empty()) throw std::invalid_argument("variable name must be non-empty");
    return make(Connective::variable, std::move(name), {});
}

Connective Formula::connective() const noexcept { return node_->connective; }
const std::string& Formula::name() const noexcept { return node_->name; }
std::span<const Formula> Formula::operands() const noexcept { return node_->operands; }

bool Formula::evaluate(const Assignment& values) const {
    const auto& ops = node_->operands;
    switch (node_->connective) {
    case Connective::constant_true: return true;
    case Connective::constant_false: return false;
    case Connective::variable: {
        auto it = values.find(node_->name);
        if (it == values.end()) throw std::out_of_range("unassigned variable: " + node_->name);
        return it->second;
    }
    case Connective::negation: return !ops[0].evaluate(values);
    case Connective::conjunction:
        for (const auto& op : ops)
            if (!op.evaluate(values)) return false;
        return true;
    case Connective::disjunction:
        for (const auto& op : ops)
            if (op.evaluate(values)) return true;
        return false;
    case Connective::implication: return !ops[0].evaluate(values) || ops[1].evaluate(values);
    case Connective::biconditional: return ops[0].evaluate(values) == ops[1].evaluate(values);
    case Connective::exactly_one: {
        int n = 0;
        for (const auto& op : ops)
            if (op.evaluate(values) && ++n > 1) return false;
        return n == 1;
    }
    }
    return false;
}

namespace {

void collect(const Formula& f, std::set<std::string>& out) {
    if (f.connective() == Connective::variable) {
        out.insert(f.name());
        return;
    }
    for (const auto& op : f.operands()) collect(op, out);
}

const char* keyword(Connective c) {
    switch (c) {
    case Connective::negation: return "not";
    case Connective::conjunction: return "and";
    case Connective::disjunction: return "or";
    case Connective::implication: return "implies";
    case Connective::biconditional: return "iff";
    case Connective::exactly_one: return "xor";
    default: return "";
    }
}

void render(const Formula& f, std::string& out) {
    switch (f.connective()) {
    case Connective::constant_true: out += "true"; return;
    case Connective::constant_false: out += "false"; return;
    case Connective::variable: out += f.name(); return;
    default: break;
    }
    out += keyword(f.connective());
    out += '(';
    bool first = true;
    for (const auto& op : f.operands()) {
        if (!first) out += ", ";
        first = false;
        render(op, out);
    }
    out += ')';
}

} // namespace

std::set<std::string> Formula::variables() const {
    std::set<std::string> out;
    collect(*this, out);
    return out;
}

std::string Formula::to_string() const {
    std::string out;
    render(*this, out);
    return out;
}

bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->connective != b.node_->connective || a.node_->name != b.node_->name) return false;
    return a.node_->operands == b.node_->operands;
}

Formula negate(Formula f) { return Formula::make(Connective::negation, {}, {std::move(f)}); }

Formula conjoin(std::vector<Formula> operands) {
    if (operands.empty()) return Formula::top();
    if (operands.size() == 1) return std::move(operands.front());
    return Formula::make(Connective::conjunction, {}, std::move(operands));
}

Formula disjoin(std::vector<Formula> operands) {
    if (operands.empty()) return Formula::bottom();
    if (operands.size() == 1) return std::move(operands.front());
    return Formula::make(Connective::disjunction, {}, std::move(operands));
}

Formula implies(Formula antecedent, Formula consequent) {
    return Formula::make(Connective::implication, {}, {std::move(antecedent), std::move(consequent)});
}

Formula iff(Formula lhs, Formula rhs) {
    return Formula::make(Connective::biconditional, {}, {std::move(lhs), std::move(rhs)});
}

Formula exactly_one(std::vector<Formula> operands) {
    if (operands.empty()) return Formula::bottom();
    if (operands.size() == 1) return std::move(operands.front());
    return Formula::make(Connective::exactly_one, {}, std::move(operands));
}

} // namespace safesple::logic
