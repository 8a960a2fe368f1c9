#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace safesple::logic {

/// Truth values keyed by variable name.
using Assignment = std::map<std::string, bool>;

enum class Connective {
    constant_true,
    constant_false,
    variable,
    negation,
    conjunction,
    disjunction,
    implication,   // operands: antecedent, consequent
    biconditional, // operands: lhs, rhs
    exactly_one,   // n-ary: exactly one operand is true
};

/**
 * Immutable propositional formula.
 *
 * Formulas are shared trees: copying a Formula copies a pointer, and
 * sub-formulas may be referenced from several parents. A node can never
 * reference itself because children must exist before their parent.
 * Two variables with the same name are the same variable.
 */
class Formula {
public:
    /// Constant true. A default-constructed Formula is also constant true.
    Formula();

    static Formula top();
    static Formula bottom();
    /// Throws std::invalid_argument on an empty name.
    static Formula var(std::string name);

    Connective connective() const noexcept;
    /// Variable name; empty for every other connective.
    const std::string& name() const noexcept;
    std::span<const Formula> operands() const noexcept;

    /// Direct recursive evaluation. Throws std::out_of_range when a variable
    /// of the formula is missing from `values`.
    bool evaluate(const Assignment& values) const;

    /// Names of all variables, in lexicographic order.
    std::set<std::string> variables() const;

    /// Prefix rendering in the constraint syntax of the feature-model DSL,
    /// e.g. `implies(A, not(B))`.
    std::string to_string() const;

    /// Structural identity (same connective, same names, equal operands).
    friend bool operator==(const Formula& a, const Formula& b);

    /// Address of the shared node; stable for the lifetime of the tree.
    const void* identity() const noexcept { return node_.get(); }

private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> node);
    static Formula make(Connective c, std::string name, std::vector<Formula> operands);

    std::shared_ptr<const Node> node_;

    friend Formula negate(Formula);
    friend Formula conjoin(std::vector<Formula>);
    friend Formula disjoin(std::vector<Formula>);
    friend Formula implies(Formula, Formula);
    friend Formula iff(Formula, Formula);
    friend Formula exactly_one(std::vector<Formula>);
};

Formula negate(Formula f);
/// Conjunction of zero operands is true.
Formula conjoin(std::vector<Formula> operands);
/// Disjunction of zero operands is false.
Formula disjoin(std::vector<Formula> operands);
Formula implies(Formula antecedent, Formula consequent);
Formula iff(Formula lhs, Formula rhs);
/// Exactly-one of zero operands is false; of one operand, the operand itself.
Formula exactly_one(std::vector<Formula> operands);

inline Formula operator!(Formula f) { return negate(std::move(f)); }
inline Formula operator&&(Formula a, Formula b) { return conjoin({std::move(a), std::move(b)}); }
inline Formula operator||(Formula a, Formula b) { return disjoin({std::move(a), std::move(b)}); }

} // namespace safesple::logic
