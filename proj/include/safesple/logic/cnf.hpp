#pragma once

#include "safesple/logic/formula.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace safesple::logic {

/// Signed DIMACS-style literal: +v is variable v, -v its negation. v >= 1.
using Literal = int;
using Clause = std::vector<Literal>;

/**
 * Clause form of a formula.
 *
 * Variables 1..original_count are the formula's own variables in
 * lexicographic name order; higher indices are auxiliary gate variables
 * introduced by the conversion. Each auxiliary is defined by a full
 * equivalence with its gate, so every assignment of the original variables
 * extends to the auxiliaries in exactly one way when the formula holds.
 */
struct CnfFormula {
    std::vector<Clause> clauses;
    /// variables[i] is the name of variable i + 1.
    std::vector<std::string> variables;
    std::map<std::string, int> index;
    std::size_t original_count = 0;

    std::size_t variable_count() const noexcept { return variables.size(); }
    bool is_auxiliary(int var) const noexcept { return static_cast<std::size_t>(var) > original_count; }
    /// Only the constant-false formula yields an empty clause.
    bool is_constant_false() const noexcept;
};

/// Equisatisfiable transformation with auxiliary variables. Total.
CnfFormula to_cnf(const Formula& f);

} // namespace safesple::logic
