#pragma once

#include "safesple/logic/cnf.hpp"
#include "safesple/logic/formula.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace safesple::logic {

/// Arbitrary-precision model count.
using Count = boost::multiprecision::cpp_int;

/// Backtracking search with unit propagation. Branches on the lowest
/// variable index first (lexicographic for original variables), trying
/// `true` before `false`. The model is total over the formula's variables.
std::optional<Assignment> is_satisfiable(const Formula& f);
std::optional<Assignment> find_model(const CnfFormula& cnf);

/**
 * Exact number of assignments to `over` that extend to a model of `f`.
 *
 * Variables of `over` that do not occur in `f` each double the count;
 * variables of `f` outside `over` (and all auxiliaries) are existentially
 * quantified, so they never inflate the result.
 */
Count count_models_exact(const Formula& f, const std::set<std::string>& over);

/// As count_models_exact; throws OverflowError when the count does not fit
/// in 64 bits, in which case callers switch to count_models_exact.
std::uint64_t count_models(const Formula& f, const std::set<std::string>& over);

/// Projected count on clause form. `projection` lists variable indices;
/// `extra_free` unconstrained variables multiply the result by 2^extra_free.
Count count_projected(const CnfFormula& cnf, const std::vector<int>& projection, std::size_t extra_free = 0);

struct EnumerationLimit {
    std::optional<std::size_t> max;
    /// When set, exceeding `max` is an error instead of a truncation.
    bool exhaustive = false;
};

/// Unbounded enumeration is capped at this many `over` variables.
inline constexpr std::size_t max_unbounded_enumeration_width = 25;

/**
 * Distinct projections of the models of `f` onto `over`, ordered
 * lexicographically by variable name with false < true.
 *
 * Throws CapacityError when `over` is wider than
 * max_unbounded_enumeration_width without a limit, or when an exhaustive
 * limit is exceeded.
 */
std::vector<Assignment> enumerate_models(const Formula& f, const std::set<std::string>& over,
                                         EnumerationLimit limit = {});

} // namespace safesple::logic
