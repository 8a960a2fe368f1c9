#pragma once

#include "safesple/fm/feature_model.hpp"
#include "safesple/logic/solver.hpp"

#include <string>
#include <vector>

namespace safesple::fm {

/// One conjunct of a model's propositional semantics, with the reason it exists.
struct SemanticConstraint {
    logic::Formula formula;
    std::string description;
};

/// Tree semantics followed by the cross-tree constraints:
///  - root is selected
///  - mandatory child c of p:  c <-> p
///  - optional child c of p:   c -> p
///  - or-group under p:        p <-> (c1 | ... | cn)
///  - xor-group under p:       (p -> exactly-one(c1..cn)) & (ci -> p)
std::vector<SemanticConstraint> semantic_constraints(const FeatureModel& m);

logic::Formula to_propositional(const FeatureModel& m);

/// Number of valid products, counted over the concrete features.
logic::Count count_variants(const FeatureModel& m);

/// Number of valid full products consistent with `fixed`.
/// Throws InvalidSelectionError on unknown names or a feature that is both
/// selected and deselected.
logic::Count slice_count(const FeatureModel& m, const Configuration& fixed);

enum class Verdict { valid, invalid, incomplete_but_extensible };

struct ValidityReport {
    Verdict verdict = Verdict::invalid;
    /// For invalid configurations: a subset-minimal set of descriptions of
    /// the constraints that rule the selection out.
    std::vector<std::string> violations;
    /// Concrete features the configuration leaves open.
    std::vector<std::string> undecided;
};

ValidityReport check_configuration(const FeatureModel& m, const Configuration& c);

/// All valid products projected onto the concrete features, in
/// lexicographic order. Bounded by `limit` (exhaustive).
std::vector<Configuration> enumerate_variants(const FeatureModel& m, std::size_t limit);

const char* to_string(Verdict v);

} // namespace safesple::fm
