#pragma once

#include "safesple/logic/formula.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace safesple::fm {

using FeatureId = std::size_t;

enum class Optionality {
    mandatory,
    optional,
    grouped, // member of an or/xor group; group semantics govern selection
};

/// Kind of the group formed by a feature's children.
enum class GroupKind { none, and_group, or_group, xor_group };

struct Feature {
    FeatureId id = 0;
    std::string name;
    std::optional<FeatureId> parent;
    Optionality optionality = Optionality::mandatory;
    GroupKind group = GroupKind::none;
    bool is_abstract = false;
    std::vector<FeatureId> children;
};

/// Links a hazard to the features that contribute to or mitigate it and to
/// the safety-case nodes that argue about it.
struct HazardTrace {
    std::string hazard_id;
    std::string description;
    std::vector<std::string> contributing_features;
    std::vector<std::string> mitigating_features;
    std::vector<std::string> template_node_ids;

    friend bool operator==(const HazardTrace&, const HazardTrace&) = default;
};

/// Selection state of a product. Features in neither set are undecided.
struct Configuration {
    std::set<std::string> selected;
    std::set<std::string> deselected;
    bool partial = true;
};

/**
 * Tree of features plus cross-tree constraints and hazard traces.
 *
 * The mutators enforce the structural invariants as the model is built
 * (unique names, single parent, no mixing of and-children with a group,
 * constraints over declared features); validate() checks the ones that can
 * only be judged on the finished tree. All violations raise SemanticError.
 */
class FeatureModel {
public:
    FeatureModel(std::string name, std::string root_name, bool root_abstract = false);

    FeatureId add_child(FeatureId parent, std::string name, Optionality optionality, bool is_abstract = false);
    FeatureId add_group_member(FeatureId parent, GroupKind kind, std::string name, bool is_abstract = false);
    void add_constraint(logic::Formula constraint);
    void add_hazard(HazardTrace trace);

    /// Or/xor groups need at least two members.
    void validate() const;

    const std::string& name() const noexcept { return name_; }
    FeatureId root() const noexcept { return 0; }
    const Feature& feature(FeatureId id) const { return features_.at(id); }
    const std::vector<Feature>& features() const noexcept { return features_; }
    const std::vector<logic::Formula>& constraints() const noexcept { return constraints_; }
    const std::vector<HazardTrace>& hazards() const noexcept { return hazards_; }

    std::optional<FeatureId> find(const std::string& name) const;
    bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

    /// Names of all non-abstract features.
    std::set<std::string> concrete_features() const;

    /// Same names, structure, flags, constraints and hazards.
    friend bool structurally_equal(const FeatureModel& a, const FeatureModel& b);

private:
    FeatureId insert(FeatureId parent, std::string name, Optionality optionality, bool is_abstract);

    std::string name_;
    std::vector<Feature> features_;
    std::map<std::string, FeatureId> by_name_;
    std::vector<logic::Formula> constraints_;
    std::vector<HazardTrace> hazards_;
};

const char* to_string(GroupKind kind);
const char* to_string(Optionality optionality);

} // namespace safesple::fm
