#pragma once

#include "safesple/fm/feature_model.hpp"
#include "safesple/gsn/template.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace safesple::gsn {

/// A closed range of parameter values treated alike. Discrete classes have
/// low == high; ordered types (magnitudes, precipitation) may span a range.
struct EquivalenceClass {
    std::string label;
    Value low;
    Value high;

    bool contains(const Value& v) const;
    bool disjoint(const EquivalenceClass& other) const;
};

struct FeatureBinding {
    std::string feature;
    std::string parameter;
    EquivalenceClass cls;
};

/// feature name -> (parameter, class)
using FeatureMapping = std::map<std::string, std::pair<std::string, EquivalenceClass>>;

/// Reads [{"feature", "parameter", "class": {"label", "value"} | {"label", "low", "high"}}]
/// typed against `t`. Throws MappingError.
FeatureMapping feature_mapping_from_json(const nlohmann::json& j, const SafetyCaseTemplate& t);

class BindingSchema {
public:
    const std::string& template_id() const noexcept { return template_id_; }
    const std::vector<FeatureBinding>& entries() const noexcept { return entries_; }
    /// Parameters no feature maps to; their values come from evidence.
    const std::set<std::string>& evidence_sourced() const noexcept { return evidence_sourced_; }
    bool feature_sourced(const std::string& parameter) const;

    /// Classes selected by `c`, intersected per parameter. Throws
    /// ConflictError if two selected features give disjoint classes.
    std::map<std::string, EquivalenceClass> classes_for(const fm::Configuration& c) const;

    friend BindingSchema map_features_to_parameters(const fm::FeatureModel&, const SafetyCaseTemplate&,
                                                    const FeatureMapping&);

private:
    std::string template_id_;
    std::vector<FeatureBinding> entries_;
    std::set<std::string> evidence_sourced_;
};

/// Throws MappingError on unknown features or parameters or an ill-typed
/// class, and ConflictError when two features that map one parameter to
/// disjoint classes can be selected together under `m`.
BindingSchema map_features_to_parameters(const fm::FeatureModel& m, const SafetyCaseTemplate& t,
                                         const FeatureMapping& mapping);

} // namespace safesple::gsn
