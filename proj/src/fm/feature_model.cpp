#include "safesple/fm/feature_model.hpp"

#include "safesple/error.hpp"

namespace safesple::fm {

FeatureModel::FeatureModel(std::string name, std::string root_name, bool root_abstract) : name_(std::move(name)) {
    if (root_name.empty()) throw SemanticError("root feature needs a name");
    Feature root;
    root.id = 0;
    root.name = std::move(root_name);
    root.optionality = Optionality::mandatory;
    root.is_abstract = root_abstract;
    by_name_.emplace(root.name, 0);
    features_.push_back(std::move(root));
}

FeatureId FeatureModel::insert(FeatureId parent, std::string name, Optionality optionality, bool is_abstract) {
    if (parent >= features_.size()) throw SemanticError("orphan feature '" + name + "': unknown parent");
    if (name.empty()) throw SemanticError("feature name must be non-empty");
    if (by_name_.count(name)) throw SemanticError("duplicate feature name '" + name + "'");
    Feature f;
    f.id = features_.size();
    f.name = std::move(name);
    f.parent = parent;
    f.optionality = optionality;
    f.is_abstract = is_abstract;
    by_name_.emplace(f.name, f.id);
    features_[parent].children.push_back(f.id);
    features_.push_back(std::move(f));
    return features_.back().id;
}

FeatureId FeatureModel::add_child(FeatureId parent, std::string name, Optionality optionality, bool is_abstract) {
    if (optionality == Optionality::grouped) throw SemanticError("use add_group_member for grouped features");
    if (parent >= features_.size()) throw SemanticError("orphan feature '" + name + "': unknown parent");
    auto& p = features_[parent];
    if (p.group == GroupKind::or_group || p.group == GroupKind::xor_group)
        throw SemanticError("feature '" + p.name + "' already has a group; cannot add mandatory/optional child '" +
                            name + "'");
    p.group = GroupKind::and_group;
    return insert(parent, std::move(name), optionality, is_abstract);
}

FeatureId FeatureModel::add_group_member(FeatureId parent, GroupKind kind, std::string name, bool is_abstract) {
    if (kind != GroupKind::or_group && kind != GroupKind::xor_group)
        throw SemanticError("group members belong to an or/xor group");
    if (parent >= features_.size()) throw SemanticError("orphan feature '" + name + "': unknown parent");
    auto& p = features_[parent];
    if (p.group != GroupKind::none && p.group != kind)
        throw SemanticError("feature '" + p.name + "' cannot mix its " + to_string(p.group) + " children with a " +
                            to_string(kind));
    p.group = kind;
    return insert(parent, std::move(name), Optionality::grouped, is_abstract);
}

void FeatureModel::add_constraint(logic::Formula constraint) {
    for (const auto& n : constraint.variables())
        if (!contains(n)) throw SemanticError("constraint " + constraint.to_string() + " references unknown feature '" + n + "'");
    constraints_.push_back(std::move(constraint));
}

void FeatureModel::add_hazard(HazardTrace trace) {
    if (trace.contributing_features.empty())
        throw SemanticError("hazard " + trace.hazard_id + " lists no contributing feature");
    for (const auto* list : {&trace.contributing_features, &trace.mitigating_features})
        for (const auto& n : *list)
            if (!contains(n)) throw SemanticError("hazard " + trace.hazard_id + " references unknown feature '" + n + "'");
    hazards_.push_back(std::move(trace));
}

void FeatureModel::validate() const {
    for (const auto& f : features_) {
        if ((f.group == GroupKind::or_group || f.group == GroupKind::xor_group) && f.children.size() < 2)
            throw SemanticError(std::string(to_string(f.group)) + " under '" + f.name + "' needs at least 2 children");
    }
}

std::optional<FeatureId> FeatureModel::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::set<std::string> FeatureModel::concrete_features() const {
    std::set<std::string> out;
    for (const auto& f : features_)
        if (!f.is_abstract) out.insert(f.name);
    return out;
}

namespace {

bool same_subtree(const FeatureModel& a, FeatureId i, const FeatureModel& b, FeatureId j) {
    const auto& x = a.feature(i);
    const auto& y = b.feature(j);
    if (x.name != y.name || x.optionality != y.optionality || x.group != y.group || x.is_abstract != y.is_abstract ||
        x.children.size() != y.children.size())
        return false;
    for (std::size_t k = 0; k < x.children.size(); ++k)
        if (!same_subtree(a, x.children[k], b, y.children[k])) return false;
    return true;
}

} // namespace

bool structurally_equal(const FeatureModel& a, const FeatureModel& b) {
    if (a.name_ != b.name_ || a.features_.size() != b.features_.size()) return false;
    if (!same_subtree(a, a.root(), b, b.root())) return false;
    return a.constraints_ == b.constraints_ && a.hazards_ == b.hazards_;
}

const char* to_string(GroupKind kind) {
    switch (kind) {
    case GroupKind::none: return "none";
    case GroupKind::and_group: return "and";
    case GroupKind::or_group: return "or-group";
    case GroupKind::xor_group: return "xor-group";
    }
    return "?";
}

const char* to_string(Optionality optionality) {
    switch (optionality) {
    case Optionality::mandatory: return "mandatory";
    case Optionality::optional: return "optional";
    case Optionality::grouped: return "grouped";
    }
    return "?";
}

} // namespace safesple::fm
