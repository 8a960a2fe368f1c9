#include "safesple/gsn/binding.hpp"

#include "safesple/error.hpp"
#include "safesple/fm/analysis.hpp"

#include <algorithm>

namespace safesple::gsn {

using nlohmann::json;

bool EquivalenceClass::contains(const Value& v) const {
    return v.index() == low.index() && !(v < low) && !(high < v);
}

bool EquivalenceClass::disjoint(const EquivalenceClass& other) const {
    return high < other.low || other.high < low;
}

FeatureMapping feature_mapping_from_json(const json& j, const SafetyCaseTemplate& t) {
    if (!j.is_array()) throw MappingError("feature mapping must be a list");
    FeatureMapping out;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("feature") || !e.contains("parameter") || !e.contains("class"))
            throw MappingError("mapping entries need feature, parameter and class");
        const auto feature = e.at("feature").get<std::string>();
        const auto parameter = e.at("parameter").get<std::string>();
        const auto* p = t.parameter(parameter);
        if (!p) throw MappingError("feature " + feature + ": unknown parameter " + parameter);
        const auto& c = e.at("class");
        EquivalenceClass cls;
        cls.label = c.value("label", "");
        std::optional<Value> low, high;
        if (c.contains("value")) {
            low = high = value_from_json(p->type, c.at("value"));
        } else if (c.contains("low") && c.contains("high")) {
            low = value_from_json(p->type, c.at("low"));
            high = value_from_json(p->type, c.at("high"));
        }
        if (!low || !high)
            throw MappingError("feature " + feature + ": class is not a " + std::string(to_string(p->type)) + " range");
        cls.low = *low;
        cls.high = *high;
        if (cls.label.empty())
            cls.label = cls.low == cls.high ? format_value(cls.low)
                                            : "[" + format_value(cls.low) + ", " + format_value(cls.high) + "]";
        if (!out.emplace(feature, std::make_pair(parameter, cls)).second)
            throw MappingError("feature " + feature + " mapped twice");
    }
    return out;
}

bool BindingSchema::feature_sourced(const std::string& parameter) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.parameter == parameter; });
}

std::map<std::string, EquivalenceClass> BindingSchema::classes_for(const fm::Configuration& c) const {
    std::map<std::string, EquivalenceClass> out;
    for (const auto& e : entries_) {
        if (!c.selected.count(e.feature)) continue;
        auto [it, inserted] = out.emplace(e.parameter, e.cls);
        if (inserted) continue;
        auto& cur = it->second;
        if (cur.disjoint(e.cls))
            throw ConflictError("[" + e.parameter + "] receives disjoint classes " + cur.label + " and " + e.cls.label);
        if (cur.low < e.cls.low) cur.low = e.cls.low;
        if (e.cls.high < cur.high) cur.high = e.cls.high;
        cur.label += " & " + e.cls.label;
    }
    return out;
}

BindingSchema map_features_to_parameters(const fm::FeatureModel& m, const SafetyCaseTemplate& t,
                                         const FeatureMapping& mapping) {
    BindingSchema schema;
    schema.template_id_ = t.id();
    for (const auto& [feature, target] : mapping) {
        const auto& [parameter, cls] = target;
        if (!m.contains(feature)) throw MappingError("unknown feature " + feature);
        const auto* p = t.parameter(parameter);
        if (!p) throw MappingError("feature " + feature + ": unknown parameter " + parameter);
        if (!value_matches(p->type, cls.low) || !value_matches(p->type, cls.high))
            throw MappingError("feature " + feature + ": class " + cls.label + " is not a " + to_string(p->type));
        if (cls.high < cls.low) throw MappingError("feature " + feature + ": class " + cls.label + " is empty");
        schema.entries_.push_back({feature, parameter, cls});
    }

    const auto model = fm::to_propositional(m);
    for (std::size_t i = 0; i < schema.entries_.size(); ++i) {
        for (std::size_t k = i + 1; k < schema.entries_.size(); ++k) {
            const auto& a = schema.entries_[i];
            const auto& b = schema.entries_[k];
            if (a.parameter != b.parameter || !a.cls.disjoint(b.cls)) continue;
            const auto both = logic::conjoin({model, logic::Formula::var(a.feature), logic::Formula::var(b.feature)});
            if (logic::is_satisfiable(both))
                throw ConflictError(a.feature + " and " + b.feature + " can be selected together but map [" +
                                    a.parameter + "] to disjoint classes " + a.cls.label + " and " + b.cls.label);
        }
    }

    for (const auto& [name, p] : t.parameters())
        if (!schema.feature_sourced(name)) schema.evidence_sourced_.insert(name);
    return schema;
}

} // namespace safesple::gsn
