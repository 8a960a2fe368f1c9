#include "safesple/fm/analysis.hpp"

#include "safesple/error.hpp"

namespace safesple::fm {

using logic::Formula;

std::vector<SemanticConstraint> semantic_constraints(const FeatureModel& m) {
    std::vector<SemanticConstraint> out;
    const auto var = [&](FeatureId id) { return Formula::var(m.feature(id).name); };
    out.push_back({var(m.root()), "root " + m.feature(m.root()).name + " is selected"});

    for (const auto& f : m.features()) {
        if (f.children.empty()) continue;
        const Formula parent = var(f.id);
        switch (f.group) {
        case GroupKind::and_group:
            for (FeatureId c : f.children) {
                const auto& child = m.feature(c);
                if (child.optionality == Optionality::mandatory)
                    out.push_back({logic::iff(var(c), parent), "mandatory child " + child.name + " of " + f.name});
                else
                    out.push_back({logic::implies(var(c), parent), "optional child " + child.name + " of " + f.name});
            }
            break;
        case GroupKind::or_group: {
            std::vector<Formula> members;
            for (FeatureId c : f.children) members.push_back(var(c));
            out.push_back({logic::iff(parent, logic::disjoin(std::move(members))), "or-group under " + f.name});
            break;
        }
        case GroupKind::xor_group: {
            std::vector<Formula> members;
            std::vector<Formula> parts;
            for (FeatureId c : f.children) {
                members.push_back(var(c));
                parts.push_back(logic::implies(var(c), parent));
            }
            parts.insert(parts.begin(), logic::implies(parent, logic::exactly_one(std::move(members))));
            out.push_back({logic::conjoin(std::move(parts)), "xor-group under " + f.name});
            break;
        }
        case GroupKind::none:
            break;
        }
    }
    for (const auto& c : m.constraints()) out.push_back({c, "constraint " + c.to_string()});
    return out;
}

Formula to_propositional(const FeatureModel& m) {
    std::vector<Formula> parts;
    for (auto& s : semantic_constraints(m)) parts.push_back(std::move(s.formula));
    return logic::conjoin(std::move(parts));
}

logic::Count count_variants(const FeatureModel& m) {
    return logic::count_models_exact(to_propositional(m), m.concrete_features());
}

namespace {

std::vector<Formula> literals(const Configuration& c) {
    std::vector<Formula> out;
    for (const auto& n : c.selected) out.push_back(Formula::var(n));
    for (const auto& n : c.deselected) out.push_back(logic::negate(Formula::var(n)));
    return out;
}

std::vector<std::string> selection_problems(const FeatureModel& m, const Configuration& c) {
    std::vector<std::string> out;
    for (const auto* set : {&c.selected, &c.deselected})
        for (const auto& n : *set)
            if (!m.contains(n)) out.push_back("unknown feature " + n);
    for (const auto& n : c.selected)
        if (c.deselected.count(n)) out.push_back("feature " + n + " is both selected and deselected");
    return out;
}

bool consistent(const std::vector<SemanticConstraint>& pieces, const std::vector<bool>& keep,
                const std::vector<Formula>& lits) {
    std::vector<Formula> parts = lits;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (keep[i]) parts.push_back(pieces[i].formula);
    return logic::is_satisfiable(logic::conjoin(std::move(parts))).has_value();
}

} // namespace

logic::Count slice_count(const FeatureModel& m, const Configuration& fixed) {
    const auto problems = selection_problems(m, fixed);
    if (!problems.empty()) throw InvalidSelectionError(problems.front());
    std::vector<Formula> parts = literals(fixed);
    parts.push_back(to_propositional(m));
    return logic::count_models_exact(logic::conjoin(std::move(parts)), m.concrete_features());
}

ValidityReport check_configuration(const FeatureModel& m, const Configuration& c) {
    ValidityReport report;
    report.violations = selection_problems(m, c);
    if (!report.violations.empty()) return report;

    for (const auto& n : m.concrete_features())
        if (!c.selected.count(n) && !c.deselected.count(n)) report.undecided.push_back(n);

    const auto pieces = semantic_constraints(m);
    const auto lits = literals(c);
    std::vector<bool> keep(pieces.size(), true);
    if (consistent(pieces, keep, lits)) {
        if (report.undecided.empty()) {
            report.verdict = Verdict::valid;
        } else if (!c.partial) {
            report.verdict = Verdict::invalid;
            report.violations.push_back("complete configuration leaves " + std::to_string(report.undecided.size()) +
                                        " feature(s) undecided, e.g. " + report.undecided.front());
        } else {
            report.verdict = Verdict::incomplete_but_extensible;
        }
        return report;
    }

    // Deletion-based shrinking: drop every piece whose removal keeps the
    // selection inconsistent. Tree semantics are tried first so cross-tree
    // constraints survive into the explanation when they suffice.
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        keep[i] = false;
        if (consistent(pieces, keep, lits)) keep[i] = true;
    }
    report.verdict = Verdict::invalid;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (keep[i]) report.violations.push_back(pieces[i].description);
    return report;
}

std::vector<Configuration> enumerate_variants(const FeatureModel& m, std::size_t limit) {
    std::vector<Configuration> out;
    for (const auto& a : logic::enumerate_models(to_propositional(m), m.concrete_features(),
                                                 {.max = limit, .exhaustive = true})) {
        Configuration c;
        c.partial = false;
        for (const auto& [name, on] : a) (on ? c.selected : c.deselected).insert(name);
        out.push_back(std::move(c));
    }
    return out;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::valid: return "valid";
    case Verdict::invalid: return "invalid";
    case Verdict::incomplete_but_extensible: return "incomplete-but-extensible";
    }
    return "?";
}

} // namespace safesple::fm
