#include "safesple/fm/coverage.hpp"

namespace safesple::fm {

CoverageReport hazard_coverage(const FeatureModel& m, const gsn::Catalog& catalog) {
    return hazard_coverage(m, m.hazards(), catalog);
}

CoverageReport hazard_coverage(const FeatureModel& m, std::span<const HazardTrace> traces, const gsn::Catalog& catalog) {
    CoverageReport report;
    for (const auto& h : traces) {
        HazardCoverage c;
        c.hazard_id = h.hazard_id;
        for (const auto* list : {&h.contributing_features, &h.mitigating_features})
            for (const auto& f : *list)
                if (!m.contains(f)) c.reasons.push_back("unknown feature " + f);
        if (h.contributing_features.empty()) c.reasons.push_back("no contributing features");
        for (const auto& id : h.template_node_ids)
            for (const auto& t : catalog.templates())
                if (t.contains(id)) c.matched_nodes.push_back(t.id() + ":" + id);
        if (h.template_node_ids.empty()) c.reasons.push_back("no template nodes");
        else if (c.matched_nodes.empty()) c.reasons.push_back("no referenced node exists in the catalog");
        c.covered = c.reasons.empty();
        if (!c.covered) report.uncovered.push_back(h.hazard_id);
        report.hazards.push_back(std::move(c));
    }
    return report;
}

} // namespace safesple::fm
