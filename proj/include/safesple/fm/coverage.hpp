#pragma once

#include "safesple/fm/feature_model.hpp"
#include "safesple/gsn/template.hpp"

#include <span>
#include <string>
#include <vector>

namespace safesple::fm {

struct HazardCoverage {
    std::string hazard_id;
    bool covered = false;
    /// Why the hazard is uncovered, e.g. "unknown feature Foo".
    std::vector<std::string> reasons;
    /// "templateId:nodeId" for every referenced node found in the catalog.
    std::vector<std::string> matched_nodes;
};

struct CoverageReport {
    std::vector<HazardCoverage> hazards;
    std::vector<std::string> uncovered;
};

/// A hazard is covered when all of its features exist in `m` and at least
/// one of its node ids names a node of some template in `catalog`.
CoverageReport hazard_coverage(const FeatureModel& m, const gsn::Catalog& catalog);
CoverageReport hazard_coverage(const FeatureModel& m, std::span<const HazardTrace> traces, const gsn::Catalog& catalog);

} // namespace safesple::fm
