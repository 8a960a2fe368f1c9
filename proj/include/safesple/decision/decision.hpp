#pragma once

#include "safesple/evidence/evidence.hpp"
#include "safesple/gsn/template.hpp"
#include "safesple/instantiation/instance.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace safesple::decision {

enum class AccessMode { closed_access, open_access };
const char* to_string(AccessMode m);
std::optional<AccessMode> parse_access_mode(std::string_view s);

struct AirspacePolicy {
    std::string airspace_id;
    AccessMode mode = AccessMode::closed_access;
    std::string regulations = "default";
    /// Not a published figure; set per airspace.
    double min_flight_hours = 10;
    double min_visibility_km = 3;
    std::set<std::string> required_certifications{"part107"};
    /// Requests starting further than this past the decision time are
    /// evaluated without weather.
    std::chrono::seconds forecast_horizon = std::chrono::hours(240);

    evidence::RegulationProfile regulation() const;
    bool operator==(const AirspacePolicy&) const = default;
};

class PolicySet {
public:
    PolicySet() = default;
    /// Throws ValidationError on duplicate airspaces.
    explicit PolicySet(std::vector<AirspacePolicy> policies);

    const std::vector<AirspacePolicy>& policies() const noexcept { return policies_; }
    /// Throws PolicyError when the airspace has no policy.
    const AirspacePolicy& at(std::string_view airspace_id) const;

private:
    std::vector<AirspacePolicy> policies_;
};

/// {"airspaces": [{"airspaceId", "mode", "regulations"?, "minFlightHours"?,
///   "minVisibilityKm"?, "requiredCertifications"?, "forecastHorizonHours"?}]}
/// Throws ValidationError with field paths; mode is required.
PolicySet policies_from_json(const nlohmann::json& j);
PolicySet load_policies(const std::filesystem::path& path);
nlohmann::json to_json(const AirspacePolicy& p);

enum class Verdict { admit, deny, admit_with_advisory };
const char* to_string(Verdict v);

struct EntryDecision {
    std::string request_id;
    std::string airspace_id;
    Verdict verdict = Verdict::deny;
    std::vector<std::string> basis_instance_ids;
    /// Present on deny and admitWithAdvisory whenever a case failed to hold.
    std::optional<instantiation::Explanation> advisory;
    std::string reason;
    evidence::Timestamp decided_at{};
    AccessMode policy_mode = AccessMode::closed_access;
};

nlohmann::json to_json(const EntryDecision& d);

/// Exit status for command-line use: 0 admit, 1 deny, 2 deny because the
/// evidence is unresolved.
int exit_code(const EntryDecision& d);

/// closedAccess admits when the pilot case is satisfied, or failing that
/// when the wind case is; otherwise it denies and explains the wind case
/// (the pilot case when no wind case was produced).
///
/// openAccess admits a pilot who holds every required certification and
/// has no adverse history, attaching the wind case as an advisory when its
/// top goal is not satisfied; anyone else is denied.
///
/// `instances` must contain the pilot case (std::invalid_argument).
EntryDecision decide(const evidence::FlightRequest& request, const AirspacePolicy& policy,
                     const evidence::EvidenceBundle& bundle,
                     const std::vector<instantiation::SafetyCaseInstance>& instances, const gsn::Catalog& catalog,
                     evidence::Timestamp decided_at);

} // namespace safesple::decision
