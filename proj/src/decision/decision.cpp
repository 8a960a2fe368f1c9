#include "safesple/decision/decision.hpp"

#include "json_reader.hpp"
#include "safesple/error.hpp"

#include <algorithm>
#include <stdexcept>

namespace safesple::decision {

using nlohmann::json;
using instantiation::SafetyCaseInstance;
using instantiation::Status;

const char* to_string(AccessMode m) { return m == AccessMode::closed_access ? "closedAccess" : "openAccess"; }

std::optional<AccessMode> parse_access_mode(std::string_view s) {
    if (s == "closedAccess") return AccessMode::closed_access;
    if (s == "openAccess") return AccessMode::open_access;
    return std::nullopt;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::admit: return "admit";
    case Verdict::deny: return "deny";
    case Verdict::admit_with_advisory: return "admitWithAdvisory";
    }
    return "?";
}

evidence::RegulationProfile AirspacePolicy::regulation() const {
    evidence::RegulationProfile r;
    r.name = regulations;
    r.min_flight_hours = min_flight_hours;
    r.min_visibility_km = min_visibility_km;
    r.required_certifications = required_certifications;
    return r;
}

PolicySet::PolicySet(std::vector<AirspacePolicy> policies) : policies_(std::move(policies)) {
    std::set<std::string> seen;
    for (const auto& p : policies_)
        if (!seen.insert(p.airspace_id).second)
            throw ValidationError({"airspaces: " + p.airspace_id + " listed twice"});
}

const AirspacePolicy& PolicySet::at(std::string_view airspace_id) const {
    for (const auto& p : policies_)
        if (p.airspace_id == airspace_id) return p;
    throw PolicyError("no access policy for airspace " + std::string(airspace_id));
}

PolicySet policies_from_json(const json& j) {
    std::vector<std::string> errors;
    detail::Reader r(errors);
    std::vector<AirspacePolicy> out;
    const auto* list = r.get(j, "", "airspaces", true);
    if (list && !list->is_array()) r.fail("airspaces", "must be a list");
    if (list && list->is_array()) {
        for (std::size_t i = 0; i < list->size(); ++i) {
            const auto& e = (*list)[i];
            const std::string path = "airspaces[" + std::to_string(i) + "]";
            if (!e.is_object()) {
                r.fail(path, "must be an object");
                continue;
            }
            AirspacePolicy p;
            if (auto id = r.string(e, path, "airspaceId", true)) p.airspace_id = *id;
            if (auto mode = r.string(e, path, "mode", true)) {
                if (auto m = parse_access_mode(*mode)) p.mode = *m;
                else r.fail(path + ".mode", "must be closedAccess or openAccess");
            }
            if (auto reg = r.string(e, path, "regulations", false)) p.regulations = *reg;
            if (auto h = r.number(e, path, "minFlightHours", false, 0.0)) p.min_flight_hours = *h;
            if (auto v = r.number(e, path, "minVisibilityKm", false, 0.0)) p.min_visibility_km = *v;
            if (e.contains("requiredCertifications")) {
                const auto certs = r.strings(e, path, "requiredCertifications");
                p.required_certifications = {certs.begin(), certs.end()};
            }
            if (auto h = r.number(e, path, "forecastHorizonHours", false, 0.0))
                p.forecast_horizon = std::chrono::seconds(static_cast<long long>(*h * 3600));
            out.push_back(std::move(p));
        }
    }
    detail::throw_if(errors);
    return PolicySet(std::move(out));
}

PolicySet load_policies(const std::filesystem::path& path) { return policies_from_json(detail::read_file(path)); }

json to_json(const AirspacePolicy& p) {
    return {{"airspaceId", p.airspace_id},
            {"mode", to_string(p.mode)},
            {"regulations", p.regulations},
            {"minFlightHours", p.min_flight_hours},
            {"minVisibilityKm", p.min_visibility_km},
            {"requiredCertifications", p.required_certifications},
            {"forecastHorizonHours", static_cast<double>(p.forecast_horizon.count()) / 3600.0}};
}

json to_json(const EntryDecision& d) {
    return {{"requestId", d.request_id},
            {"airspaceId", d.airspace_id},
            {"verdict", to_string(d.verdict)},
            {"basisInstanceIds", d.basis_instance_ids},
            {"advisory", d.advisory ? to_json(*d.advisory) : json(nullptr)},
            {"reason", d.reason},
            {"decidedAt", evidence::format_timestamp(d.decided_at)},
            {"policyMode", to_string(d.policy_mode)}};
}

int exit_code(const EntryDecision& d) {
    if (d.verdict != Verdict::deny) return 0;
    if (d.advisory && d.advisory->top_goal_status == Status::unresolved) return 2;
    return 1;
}

namespace {

const SafetyCaseInstance* find_instance(const std::vector<SafetyCaseInstance>& instances, std::string_view template_id) {
    for (const auto& i : instances)
        if (i.template_id == template_id) return &i;
    return nullptr;
}

std::string leaf_list(const instantiation::Explanation& e) {
    std::string out;
    for (const auto& entry : e.entries) out += (out.empty() ? "" : ", ") + entry.template_node_id;
    return out;
}

std::string failure_reason(const instantiation::Explanation& e, const evidence::EvidenceBundle& bundle) {
    if (e.top_goal_status == Status::violated)
        return e.template_id + " violated at " + leaf_list(e);
    const bool weather_missing = std::any_of(evidence::params::weather().begin(), evidence::params::weather().end(),
                                             [&](const auto& p) { return bundle.unresolved.count(p) > 0; });
    if (weather_missing)
        return "no reliable weather for " + evidence::format_timestamp(bundle.mission.requested_start) + " (" +
               leaf_list(e) + " unresolved); re-evaluate closer to flight";
    return e.template_id + " unresolved at " + leaf_list(e);
}

} // namespace

EntryDecision decide(const evidence::FlightRequest& request, const AirspacePolicy& policy,
                     const evidence::EvidenceBundle& bundle, const std::vector<SafetyCaseInstance>& instances,
                     const gsn::Catalog& catalog, evidence::Timestamp decided_at) {
    const auto* pilot_case = find_instance(instances, gsn::pilot_template_id);
    if (!pilot_case) throw std::invalid_argument("decide needs the pilot case instance");
    const auto* wind_case = find_instance(instances, gsn::wind_template_id);

    auto explain = [&](const SafetyCaseInstance& inst) {
        const auto* t = catalog.find(inst.template_id);
        if (!t) throw CatalogError("catalog has no template " + inst.template_id);
        return instantiation::explain_denial(inst, *t);
    };

    EntryDecision d;
    d.request_id = request.request_id;
    d.airspace_id = policy.airspace_id;
    d.decided_at = decided_at;
    d.policy_mode = policy.mode;
    d.basis_instance_ids.push_back(pilot_case->instance_id);
    if (wind_case) d.basis_instance_ids.push_back(wind_case->instance_id);

    if (policy.mode == AccessMode::closed_access) {
        if (pilot_case->top_goal_status == Status::satisfied) {
            d.verdict = Verdict::admit;
            d.basis_instance_ids.resize(1);
            d.reason = "pilot case satisfied";
        } else if (wind_case && wind_case->top_goal_status == Status::satisfied) {
            d.verdict = Verdict::admit;
            d.reason = "pilot case not satisfied; wind case satisfied";
        } else {
            d.verdict = Verdict::deny;
            d.advisory = explain(wind_case ? *wind_case : *pilot_case);
            d.reason = failure_reason(*d.advisory, bundle);
        }
        return d;
    }

    const auto* pilot = bundle.pilot ? &*bundle.pilot : nullptr;
    std::vector<std::string> missing;
    if (pilot)
        for (const auto& c : policy.required_certifications)
            if (!pilot->certifications.count(c)) missing.push_back(c);

    if (!pilot || !missing.empty() || !pilot->adverse_history.empty()) {
        d.verdict = Verdict::deny;
        if (!pilot) {
            d.reason = "pilot " + request.pilot_id + " is not registered";
        } else if (!missing.empty()) {
            d.reason = "pilot lacks certification";
            for (const auto& c : missing) d.reason += " " + c;
        } else {
            d.reason = "pilot has adverse history: " + pilot->adverse_history.front();
        }
        if (pilot_case->top_goal_status != Status::satisfied) d.advisory = explain(*pilot_case);
        else if (wind_case && wind_case->top_goal_status != Status::satisfied) d.advisory = explain(*wind_case);
        return d;
    }
    if (wind_case && wind_case->top_goal_status != Status::satisfied) {
        d.verdict = Verdict::admit_with_advisory;
        d.advisory = explain(*wind_case);
        d.reason = "certified pilot; advisory: " + failure_reason(*d.advisory, bundle);
    } else {
        d.verdict = Verdict::admit;
        d.reason = "certified pilot";
    }
    return d;
}

} // namespace safesple::decision
