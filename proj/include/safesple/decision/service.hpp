#pragma once

#include "safesple/decision/decision.hpp"
#include "safesple/fm/feature_model.hpp"
#include "safesple/gsn/binding.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace safesple::decision {

/// Everything the pipeline reads besides the request.
struct Environment {
    fm::FeatureModel model;
    gsn::Catalog catalog;
    std::map<std::string, gsn::BindingSchema> schemas; // by template id
    evidence::VehicleRegistry vehicles;
    std::shared_ptr<const evidence::WeatherProvider> weather;
    evidence::PilotRegistry pilots;
    PolicySet policies;
    evidence::Clock clock;

    const gsn::BindingSchema& schema(const std::string& template_id) const;
};

/// Reads <root>/templates, <root>/vehicles and <root>/fixtures/{feature_model.fm,
/// feature_map.json, pilots.json, weather.json}. The clock defaults to the
/// system clock.
Environment load_environment(const std::filesystem::path& root, const std::filesystem::path& policy_file,
                             evidence::Clock clock = {});

/// Hypothetical changes to a stored request.
struct WhatIf {
    evidence::WeatherOverrides weather;
    std::optional<std::string> vehicle_model;
    std::optional<evidence::Timestamp> requested_start;
    std::optional<evidence::VehicleSpec> declared_spec_overrides;

    bool empty() const noexcept;
};

/// Keys: surfaceWind, gusts, temperature, visibility, precipitation,
/// vehicleModel, requestedStart, declaredSpecOverrides. Throws
/// ValidationError on unknown keys or malformed values.
WhatIf what_if_from_json(const nlohmann::json& j);
/// Parses "gusts=3", "vehicleModel=DJI Mini 4 Pro", ... as the JSON keys above.
WhatIf what_if_from_assignments(const std::vector<std::string>& assignments);
nlohmann::json to_json(const WhatIf& w);

struct PipelineResult {
    evidence::FlightRequest request;
    evidence::EvidenceBundle bundle;
    std::vector<instantiation::SafetyCaseInstance> instances;
    EntryDecision decision;
};

/// assemble -> select -> instantiate -> decide. The wind case is always
/// produced under openAccess. Throws InvalidConfigurationError when the
/// configuration breaks the feature model, PolicyError for airspaces
/// without a policy.
PipelineResult evaluate(const Environment& env, const evidence::FlightRequest& request, const WhatIf& what_if = {});

nlohmann::json case_document(const PipelineResult& r);

struct StoredRequest {
    nlohmann::json payload;
    nlohmann::json request;
    nlohmann::json instances;
    nlohmann::json decision;
};

/// Append-only: documents are written once per request id.
class RequestStore {
public:
    virtual ~RequestStore() = default;
    virtual std::optional<StoredRequest> get(const std::string& request_id) const = 0;
    /// Throws ConflictError when the id is taken.
    virtual void put(const std::string& request_id, const StoredRequest& doc) = 0;
};

class MemoryStore final : public RequestStore {
public:
    std::optional<StoredRequest> get(const std::string& request_id) const override;
    void put(const std::string& request_id, const StoredRequest& doc) override;

private:
    mutable std::mutex mutex_;
    std::map<std::string, StoredRequest> docs_;
};

/// <dir>/<requestId>/{payload,request,case,decision}.json
class DirectoryStore final : public RequestStore {
public:
    explicit DirectoryStore(std::filesystem::path dir);
    std::optional<StoredRequest> get(const std::string& request_id) const override;
    void put(const std::string& request_id, const StoredRequest& doc) override;

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
};

class DecisionService {
public:
    DecisionService(Environment env, std::shared_ptr<RequestStore> store);

    struct Submission {
        std::string request_id;
        bool created = false;
        nlohmann::json decision;
    };

    /// Validates, runs the pipeline and stores the result. The request id
    /// is the payload's requestId or a hash of the payload. Resubmitting
    /// the same payload returns the stored result; a different payload
    /// under a taken id raises ConflictError.
    Submission submit(const nlohmann::json& payload);

    /// Each throws NotFoundError for unknown ids.
    nlohmann::json get_request(const std::string& request_id) const;
    nlohmann::json get_case(const std::string& request_id) const;
    nlohmann::json get_decision(const std::string& request_id) const;

    /// Re-runs the stored request with `overrides`; nothing is stored.
    nlohmann::json what_if(const std::string& request_id, const nlohmann::json& overrides) const;

    nlohmann::json templates() const;
    nlohmann::json required_evidence(const std::string& template_id) const;
    nlohmann::json feature_model() const;

    const Environment& environment() const noexcept { return env_; }

private:
    StoredRequest load(const std::string& request_id) const;
    std::shared_ptr<std::mutex> lock_for(const std::string& request_id);

    Environment env_;
    std::shared_ptr<RequestStore> store_;
    nlohmann::json feature_model_doc_;
    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

/// HTTP status and body for an exception thrown by the service.
std::pair<int, nlohmann::json> error_response(const std::exception& e);

/// POST /requests, GET /requests/{id}, GET /requests/{id}/case,
/// GET /requests/{id}/decision, POST /requests/{id}/what-if, GET /templates,
/// GET /templates/{id}/required-evidence, GET /feature-model.
void register_routes(httplib::Server& server, DecisionService& service);

} // namespace safesple::decision
