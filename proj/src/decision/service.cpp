#include "safesple/decision/service.hpp"

#include "json_reader.hpp"
#include "safesple/error.hpp"
#include "safesple/fm/analysis.hpp"
#include "safesple/fm/dsl.hpp"
#include "safesple/hash.hpp"

#include <httplib.h>

#include <fstream>
#include <regex>

namespace safesple::decision {

using nlohmann::json;
namespace inst = instantiation;

const gsn::BindingSchema& Environment::schema(const std::string& template_id) const {
    static const gsn::BindingSchema none;
    auto it = schemas.find(template_id);
    return it == schemas.end() ? none : it->second;
}

Environment load_environment(const std::filesystem::path& root, const std::filesystem::path& policy_file,
                             evidence::Clock clock) {
    const auto fixtures = root / "fixtures";
    auto model = fm::load_feature_model(fixtures / "feature_model.fm");
    auto catalog = gsn::load_catalog(root / "templates");
    std::map<std::string, gsn::BindingSchema> schemas;
    const auto mapping = detail::read_file(fixtures / "feature_map.json");
    for (const auto& t : catalog.templates()) {
        const auto entries = mapping.contains(t.id()) ? mapping.at(t.id()) : json::array();
        schemas.emplace(t.id(), gsn::map_features_to_parameters(model, t, gsn::feature_mapping_from_json(entries, t)));
    }
    if (!clock) clock = [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
    Environment env{std::move(model),
                    std::move(catalog),
                    std::move(schemas),
                    evidence::load_vehicle_registry(root / "vehicles"),
                    std::make_shared<evidence::FixtureWeatherProvider>(
                        evidence::FixtureWeatherProvider::load(fixtures / "weather.json")),
                    evidence::load_pilot_registry(fixtures / "pilots.json"),
                    load_policies(policy_file),
                    std::move(clock)};
    return env;
}

bool WhatIf::empty() const noexcept {
    return weather.empty() && !vehicle_model && !requested_start && !declared_spec_overrides;
}

WhatIf what_if_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError({"whatIf: must be an object"});
    static const std::set<std::string> known{"surfaceWind",  "gusts",          "temperature",
                                             "visibility",   "precipitation",  "vehicleModel",
                                             "requestedStart", "declaredSpecOverrides"};
    std::vector<std::string> errors;
    detail::Reader r(errors);
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) r.fail(key, "unknown override");
    WhatIf w;
    w.weather.surface_wind = r.number(j, "", "surfaceWind", false, 0.0);
    w.weather.gusts = r.number(j, "", "gusts", false, 0.0);
    w.weather.temperature = r.number(j, "", "temperature", false);
    if (j.contains("visibility")) {
        if (j.at("visibility") == "unlimited") w.weather.visibility = HUGE_VAL;
        else if (j.at("visibility").is_number() && j.at("visibility").get<double>() >= 0)
            w.weather.visibility = j.at("visibility").get<double>();
        else r.fail("visibility", "must be \"unlimited\" or a distance in km >= 0");
    }
    w.weather.precipitation = r.precipitation(j, "", "precipitation", false);
    w.vehicle_model = r.string(j, "", "vehicleModel", false);
    w.requested_start = r.timestamp(j, "", "requestedStart", false);
    if (j.contains("declaredSpecOverrides")) {
        try {
            w.declared_spec_overrides =
                evidence::vehicle_from_json(j.at("declaredSpecOverrides"), Provenance::pilot_declared,
                                            "declaredSpecOverrides");
        } catch (const ValidationError& e) {
            errors.insert(errors.end(), e.fields().begin(), e.fields().end());
        }
    }
    if (w.weather.gusts && w.weather.surface_wind && *w.weather.gusts < *w.weather.surface_wind)
        r.fail("gusts", "must be >= surfaceWind");
    detail::throw_if(errors);
    return w;
}

WhatIf what_if_from_assignments(const std::vector<std::string>& assignments) {
    json j = json::object();
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError({a + ": expected key=value"});
        const auto key = a.substr(0, eq);
        const auto value = a.substr(eq + 1);
        j[key] = json::accept(value) ? json::parse(value) : json(value);
    }
    return what_if_from_json(j);
}

json to_json(const WhatIf& w) {
    json j = json::object();
    if (w.weather.surface_wind) j["surfaceWind"] = *w.weather.surface_wind;
    if (w.weather.gusts) j["gusts"] = *w.weather.gusts;
    if (w.weather.temperature) j["temperature"] = *w.weather.temperature;
    if (w.weather.visibility) j["visibility"] = gsn::value_to_json(*w.weather.visibility);
    if (w.weather.precipitation) j["precipitation"] = to_string(*w.weather.precipitation);
    if (w.vehicle_model) j["vehicleModel"] = *w.vehicle_model;
    if (w.requested_start) j["requestedStart"] = evidence::format_timestamp(*w.requested_start);
    if (w.declared_spec_overrides) j["declaredSpecOverrides"] = evidence::to_json(*w.declared_spec_overrides);
    return j;
}

namespace {

void discard_weather(evidence::EvidenceBundle& b) {
    for (const auto& p : evidence::params::weather()) {
        b.bindings.erase(p);
        b.unresolved.insert(p);
    }
    if (b.weather) b.weather->reliable = false;
}

} // namespace

PipelineResult evaluate(const Environment& env, const evidence::FlightRequest& request, const WhatIf& what_if) {
    PipelineResult out;
    out.request = request;
    auto& r = out.request;
    if (what_if.vehicle_model) r.vehicle_model = *what_if.vehicle_model;
    if (what_if.requested_start) r.mission.requested_start = *what_if.requested_start;
    if (what_if.declared_spec_overrides)
        r.declared_spec_overrides = r.declared_spec_overrides
                                        ? evidence::overlay(*r.declared_spec_overrides, *what_if.declared_spec_overrides)
                                        : *what_if.declared_spec_overrides;

    fm::ValidityReport report;
    try {
        report = fm::check_configuration(env.model, r.configuration);
    } catch (const InvalidSelectionError& e) {
        throw InvalidConfigurationError({e.what()});
    }
    if (report.verdict == fm::Verdict::invalid) throw InvalidConfigurationError(report.violations);

    const auto& policy = env.policies.at(r.mission.airspace_id);
    const auto now = env.clock();
    out.bundle = evidence::assemble_bundle(r, env.vehicles, *env.weather, env.pilots, policy.regulation(),
                                           [now] { return now; });
    if (r.mission.requested_start > now + policy.forecast_horizon) discard_weather(out.bundle);
    evidence::apply_weather_overrides(out.bundle, what_if.weather);

    auto instantiate = [&](const std::string& id) {
        const auto* t = env.catalog.find(id);
        return inst::instantiate(*t, env.schema(id), out.bundle);
    };
    const auto first = inst::select_templates(env.catalog);
    out.instances.push_back(instantiate(first.front()));
    auto ids = inst::select_templates(env.catalog, out.instances.front().top_goal_status);
    if (policy.mode == AccessMode::open_access && ids.size() == 1 && first.size() > 1) ids = first;
    for (std::size_t i = 1; i < ids.size(); ++i) out.instances.push_back(instantiate(ids[i]));

    out.decision = decide(r, policy, out.bundle, out.instances, env.catalog, now);
    return out;
}

json case_document(const PipelineResult& r) {
    json j{{"requestId", r.request.request_id}, {"instances", json::array()}, {"evidence", evidence::to_json(r.bundle)}};
    for (const auto& i : r.instances) j["instances"].push_back(inst::to_json(i));
    return j;
}

std::optional<StoredRequest> MemoryStore::get(const std::string& request_id) const {
    std::lock_guard lock(mutex_);
    auto it = docs_.find(request_id);
    if (it == docs_.end()) return std::nullopt;
    return it->second;
}

void MemoryStore::put(const std::string& request_id, const StoredRequest& doc) {
    std::lock_guard lock(mutex_);
    if (!docs_.emplace(request_id, doc).second) throw ConflictError("request " + request_id + " already stored");
}

DirectoryStore::DirectoryStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

namespace {

const char* const store_files[] = {"payload.json", "request.json", "case.json", "decision.json"};

json read_stored(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

void write_once(const std::filesystem::path& p, const json& doc) {
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << doc.dump(2) << '\n';
        if (!out) throw Error("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, p);
}

} // namespace

std::optional<StoredRequest> DirectoryStore::get(const std::string& request_id) const {
    std::lock_guard lock(mutex_);
    const auto d = dir_ / request_id;
    // decision.json is written last; without it the entry is incomplete
    if (!std::filesystem::exists(d / store_files[3])) return std::nullopt;
    return StoredRequest{read_stored(d / store_files[0]), read_stored(d / store_files[1]),
                         read_stored(d / store_files[2]), read_stored(d / store_files[3])};
}

void DirectoryStore::put(const std::string& request_id, const StoredRequest& doc) {
    std::lock_guard lock(mutex_);
    const auto d = dir_ / request_id;
    if (!std::filesystem::create_directory(d)) throw ConflictError("request " + request_id + " already stored");
    write_once(d / store_files[0], doc.payload);
    write_once(d / store_files[1], doc.request);
    write_once(d / store_files[2], doc.instances);
    write_once(d / store_files[3], doc.decision);
}

namespace {

bool valid_request_id(const std::string& id) {
    static const std::regex pattern("[A-Za-z0-9_-][A-Za-z0-9._-]{0,127}");
    return std::regex_match(id, pattern);
}

json feature_model_document(const fm::FeatureModel& m) {
    json features = json::array();
    for (const auto& f : m.features()) {
        json e{{"name", f.name},
               {"optionality", fm::to_string(f.optionality)},
               {"group", fm::to_string(f.group)},
               {"abstract", f.is_abstract}};
        e["parent"] = f.parent ? json(m.feature(*f.parent).name) : json(nullptr);
        features.push_back(std::move(e));
    }
    json constraints = json::array();
    for (const auto& c : m.constraints()) constraints.push_back(c.to_string());
    return {{"name", m.name()},
            {"variantCount", fm::count_variants(m).str()},
            {"features", features},
            {"constraints", constraints},
            {"source", fm::unparse(m)}};
}

} // namespace

DecisionService::DecisionService(Environment env, std::shared_ptr<RequestStore> store)
    : env_(std::move(env)), store_(std::move(store)), feature_model_doc_(feature_model_document(env_.model)) {}

std::shared_ptr<std::mutex> DecisionService::lock_for(const std::string& request_id) {
    std::lock_guard lock(locks_mutex_);
    auto& m = locks_[request_id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

DecisionService::Submission DecisionService::submit(const json& payload) {
    auto request = evidence::request_from_json(payload);
    if (request.request_id.empty()) request.request_id = "req-" + sha256_hex(payload.dump()).substr(0, 16);
    else if (!valid_request_id(request.request_id))
        throw ValidationError({"requestId: must match [A-Za-z0-9._-]+ and not start with '.'"});
    const auto id = request.request_id;

    const auto mutex = lock_for(id);
    std::lock_guard lock(*mutex);
    if (auto existing = store_->get(id)) {
        if (existing->payload != payload) throw ConflictError("request " + id + " already exists with other content");
        return {id, false, existing->decision};
    }
    const auto result = evaluate(env_, request);
    StoredRequest doc{payload, evidence::to_json(result.request), case_document(result), to_json(result.decision)};
    store_->put(id, doc);
    return {id, true, doc.decision};
}

StoredRequest DecisionService::load(const std::string& request_id) const {
    std::optional<StoredRequest> doc;
    if (valid_request_id(request_id)) doc = store_->get(request_id);
    if (!doc) throw NotFoundError("no request " + request_id);
    return *doc;
}

json DecisionService::get_request(const std::string& request_id) const { return load(request_id).request; }
json DecisionService::get_case(const std::string& request_id) const { return load(request_id).instances; }
json DecisionService::get_decision(const std::string& request_id) const { return load(request_id).decision; }

json DecisionService::what_if(const std::string& request_id, const json& overrides) const {
    const auto stored = load(request_id);
    const auto w = what_if_from_json(overrides);
    const auto result = evaluate(env_, evidence::request_from_json(stored.request), w);
    auto doc = case_document(result);
    doc["hypothetical"] = true;
    doc["overrides"] = to_json(w);
    doc["decision"] = to_json(result.decision);
    doc["decision"]["hypothetical"] = true;
    return doc;
}

json DecisionService::templates() const {
    json out = json::array();
    for (const auto& t : env_.catalog.templates()) out.push_back(gsn::to_json(t));
    return out;
}

json DecisionService::required_evidence(const std::string& template_id) const {
    const auto* t = env_.catalog.find(template_id);
    if (!t) throw NotFoundError("no template " + template_id);
    json items = json::array();
    for (const auto& r : inst::required_evidence(*t)) items.push_back(inst::to_json(r));
    return {{"templateId", t->id()}, {"version", t->version()}, {"items", items}};
}

json DecisionService::feature_model() const { return feature_model_doc_; }

std::pair<int, json> error_response(const std::exception& e) {
    json body{{"message", e.what()}};
    auto kind = [&](const char* k, int status) {
        body["error"] = k;
        return std::pair<int, json>(status, body);
    };
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
        body["fields"] = v->fields();
        return kind("validation", 400);
    }
    if (const auto* c = dynamic_cast<const InvalidConfigurationError*>(&e)) {
        body["violations"] = c->violations();
        return kind("invalidConfiguration", 422);
    }
    if (dynamic_cast<const NotFoundError*>(&e)) return kind("notFound", 404);
    if (dynamic_cast<const ConflictError*>(&e)) return kind("conflict", 409);
    if (dynamic_cast<const PolicyError*>(&e)) return kind("policy", 422);
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const json::exception*>(&e)) return kind("parse", 400);
    if (dynamic_cast<const ProviderError*>(&e)) return kind("provider", 502);
    return kind("internal", 500);
}

void register_routes(httplib::Server& server, DecisionService& service) {
    auto handle = [](httplib::Response& res, auto&& body) {
        try {
            auto [status, doc] = body();
            res.status = status;
            res.set_content(doc.dump(), "application/json");
        } catch (const std::exception& e) {
            auto [status, doc] = error_response(e);
            res.status = status;
            res.set_content(doc.dump(), "application/json");
        }
    };
    using Req = httplib::Request;
    using Res = httplib::Response;

    server.Post("/requests", [&service, handle](const Req& req, Res& res) {
        handle(res, [&] {
            const auto s = service.submit(json::parse(req.body));
            return std::pair<int, json>(s.created ? 201 : 200,
                                        {{"requestId", s.request_id}, {"created", s.created}, {"decision", s.decision}});
        });
    });
    server.Get(R"(/requests/([^/]+))", [&service, handle](const Req& req, Res& res) {
        handle(res, [&] { return std::pair<int, json>(200, service.get_request(req.matches[1])); });
    });
    server.Get(R"(/requests/([^/]+)/case)", [&service, handle](const Req& req, Res& res) {
        handle(res, [&] { return std::pair<int, json>(200, service.get_case(req.matches[1])); });
    });
    server.Get(R"(/requests/([^/]+)/decision)", [&service, handle](const Req& req, Res& res) {
        handle(res, [&] { return std::pair<int, json>(200, service.get_decision(req.matches[1])); });
    });
    server.Post(R"(/requests/([^/]+)/what-if)", [&service, handle](const Req& req, Res& res) {
        handle(res, [&] { return std::pair<int, json>(200, service.what_if(req.matches[1], json::parse(req.body))); });
    });
    server.Get("/templates", [&service, handle](const Req&, Res& res) {
        handle(res, [&] { return std::pair<int, json>(200, service.templates()); });
    });
    server.Get(R"(/templates/([^/]+)/required-evidence)", [&service, handle](const Req& req, Res& res) {
        handle(res, [&] { return std::pair<int, json>(200, service.required_evidence(req.matches[1])); });
    });
    server.Get("/feature-model", [&service, handle](const Req&, Res& res) {
        handle(res, [&] { return std::pair<int, json>(200, service.feature_model()); });
    });
}

} // namespace safesple::decision
