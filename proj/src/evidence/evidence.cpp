#include "safesple/evidence/evidence.hpp"

#include "safesple/error.hpp"
#include "json_reader.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace safesple::evidence {

using nlohmann::json;
using detail::Reader;
using detail::read_file;
using detail::throw_if;

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, consumed = 0;
    const std::string text(s);
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6 ||
        consumed != static_cast<int>(text.size()) || text.size() != 20)
        return std::nullopt;
    const std::chrono::year_month_day date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(mo)),
                                           std::chrono::day(static_cast<unsigned>(d))};
    if (!date.ok() || h > 23 || mi > 59 || sec > 59) return std::nullopt;
    return std::chrono::sys_days(date) + std::chrono::hours(h) + std::chrono::minutes(mi) + std::chrono::seconds(sec);
}

std::string format_timestamp(Timestamp t) {
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day date(day);
    const std::chrono::hh_mm_ss time(t - day);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                  static_cast<int>(time.hours().count()), static_cast<int>(time.minutes().count()),
                  static_cast<int>(time.seconds().count()));
    return buf;
}

namespace params {

const std::vector<std::string>& weather() {
    static const std::vector<std::string> names{surface_wind, gusts, temperature, visibility, precipitation};
    return names;
}

const std::vector<std::string>& all() {
    static const std::vector<std::string> names{
        airspace,      vehicle,          pilot,        mission,    regulations,       surface_wind,
        gusts,         temperature,      visibility,   precipitation, max_wind,       min_temp,
        max_temp,      allowed_precipitation, min_visibility, available_flight_time, mission_duration,
        charge_fraction, pilot_certified, pilot_flight_hours, min_flight_hours,
    };
    return names;
}

} // namespace params

namespace {

json visibility_json(double km) { return std::isinf(km) ? json("unlimited") : json(km); }

} // namespace

VehicleSpec apply_spec_defaults(VehicleSpec raw) {
    if (raw.model.empty()) throw std::invalid_argument("vehicle spec without a model");
    if (!raw.max_wind_speed) raw.max_wind_speed = Sourced<double>{default_max_wind_speed, Provenance::default_rule};
    if (!raw.allowed_precipitation)
        raw.allowed_precipitation = Sourced<Precipitation>{Precipitation::none, Provenance::default_rule};
    if (!raw.visibility_requirement)
        raw.visibility_requirement = Sourced<VisibilityRequirement>{VisibilityRequirement{}, Provenance::default_rule};
    return raw;
}

VehicleSpec vehicle_from_json(const json& j, Provenance provenance, const std::string& path) {
    std::vector<std::string> errors;
    Reader r(errors);
    VehicleSpec v;
    if (!j.is_object()) throw ValidationError({(path.empty() ? "vehicle" : path) + ": must be an object"});
    if (auto m = r.string(j, path, "model", false)) v.model = *m;
    const auto tag = [&](std::optional<double> x) {
        return x ? std::optional<Sourced<double>>(Sourced<double>{*x, provenance}) : std::nullopt;
    };
    v.max_wind_speed = tag(r.number(j, path, "maxWindSpeed", false, 0.0));
    v.temp_min = tag(r.number(j, path, "tempMin", false));
    v.temp_max = tag(r.number(j, path, "tempMax", false));
    v.max_flight_time = tag(r.number(j, path, "maxFlightTime", false, 0.0));
    if (auto p = r.precipitation(j, path, "allowedPrecipitation", false))
        v.allowed_precipitation = Sourced<Precipitation>{*p, provenance};
    if (const auto* vis = r.get(j, path, "visibilityRequirement", false)) {
        if (*vis == "VLOS") v.visibility_requirement = Sourced<VisibilityRequirement>{{}, provenance};
        else if (vis->is_number() && vis->get<double>() >= 0)
            v.visibility_requirement = Sourced<VisibilityRequirement>{{vis->get<double>()}, provenance};
        else r.fail(Reader::join(path, "visibilityRequirement"), "must be \"VLOS\" or a distance in km >= 0");
    }
    if (v.temp_min && v.temp_max && !(v.temp_min->value < v.temp_max->value))
        r.fail(Reader::join(path, "tempMin"), "must be below tempMax");
    throw_if(errors);
    return v;
}

json to_json(const VehicleSpec& v) {
    json j{{"model", v.model}};
    const auto put = [&](const char* key, const auto& field, auto&& convert) {
        if (field) j[key] = {{"value", convert(field->value)}, {"provenance", to_string(field->provenance)}};
    };
    const auto id = [](double x) { return x; };
    put("maxWindSpeed", v.max_wind_speed, id);
    put("tempMin", v.temp_min, id);
    put("tempMax", v.temp_max, id);
    put("maxFlightTime", v.max_flight_time, id);
    put("allowedPrecipitation", v.allowed_precipitation, [](Precipitation p) { return to_string(p); });
    put("visibilityRequirement", v.visibility_requirement,
        [](const VisibilityRequirement& r) { return r.vlos() ? json("VLOS") : json(*r.km); });
    if (v.declaration_required) j["declarationRequired"] = true;
    return j;
}

VehicleSpec overlay(VehicleSpec base, const VehicleSpec& o) {
    if (!o.model.empty()) base.model = o.model;
    if (o.max_wind_speed) base.max_wind_speed = o.max_wind_speed;
    if (o.temp_min) base.temp_min = o.temp_min;
    if (o.temp_max) base.temp_max = o.temp_max;
    if (o.max_flight_time) base.max_flight_time = o.max_flight_time;
    if (o.allowed_precipitation) base.allowed_precipitation = o.allowed_precipitation;
    if (o.visibility_requirement) base.visibility_requirement = o.visibility_requirement;
    return base;
}

VehicleRegistry::VehicleRegistry(std::vector<VehicleSpec> specs) : specs_(std::move(specs)) {}

const VehicleSpec* VehicleRegistry::find(std::string_view model) const {
    for (const auto& s : specs_)
        if (s.model == model) return &s;
    return nullptr;
}

VehicleRegistry load_vehicle_registry(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<VehicleSpec> specs;
    for (const auto& f : files) {
        auto spec = vehicle_from_json(read_file(f), Provenance::published, f.filename().string());
        if (spec.model.empty()) throw ValidationError({f.filename().string() + ".model: required"});
        specs.push_back(std::move(spec));
    }
    return VehicleRegistry(std::move(specs));
}

VehicleSpec lookup_vehicle(const VehicleRegistry& registry, std::string_view model) {
    if (const auto* spec = registry.find(model)) return apply_spec_defaults(*spec);
    VehicleSpec unknown;
    unknown.model = std::string(model);
    unknown.declaration_required = true;
    return unknown;
}

WeatherSnapshot weather_from_json(const json& j, const std::string& path) {
    std::vector<std::string> errors;
    Reader r(errors);
    WeatherSnapshot w;
    w.surface_wind = r.number(j, path, "surfaceWind", true, 0.0).value_or(0);
    w.gusts = r.number(j, path, "gusts", true, 0.0).value_or(0);
    w.temperature = r.number(j, path, "temperature", true).value_or(0);
    if (const auto* vis = r.get(j, path, "visibility", true)) {
        if (*vis == "unlimited") w.visibility = HUGE_VAL;
        else if (vis->is_number() && vis->get<double>() >= 0) w.visibility = vis->get<double>();
        else r.fail(Reader::join(path, "visibility"), "must be \"unlimited\" or a distance in km >= 0");
    }
    w.precipitation = r.precipitation(j, path, "precipitation", true).value_or(Precipitation::none);
    if (w.gusts < w.surface_wind) r.fail(Reader::join(path, "gusts"), "must be >= surfaceWind");
    if (j.contains("observedAt")) w.observed_at = r.timestamp(j, path, "observedAt", false).value_or(Timestamp{});
    if (j.contains("source")) w.source = r.string(j, path, "source", false).value_or("");
    if (j.contains("reliable")) w.reliable = r.boolean(j, path, "reliable", false).value_or(true);
    throw_if(errors);
    return w;
}

json to_json(const WeatherSnapshot& w) {
    return {{"surfaceWind", w.surface_wind},
            {"gusts", w.gusts},
            {"temperature", w.temperature},
            {"visibility", visibility_json(w.visibility)},
            {"precipitation", to_string(w.precipitation)},
            {"observedAt", format_timestamp(w.observed_at)},
            {"source", w.source},
            {"reliable", w.reliable}};
}

FixtureWeatherProvider::FixtureWeatherProvider(const json& doc) {
    std::vector<std::string> errors;
    Reader r(errors);
    source_ = r.string(doc, "", "source", false).value_or("fixture");
    issued_at_ = r.timestamp(doc, "", "issuedAt", true).value_or(Timestamp{});
    const double hours = r.number(doc, "", "horizonHours", true, 0.0).value_or(0);
    horizon_ = std::chrono::seconds(static_cast<long long>(hours * 3600));
    const auto* windows = r.get(doc, "", "windows", true);
    if (windows && !windows->is_array()) r.fail("windows", "must be a list");
    if (windows && windows->is_array()) {
        for (std::size_t i = 0; i < windows->size(); ++i) {
            const auto& w = (*windows)[i];
            const std::string path = "windows[" + std::to_string(i) + "]";
            Window win;
            win.airspace = r.string(w, path, "airspaceId", true).value_or("");
            win.from = r.timestamp(w, path, "from", true).value_or(Timestamp{});
            win.to = r.timestamp(w, path, "to", true).value_or(Timestamp{});
            if (!(win.from < win.to)) r.fail(path + ".to", "must be after from");
            try {
                win.weather = weather_from_json(w, path);
            } catch (const ValidationError& e) {
                errors.insert(errors.end(), e.fields().begin(), e.fields().end());
            }
            win.weather.observed_at = issued_at_;
            win.weather.source = source_;
            windows_.push_back(std::move(win));
        }
    }
    throw_if(errors);
}

FixtureWeatherProvider FixtureWeatherProvider::load(const std::filesystem::path& path) {
    return FixtureWeatherProvider(read_file(path));
}

std::optional<WeatherSnapshot> FixtureWeatherProvider::fetch(std::string_view airspace_id, Timestamp at) const {
    const Window* latest = nullptr;
    for (const auto& w : windows_) {
        if (w.airspace != airspace_id) continue;
        if (!latest || latest->from < w.from) latest = &w;
    }
    if (!latest) return std::nullopt;
    if (at > issued_at_ + horizon_) {
        auto snapshot = latest->weather;
        snapshot.reliable = false;
        return snapshot;
    }
    for (const auto& w : windows_)
        if (w.airspace == airspace_id && w.from <= at && at < w.to) return w.weather;
    return std::nullopt;
}

HttpWeatherProvider::HttpWeatherProvider(std::string host, int port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

std::optional<WeatherSnapshot> HttpWeatherProvider::fetch(std::string_view airspace_id, Timestamp at) const {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    const httplib::Params query{{"airspace", std::string(airspace_id)}, {"at", format_timestamp(at)}};
    const auto res = client.Get("/weather", query, httplib::Headers{});
    if (!res) throw ProviderError("weather service " + host_ + ":" + std::to_string(port_) + ": " +
                                  httplib::to_string(res.error()));
    if (res->status == 404) return std::nullopt;
    if (res->status != 200) throw ProviderError("weather service answered " + std::to_string(res->status));
    try {
        return weather_from_json(json::parse(res->body));
    } catch (const json::exception& e) {
        throw ProviderError(std::string("weather service sent a malformed document: ") + e.what());
    } catch (const ValidationError& e) {
        throw ProviderError(std::string("weather service sent an invalid snapshot: ") + e.what());
    }
}

PilotRegistry::PilotRegistry(std::vector<PilotRecord> pilots) : pilots_(std::move(pilots)) {}

const PilotRecord* PilotRegistry::find(std::string_view pilot_id) const {
    for (const auto& p : pilots_)
        if (p.pilot_id == pilot_id) return &p;
    return nullptr;
}

PilotRegistry load_pilot_registry(const std::filesystem::path& path) {
    const auto doc = read_file(path);
    std::vector<std::string> errors;
    Reader r(errors);
    std::vector<PilotRecord> pilots;
    if (!doc.is_array()) throw ValidationError({"pilots: must be a list"});
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string p = "[" + std::to_string(i) + "]";
        PilotRecord rec;
        rec.pilot_id = r.string(doc[i], p, "pilotId", true).value_or("");
        for (auto& c : r.strings(doc[i], p, "certifications")) rec.certifications.insert(std::move(c));
        rec.flight_hours = r.number(doc[i], p, "flightHours", true, 0.0).value_or(0);
        rec.adverse_history = r.strings(doc[i], p, "adverseHistory");
        pilots.push_back(std::move(rec));
    }
    throw_if(errors);
    return PilotRegistry(std::move(pilots));
}

json to_json(const PilotRecord& p) {
    return {{"pilotId", p.pilot_id},
            {"certifications", p.certifications},
            {"flightHours", p.flight_hours},
            {"adverseHistory", p.adverse_history}};
}

const char* to_string(Purpose p) {
    switch (p) {
    case Purpose::recreational: return "recreational";
    case Purpose::search_and_rescue: return "searchAndRescue";
    case Purpose::delivery: return "delivery";
    }
    return "?";
}

FlightRequest request_from_json(const json& j) {
    std::vector<std::string> errors;
    Reader r(errors);
    FlightRequest req;
    if (!j.is_object()) throw ValidationError({"request: must be an object"});
    req.request_id = r.string(j, "", "requestId", false).value_or("");
    req.pilot_id = r.string(j, "", "pilotId", true).value_or("");
    req.vehicle_model = r.string(j, "", "vehicleModel", true).value_or("");

    if (const auto* m = r.get(j, "", "mission", true)) {
        if (!m->is_object()) {
            r.fail("mission", "must be an object");
        } else {
            auto& plan = req.mission;
            plan.mission_id = r.string(*m, "mission", "missionId", true).value_or("");
            if (const auto purpose = r.string(*m, "mission", "purpose", true)) {
                if (*purpose == "recreational") plan.purpose = Purpose::recreational;
                else if (*purpose == "searchAndRescue") plan.purpose = Purpose::search_and_rescue;
                else if (*purpose == "delivery") plan.purpose = Purpose::delivery;
                else r.fail("mission.purpose", "must be one of recreational, searchAndRescue, delivery");
            }
            plan.planned_duration = r.number(*m, "mission", "plannedDuration", true, 0.0, true).value_or(0);
            plan.vlos = r.boolean(*m, "mission", "vlos", true).value_or(true);
            plan.airspace_id = r.string(*m, "mission", "airspaceId", true).value_or("");
            plan.requested_start = r.timestamp(*m, "mission", "requestedStart", true).value_or(Timestamp{});
            if (const auto* c = r.get(*m, "mission", "batteryCharge", false)) {
                if (*c == "fullyCharged") plan.charge = 1.0;
                else if (c->is_number() && c->get<double>() >= 0 && c->get<double>() <= 1) plan.charge = c->get<double>();
                else r.fail("mission.batteryCharge", "must be \"fullyCharged\" or a fraction in [0, 1]");
            }
        }
    }

    if (const auto* c = r.get(j, "", "configuration", false)) {
        if (!c->is_object()) {
            r.fail("configuration", "must be an object");
        } else {
            for (auto& n : r.strings(*c, "configuration", "selected")) req.configuration.selected.insert(std::move(n));
            for (auto& n : r.strings(*c, "configuration", "deselected")) req.configuration.deselected.insert(std::move(n));
            req.configuration.partial = r.boolean(*c, "configuration", "partial", false).value_or(true);
        }
    }

    if (const auto* o = r.get(j, "", "declaredSpecOverrides", false)) {
        try {
            req.declared_spec_overrides = vehicle_from_json(*o, Provenance::pilot_declared, "declaredSpecOverrides");
        } catch (const ValidationError& e) {
            errors.insert(errors.end(), e.fields().begin(), e.fields().end());
        }
    }
    throw_if(errors);
    return req;
}

json to_json(const FlightRequest& r) {
    json mission{{"missionId", r.mission.mission_id},
                 {"purpose", to_string(r.mission.purpose)},
                 {"plannedDuration", r.mission.planned_duration},
                 {"vlos", r.mission.vlos},
                 {"airspaceId", r.mission.airspace_id},
                 {"requestedStart", format_timestamp(r.mission.requested_start)}};
    if (r.mission.charge) {
        if (*r.mission.charge == 1.0) mission["batteryCharge"] = "fullyCharged";
        else mission["batteryCharge"] = *r.mission.charge;
    }
    json j{{"requestId", r.request_id},
           {"pilotId", r.pilot_id},
           {"vehicleModel", r.vehicle_model},
           {"mission", mission},
           {"configuration",
            {{"selected", r.configuration.selected},
             {"deselected", r.configuration.deselected},
             {"partial", r.configuration.partial}}}};
    if (r.declared_spec_overrides) {
        json o;
        const auto& v = *r.declared_spec_overrides;
        if (!v.model.empty()) o["model"] = v.model;
        if (v.max_wind_speed) o["maxWindSpeed"] = v.max_wind_speed->value;
        if (v.temp_min) o["tempMin"] = v.temp_min->value;
        if (v.temp_max) o["tempMax"] = v.temp_max->value;
        if (v.max_flight_time) o["maxFlightTime"] = v.max_flight_time->value;
        if (v.allowed_precipitation) o["allowedPrecipitation"] = to_string(v.allowed_precipitation->value);
        if (v.visibility_requirement)
            o["visibilityRequirement"] =
                v.visibility_requirement->value.vlos() ? json("VLOS") : json(*v.visibility_requirement->value.km);
        j["declaredSpecOverrides"] = o.is_null() ? json::object() : o;
    }
    return j;
}

json to_json(const EvidenceBundle& b) {
    json bindings = json::object();
    for (const auto& [name, binding] : b.bindings)
        bindings[name] = {{"value", format_value(binding.value)}, {"provenance", to_string(binding.provenance)}};
    return {{"vehicle", to_json(b.vehicle)},
            {"weather", b.weather ? to_json(*b.weather) : json(nullptr)},
            {"pilot", b.pilot ? to_json(*b.pilot) : json(nullptr)},
            {"regulation",
             {{"name", b.regulation.name},
              {"minFlightHours", b.regulation.min_flight_hours},
              {"minVisibilityKm", b.regulation.min_visibility_km},
              {"requiredCertifications", b.regulation.required_certifications}}},
            {"bindings", bindings},
            {"unresolved", b.unresolved},
            {"assembledAt", format_timestamp(b.assembled_at)}};
}

EvidenceBundle assemble_bundle(const FlightRequest& request, const VehicleRegistry& registry,
                               const WeatherProvider& provider, const PilotRegistry& pilots,
                               const RegulationProfile& regulation, const Clock& clock) {
    EvidenceBundle b;
    b.mission = request.mission;
    b.regulation = regulation;
    b.configuration = request.configuration;
    b.assembled_at = clock();

    b.vehicle = lookup_vehicle(registry, request.vehicle_model);
    if (request.declared_spec_overrides) {
        auto declared = *request.declared_spec_overrides;
        declared.model.clear();
        b.vehicle = overlay(std::move(b.vehicle), declared);
    }
    b.vehicle = apply_spec_defaults(std::move(b.vehicle));

    if (const auto* p = pilots.find(request.pilot_id)) b.pilot = *p;
    b.weather = provider.fetch(request.mission.airspace_id, request.mission.requested_start);

    auto& out = b.bindings;
    const auto bind = [&](const char* name, Value v, Provenance p) { out.emplace(name, Binding{std::move(v), p}); };

    bind(params::airspace, request.mission.airspace_id, Provenance::mission_plan);
    bind(params::vehicle, request.vehicle_model, Provenance::pilot_declared);
    bind(params::pilot, request.pilot_id, b.pilot ? Provenance::pilot_registry : Provenance::pilot_declared);
    bind(params::mission, request.mission.mission_id, Provenance::mission_plan);
    bind(params::regulations, regulation.name, Provenance::regulation);

    if (b.weather && b.weather->reliable) {
        const auto& w = *b.weather;
        bind(params::surface_wind, w.surface_wind, Provenance::weather_service);
        bind(params::gusts, w.gusts, Provenance::weather_service);
        bind(params::temperature, w.temperature, Provenance::weather_service);
        bind(params::visibility, w.visibility, Provenance::weather_service);
        bind(params::precipitation, w.precipitation, Provenance::weather_service);
    }

    const auto& v = b.vehicle;
    if (v.max_wind_speed) bind(params::max_wind, v.max_wind_speed->value, v.max_wind_speed->provenance);
    if (v.temp_min) bind(params::min_temp, v.temp_min->value, v.temp_min->provenance);
    if (v.temp_max) bind(params::max_temp, v.temp_max->value, v.temp_max->provenance);
    if (v.allowed_precipitation)
        bind(params::allowed_precipitation, v.allowed_precipitation->value, v.allowed_precipitation->provenance);
    if (v.visibility_requirement) {
        const auto& req = v.visibility_requirement->value;
        if (req.vlos()) bind(params::min_visibility, regulation.min_visibility_km, Provenance::regulation);
        else bind(params::min_visibility, *req.km, v.visibility_requirement->provenance);
    }
    if (v.max_flight_time && request.mission.charge)
        bind(params::available_flight_time, v.max_flight_time->value * *request.mission.charge, Provenance::derived);

    bind(params::mission_duration, request.mission.planned_duration, Provenance::mission_plan);
    if (request.mission.charge) bind(params::charge_fraction, *request.mission.charge, Provenance::pilot_declared);

    if (b.pilot) {
        const bool certified = std::includes(b.pilot->certifications.begin(), b.pilot->certifications.end(),
                                             regulation.required_certifications.begin(),
                                             regulation.required_certifications.end());
        bind(params::pilot_certified, certified, Provenance::pilot_registry);
        bind(params::pilot_flight_hours, b.pilot->flight_hours, Provenance::pilot_registry);
    }
    bind(params::min_flight_hours, regulation.min_flight_hours, Provenance::regulation);

    for (const auto& name : params::all())
        if (!out.count(name)) b.unresolved.insert(name);
    return b;
}

bool WeatherOverrides::empty() const noexcept {
    return !surface_wind && !gusts && !temperature && !visibility && !precipitation;
}

void apply_weather_overrides(EvidenceBundle& bundle, const WeatherOverrides& o) {
    const auto set = [&](const char* name, std::optional<Value> v) {
        if (!v) return;
        bundle.bindings.insert_or_assign(name, Binding{std::move(*v), Provenance::what_if});
        bundle.unresolved.erase(name);
    };
    const auto num = [](std::optional<double> x) { return x ? std::optional<Value>(*x) : std::nullopt; };
    set(params::surface_wind, num(o.surface_wind));
    set(params::gusts, num(o.gusts));
    set(params::temperature, num(o.temperature));
    set(params::visibility, num(o.visibility));
    set(params::precipitation, o.precipitation ? std::optional<Value>(*o.precipitation) : std::nullopt);
}

} // namespace safesple::evidence
