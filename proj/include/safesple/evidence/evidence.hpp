#pragma once

#include "safesple/fm/feature_model.hpp"
#include "safesple/values.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace safesple::evidence {

using Timestamp = std::chrono::sys_seconds;
using Clock = std::function<Timestamp()>;

/// "2026-06-01T15:00:00Z"
std::optional<Timestamp> parse_timestamp(std::string_view s);
std::string format_timestamp(Timestamp t);

/// Parameter names the evidence layer knows how to resolve.
namespace params {
inline constexpr const char* airspace = "Airspace";
inline constexpr const char* vehicle = "Vehicle";
inline constexpr const char* pilot = "Pilot";
inline constexpr const char* mission = "Mission";
inline constexpr const char* regulations = "Regulations";
inline constexpr const char* surface_wind = "SurfaceWind";
inline constexpr const char* gusts = "Gusts";
inline constexpr const char* temperature = "Temperature";
inline constexpr const char* visibility = "Visibility";
inline constexpr const char* precipitation = "Precipitation";
inline constexpr const char* max_wind = "MaxAllowedWindSpd";
inline constexpr const char* min_temp = "UASMinTemp";
inline constexpr const char* max_temp = "UASMaxTemp";
inline constexpr const char* allowed_precipitation = "UASAllowedPrecipitation";
inline constexpr const char* min_visibility = "MinVisibility";
inline constexpr const char* available_flight_time = "AvailableFlightTime";
inline constexpr const char* mission_duration = "MissionDuration";
inline constexpr const char* charge_fraction = "ChargeFraction";
inline constexpr const char* pilot_certified = "PilotCertified";
inline constexpr const char* pilot_flight_hours = "PilotFlightHours";
inline constexpr const char* min_flight_hours = "MinFlightHours";

/// Weather-sourced parameters, in template order.
const std::vector<std::string>& weather();
/// Every parameter above.
const std::vector<std::string>& all();
} // namespace params

template <typename T>
struct Sourced {
    T value;
    Provenance provenance;

    bool operator==(const Sourced&) const = default;
};

/// Either "the flight must stay within visual line of sight" or a minimum
/// visibility in km.
struct VisibilityRequirement {
    std::optional<double> km;

    bool vlos() const noexcept { return !km.has_value(); }
    bool operator==(const VisibilityRequirement&) const = default;
};

struct VehicleSpec {
    std::string model;
    std::optional<Sourced<double>> max_wind_speed; // m/s
    std::optional<Sourced<double>> temp_min;       // C
    std::optional<Sourced<double>> temp_max;       // C
    std::optional<Sourced<double>> max_flight_time; // minutes
    std::optional<Sourced<Precipitation>> allowed_precipitation;
    std::optional<Sourced<VisibilityRequirement>> visibility_requirement;
    /// Set for models with no published document: the pilot must declare
    /// the specification.
    bool declaration_required = false;

    bool operator==(const VehicleSpec&) const = default;
};

inline constexpr double default_max_wind_speed = 3.0;

/// Fills absent wind, precipitation and visibility fields with 3 m/s, none
/// and the line-of-sight marker, each tagged default. Present fields are
/// never touched. Throws std::invalid_argument on an empty model.
VehicleSpec apply_spec_defaults(VehicleSpec raw);

/// Fields absent from `j` stay absent. Every present field is tagged
/// `provenance`. Throws ValidationError with field paths.
VehicleSpec vehicle_from_json(const nlohmann::json& j, Provenance provenance, const std::string& path = "");
nlohmann::json to_json(const VehicleSpec& v);

/// Copies every field present in `overrides` into `base`.
VehicleSpec overlay(VehicleSpec base, const VehicleSpec& overrides);

class VehicleRegistry {
public:
    VehicleRegistry() = default;
    explicit VehicleRegistry(std::vector<VehicleSpec> specs);

    const std::vector<VehicleSpec>& specs() const noexcept { return specs_; }
    const VehicleSpec* find(std::string_view model) const;

private:
    std::vector<VehicleSpec> specs_;
};

/// One published document per *.json file in `dir`.
VehicleRegistry load_vehicle_registry(const std::filesystem::path& dir);

/// The registered spec with defaults applied, or for unknown models a spec
/// with `declaration_required` set and no fields.
VehicleSpec lookup_vehicle(const VehicleRegistry& registry, std::string_view model);

struct WeatherSnapshot {
    double surface_wind = 0; // m/s
    double gusts = 0;        // m/s
    double temperature = 0;  // C
    double visibility = 0;   // km, +inf when unlimited
    Precipitation precipitation = Precipitation::none;
    Timestamp observed_at{};
    std::string source;
    bool reliable = true;

    bool operator==(const WeatherSnapshot&) const = default;
};

nlohmann::json to_json(const WeatherSnapshot& w);

class WeatherProvider {
public:
    virtual ~WeatherProvider() = default;
    /// Empty when there is no data for the airspace. Throws ProviderError
    /// when the source cannot be reached.
    virtual std::optional<WeatherSnapshot> fetch(std::string_view airspace_id, Timestamp at) const = 0;
};

/// Forecast windows per airspace, read from a fixture document:
///   {"source", "issuedAt", "horizonHours",
///    "windows": [{"airspaceId", "from", "to", "surfaceWind", "gusts",
///                 "temperature", "visibility", "precipitation"}]}
/// Times more than the horizon past issuedAt get the airspace's latest
/// window, marked unreliable.
class FixtureWeatherProvider final : public WeatherProvider {
public:
    explicit FixtureWeatherProvider(const nlohmann::json& doc);
    static FixtureWeatherProvider load(const std::filesystem::path& path);

    std::optional<WeatherSnapshot> fetch(std::string_view airspace_id, Timestamp at) const override;

    Timestamp issued_at() const noexcept { return issued_at_; }
    std::chrono::seconds horizon() const noexcept { return horizon_; }

private:
    struct Window {
        std::string airspace;
        Timestamp from;
        Timestamp to;
        WeatherSnapshot weather;
    };
    std::string source_;
    Timestamp issued_at_{};
    std::chrono::seconds horizon_{};
    std::vector<Window> windows_;
};

/// GET {base}/weather?airspace=<id>&at=<timestamp>; 200 carries a snapshot
/// document, 404 means no data.
class HttpWeatherProvider final : public WeatherProvider {
public:
    HttpWeatherProvider(std::string host, int port, std::chrono::milliseconds timeout = std::chrono::seconds(5));

    std::optional<WeatherSnapshot> fetch(std::string_view airspace_id, Timestamp at) const override;

private:
    std::string host_;
    int port_;
    std::chrono::milliseconds timeout_;
};

WeatherSnapshot weather_from_json(const nlohmann::json& j, const std::string& path = "");

struct PilotRecord {
    std::string pilot_id;
    std::set<std::string> certifications;
    double flight_hours = 0;
    std::vector<std::string> adverse_history;

    bool operator==(const PilotRecord&) const = default;
};

class PilotRegistry {
public:
    PilotRegistry() = default;
    explicit PilotRegistry(std::vector<PilotRecord> pilots);

    const PilotRecord* find(std::string_view pilot_id) const;
    const std::vector<PilotRecord>& pilots() const noexcept { return pilots_; }

private:
    std::vector<PilotRecord> pilots_;
};

PilotRegistry load_pilot_registry(const std::filesystem::path& path);
nlohmann::json to_json(const PilotRecord& p);

enum class Purpose { recreational, search_and_rescue, delivery };
const char* to_string(Purpose p);

struct MissionPlan {
    std::string mission_id;
    Purpose purpose = Purpose::recreational;
    double planned_duration = 0; // minutes
    bool vlos = true;
    std::string airspace_id;
    Timestamp requested_start{};
    /// State of charge the pilot reports; "fullyCharged" reads as 1.0.
    std::optional<double> charge;

    bool operator==(const MissionPlan&) const = default;
};

/// Per-airspace rules the evidence layer binds as regulation parameters.
struct RegulationProfile {
    std::string name = "default";
    double min_flight_hours = 10;
    double min_visibility_km = 3;
    std::set<std::string> required_certifications{"part107"};

    bool operator==(const RegulationProfile&) const = default;
};

struct FlightRequest {
    std::string request_id;
    std::string pilot_id;
    std::string vehicle_model;
    MissionPlan mission;
    fm::Configuration configuration;
    std::optional<VehicleSpec> declared_spec_overrides;
};

/// Throws ValidationError listing every malformed field by path.
FlightRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FlightRequest& r);

struct EvidenceBundle {
    VehicleSpec vehicle;
    std::optional<WeatherSnapshot> weather;
    std::optional<PilotRecord> pilot;
    MissionPlan mission;
    RegulationProfile regulation;
    fm::Configuration configuration;
    /// Resolved parameter values, each with exactly one provenance.
    std::map<std::string, Binding> bindings;
    /// Parameters whose source returned nothing.
    std::set<std::string> unresolved;
    Timestamp assembled_at{};
};

nlohmann::json to_json(const EvidenceBundle& b);

/// Never fails on missing data: whatever cannot be resolved is listed in
/// `unresolved`. Weather that is absent or unreliable leaves every weather
/// parameter unresolved.
EvidenceBundle assemble_bundle(const FlightRequest& request, const VehicleRegistry& registry,
                               const WeatherProvider& provider, const PilotRegistry& pilots,
                               const RegulationProfile& regulation, const Clock& clock);

/// Weather overrides for what-if runs. Present fields replace the bundle's
/// values, tagged what-if.
struct WeatherOverrides {
    std::optional<double> surface_wind;
    std::optional<double> gusts;
    std::optional<double> temperature;
    std::optional<double> visibility;
    std::optional<Precipitation> precipitation;

    bool empty() const noexcept;
};

void apply_weather_overrides(EvidenceBundle& bundle, const WeatherOverrides& overrides);

} // namespace safesple::evidence
