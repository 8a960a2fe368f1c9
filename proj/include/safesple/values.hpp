#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace safesple {

/// Ordered: none < light < moderate < heavy.
enum class Precipitation { none, light, moderate, heavy };

const char* to_string(Precipitation p);
std::optional<Precipitation> parse_precipitation(std::string_view s);

/// Where a bound value came from. Every bound value carries exactly one tag.
enum class Provenance {
    published,
    pilot_declared,
    default_rule,
    weather_service,
    pilot_registry,
    mission_plan,
    regulation,
    feature_class,
    derived,
    what_if,
};

const char* to_string(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view s);

/// A parameter value. Magnitudes are doubles in the parameter's unit;
/// unlimited visibility is +infinity.
using Value = std::variant<bool, double, Precipitation, std::string>;

/// Human-readable rendering: "6", "0.9", "unlimited", "none", "true".
std::string format_value(const Value& v);

struct Binding {
    Value value;
    Provenance provenance;

    bool operator==(const Binding&) const = default;
};

} // namespace safesple
