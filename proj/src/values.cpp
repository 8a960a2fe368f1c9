#include "safesple/values.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace safesple {

namespace {

constexpr std::array precipitation_names{"none", "light", "moderate", "heavy"};

constexpr std::array provenance_names{
    "published",  "pilot-declared", "default",       "weather-service", "pilot-registry",
    "mission-plan", "regulation",   "feature-class", "derived",         "what-if",
};

} // namespace

const char* to_string(Precipitation p) { return precipitation_names[static_cast<std::size_t>(p)]; }

std::optional<Precipitation> parse_precipitation(std::string_view s) {
    for (std::size_t i = 0; i < precipitation_names.size(); ++i)
        if (s == precipitation_names[i]) return static_cast<Precipitation>(i);
    return std::nullopt;
}

const char* to_string(Provenance p) { return provenance_names[static_cast<std::size_t>(p)]; }

std::optional<Provenance> parse_provenance(std::string_view s) {
    for (std::size_t i = 0; i < provenance_names.size(); ++i)
        if (s == provenance_names[i]) return static_cast<Provenance>(i);
    return std::nullopt;
}

std::string format_value(const Value& v) {
    struct {
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(double d) const {
            if (std::isinf(d)) return d > 0 ? "unlimited" : "-unlimited";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", d);
            return buf;
        }
        std::string operator()(Precipitation p) const { return to_string(p); }
        std::string operator()(const std::string& s) const { return s; }
    } visitor;
    return std::visit(visitor, v);
}

} // namespace safesple
