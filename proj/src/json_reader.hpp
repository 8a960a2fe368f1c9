#pragma once

#include "safesple/error.hpp"
#include "safesple/evidence/evidence.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace safesple::detail {

using nlohmann::json;
using evidence::Timestamp;
using evidence::parse_timestamp;

// Collects "path: problem" entries while reading a document.
class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void fail(const std::string& path, const std::string& problem) { errors_.push_back(path + ": " + problem); }

    const json* get(const json& j, const std::string& path, const char* key, bool required) {
        if (j.is_object() && j.contains(key)) return &j.at(key);
        if (required) fail(join(path, key), "required");
        return nullptr;
    }

    std::optional<std::string> string(const json& j, const std::string& path, const char* key, bool required) {
        const auto* v = get(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_string() || v->get_ref<const std::string&>().empty()) {
            fail(join(path, key), "must be a non-empty string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<double> number(const json& j, const std::string& path, const char* key, bool required,
                                 std::optional<double> min = std::nullopt, bool strict = false) {
        const auto* v = get(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(join(path, key), "must be a number");
            return std::nullopt;
        }
        const double x = v->get<double>();
        if (min && (strict ? x <= *min : x < *min)) {
            fail(join(path, key), std::string("must be ") + (strict ? "> " : ">= ") + format_value(*min));
            return std::nullopt;
        }
        return x;
    }

    std::optional<bool> boolean(const json& j, const std::string& path, const char* key, bool required) {
        const auto* v = get(j, path, key, required);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            fail(join(path, key), "must be a boolean");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<Timestamp> timestamp(const json& j, const std::string& path, const char* key, bool required) {
        const auto* v = get(j, path, key, required);
        if (!v) return std::nullopt;
        std::optional<Timestamp> t;
        if (v->is_string()) t = parse_timestamp(v->get_ref<const std::string&>());
        if (!t) fail(join(path, key), "must be a timestamp like 2026-06-01T15:00:00Z");
        return t;
    }

    std::optional<Precipitation> precipitation(const json& j, const std::string& path, const char* key, bool required) {
        const auto* v = get(j, path, key, required);
        if (!v) return std::nullopt;
        std::optional<Precipitation> p;
        if (v->is_string()) p = parse_precipitation(v->get_ref<const std::string&>());
        if (!p) fail(join(path, key), "must be one of none, light, moderate, heavy");
        return p;
    }

    std::vector<std::string> strings(const json& j, const std::string& path, const char* key) {
        std::vector<std::string> out;
        const auto* v = get(j, path, key, false);
        if (!v) return out;
        if (!v->is_array()) {
            fail(join(path, key), "must be a list of strings");
            return out;
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            if ((*v)[i].is_string()) out.push_back((*v)[i].get<std::string>());
            else fail(join(path, key) + "[" + std::to_string(i) + "]", "must be a string");
        }
        return out;
    }

    static std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

private:
    std::vector<std::string>& errors_;
};

inline void throw_if(const std::vector<std::string>& errors) {
    if (!errors.empty()) throw ValidationError(errors);
}

inline json read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError({path.filename().string() + ": not a JSON document (" + e.what() + ")"});
    }
}

} // namespace safesple::detail
