#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace safesple {

// Root of every error raised by the toolchain. Data states (unknown vehicle,
// missing weather) are never reported through exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// logic
class OverflowError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };

// feature model
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), message_(message) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

class SemanticError : public Error { using Error::Error; };
class InvalidSelectionError : public Error { using Error::Error; };

// templates
class StructureError : public Error { using Error::Error; };
class MappingError : public Error { using Error::Error; };
class ConflictError : public Error { using Error::Error; };

// evidence
class ProviderError : public Error { using Error::Error; };

// instantiation
class BindingTypeError : public Error { using Error::Error; };
class CatalogError : public Error { using Error::Error; };
class ExplainError : public Error { using Error::Error; };

// decision service
class PolicyError : public Error { using Error::Error; };
class NotFoundError : public Error { using Error::Error; };

/// A payload failed schema validation. Each entry of fields() is
/// "path: problem", e.g. "mission.plannedDuration: must be > 0".
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> fields)
        : Error(join(fields)), fields_(std::move(fields)) {}

    const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    static std::string join(const std::vector<std::string>& fields) {
        std::string out = "validation failed";
        for (const auto& f : fields) out += "; " + f;
        return out;
    }
    std::vector<std::string> fields_;
};

class InvalidConfigurationError : public Error {
public:
    explicit InvalidConfigurationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration";
        for (const auto& s : v) out += "; violates " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

} // namespace safesple
