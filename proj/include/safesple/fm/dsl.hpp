#pragma once

#include "safesple/fm/feature_model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace safesple::fm {

/**
 * Parses the `.fm` feature-model language (grammar in docs/feature-model.ebnf):
 *
 *     model Drone
 *     feature Drone {
 *         mandatory Frame { group xor { Quad {} Hex {} } }
 *         optional Camera {}
 *     }
 *     constraint implies(Hex, Camera)
 *     hazard H1 "Camera overheating" { contributing Camera  nodes G2, E1 }
 *
 * Throws ParseError (with line/column) for input outside the grammar and
 * SemanticError for well-formed input that violates a model invariant.
 */
FeatureModel parse_feature_model(std::string_view source);

FeatureModel load_feature_model(const std::filesystem::path& path);

/// Canonical text form; parse_feature_model(unparse(m)) is structurally equal to m.
std::string unparse(const FeatureModel& model);

} // namespace safesple::fm
