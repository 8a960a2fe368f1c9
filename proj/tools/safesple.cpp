// safesple command-line interface.
//
// Exit codes: 0 admit/valid, 1 deny/invalid, 2 unresolved, 3 input error.

#include "safesple/decision/service.hpp"
#include "safesple/error.hpp"
#include "safesple/fm/analysis.hpp"
#include "safesple/fm/dsl.hpp"
#include "safesple/gsn/template.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>

using namespace safesple;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_unresolved = 2;
constexpr int exit_input = 3;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
}

fm::FeatureModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    return fm::load_feature_model(path);
}

evidence::Clock clock_from(const std::string& now) {
    if (now.empty()) return {};
    const auto t = evidence::parse_timestamp(now);
    if (!t) throw Error("--now: expected a timestamp like 2026-06-01T12:00:00Z");
    return [t = *t] { return t; };
}

fm::Configuration parse_fixes(const fm::FeatureModel& m, const std::vector<std::string>& fixes) {
    fm::Configuration c;
    for (const auto& f : fixes) {
        const auto eq = f.find('=');
        const auto name = f.substr(0, eq);
        const auto value = eq == std::string::npos ? std::string("true") : f.substr(eq + 1);
        if (!m.contains(name)) throw Error("--fix: unknown feature " + name);
        if (value == "true" || value == "1") c.selected.insert(name);
        else if (value == "false" || value == "0") c.deselected.insert(name);
        else throw Error("--fix " + f + ": value must be true or false");
    }
    return c;
}

fm::Configuration read_configuration(const std::string& path) {
    const auto j = read_json_file(path);
    const auto& c = j.contains("configuration") ? j.at("configuration") : j;
    fm::Configuration out;
    out.selected = c.value("selected", std::set<std::string>{});
    out.deselected = c.value("deselected", std::set<std::string>{});
    out.partial = c.value("partial", true);
    return out;
}

int print_decision(const decision::PipelineResult& r, bool hypothetical) {
    auto doc = decision::to_json(r.decision);
    if (hypothetical) doc["hypothetical"] = true;
    std::cout << doc.dump(2) << '\n';
    return decision::exit_code(r.decision);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safety-case product line toolchain for small UAS airspace entry"};
    app.require_subcommand(1);

    std::string model_path, config_path, catalog_dir, request_path, policy_path, format = "doc", now;
    std::string fixtures_dir = SAFESPLE_DATA_DIR;
    std::string store_dir;
    std::vector<std::string> fixes, what_if;
    int port = 8080;

    auto* parse = app.add_subcommand("parse", "Parse a feature model and print it in canonical form");
    parse->add_option("model", model_path, "Feature model file")->required();

    auto* count = app.add_subcommand("count", "Count valid variants");
    count->add_option("model", model_path, "Feature model file")->required();
    count->add_option("--fix", fixes, "Fix a feature: name, name=true or name=false");

    auto* check = app.add_subcommand("check-config", "Check a configuration against a feature model");
    check->add_option("model", model_path, "Feature model file")->required();
    check->add_option("config", config_path, "JSON with selected/deselected lists (or a request)")->required();

    auto* validate = app.add_subcommand("validate-templates", "Load and validate a template catalog");
    validate->add_option("catalog", catalog_dir, "Directory of template documents")->required();

    auto* instantiate = app.add_subcommand("instantiate", "Instantiate the safety cases for a request");
    instantiate->add_option("--request", request_path, "Flight request document")->required();
    instantiate->add_option("--fixtures", fixtures_dir, "Data directory")->capture_default_str();
    instantiate->add_option("--policy", policy_path, "Airspace policy file (default <fixtures>/fixtures/policy.json)");
    instantiate->add_option("--what-if", what_if, "Override, e.g. gusts=3 or vehicleModel=\"DJI Mini 4 Pro\"");
    instantiate->add_option("--format", format, "doc or graph")->check(CLI::IsMember({"doc", "graph"}));
    instantiate->add_option("--now", now, "Decision time (default: system clock)");

    auto* decide = app.add_subcommand("decide", "Decide an entry request");
    decide->add_option("--request", request_path, "Flight request document")->required();
    decide->add_option("--policy", policy_path, "Airspace policy file")->required();
    decide->add_option("--fixtures", fixtures_dir, "Data directory")->capture_default_str();
    decide->add_option("--what-if", what_if, "Override, e.g. gusts=3");
    decide->add_option("--now", now, "Decision time (default: system clock)");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--port", port, "Port")->capture_default_str();
    serve->add_option("--fixtures", fixtures_dir, "Data directory")->capture_default_str();
    serve->add_option("--policy", policy_path, "Airspace policy file")->required();
    serve->add_option("--store", store_dir, "Directory for stored requests (default: in memory)");
    serve->add_option("--now", now, "Fixed decision time (default: system clock)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (*parse) {
            try {
                const auto m = read_model(model_path);
                std::cout << fm::unparse(m);
                std::cerr << m.features().size() << " features, " << m.constraints().size() << " constraints, "
                          << m.hazards().size() << " hazards\n";
                return exit_ok;
            } catch (const ParseError& e) {
                std::cerr << model_path << ":" << e.what() << '\n';
                return exit_invalid;
            } catch (const SemanticError& e) {
                std::cerr << model_path << ": " << e.what() << '\n';
                return exit_invalid;
            }
        }
        if (*count) {
            const auto m = read_model(model_path);
            const auto fixed = parse_fixes(m, fixes);
            const auto n = fixes.empty() ? fm::count_variants(m) : fm::slice_count(m, fixed);
            std::cout << n.str() << '\n';
            return exit_ok;
        }
        if (*check) {
            const auto m = read_model(model_path);
            const auto report = fm::check_configuration(m, read_configuration(config_path));
            json out{{"verdict", fm::to_string(report.verdict)},
                     {"violations", report.violations},
                     {"undecided", report.undecided}};
            std::cout << out.dump(2) << '\n';
            switch (report.verdict) {
            case fm::Verdict::valid: return exit_ok;
            case fm::Verdict::invalid: return exit_invalid;
            case fm::Verdict::incomplete_but_extensible: return exit_unresolved;
            }
        }
        if (*validate) {
            if (!std::filesystem::is_directory(catalog_dir)) throw Error(catalog_dir + " is not a directory");
            try {
                const auto catalog = gsn::load_catalog(catalog_dir);
                int findings = 0;
                for (const auto& t : catalog.templates()) {
                    const auto list = gsn::validate_template(t);
                    std::cout << t.id() << " " << t.version() << ": " << t.nodes().size() << " nodes, "
                              << list.size() << " findings\n";
                    for (const auto& f : list)
                        std::cout << "  " << gsn::to_string(f.kind) << " " << f.node_id << ": " << f.message << '\n';
                    findings += static_cast<int>(list.size());
                }
                return findings == 0 ? exit_ok : exit_invalid;
            } catch (const StructureError& e) {
                std::cerr << e.what() << '\n';
                return exit_invalid;
            } catch (const ParseError& e) {
                std::cerr << e.what() << '\n';
                return exit_invalid;
            }
        }
        if (*instantiate || *decide) {
            if (policy_path.empty()) policy_path = (std::filesystem::path(fixtures_dir) / "fixtures" / "policy.json").string();
            const auto env = decision::load_environment(fixtures_dir, policy_path, clock_from(now));
            const auto request = evidence::request_from_json(read_json_file(request_path));
            const auto overrides = decision::what_if_from_assignments(what_if);
            const auto result = decision::evaluate(env, request, overrides);
            if (*decide) return print_decision(result, !overrides.empty());
            if (format == "graph") {
                for (const auto& i : result.instances) std::cout << instantiation::to_dot(i);
            } else {
                auto doc = decision::case_document(result);
                doc["decision"] = decision::to_json(result.decision);
                if (!overrides.empty()) {
                    doc["hypothetical"] = true;
                    doc["overrides"] = decision::to_json(overrides);
                }
                std::cout << doc.dump(2) << '\n';
            }
            return decision::exit_code(result.decision);
        }
        if (*serve) {
            std::shared_ptr<decision::RequestStore> store;
            if (store_dir.empty()) store = std::make_shared<decision::MemoryStore>();
            else store = std::make_shared<decision::DirectoryStore>(store_dir);
            decision::DecisionService service(decision::load_environment(fixtures_dir, policy_path, clock_from(now)),
                                              store);
            httplib::Server server;
            decision::register_routes(server, service);
            static httplib::Server* running = &server;
            std::signal(SIGINT, [](int) { running->stop(); });
            std::signal(SIGTERM, [](int) { running->stop(); });
            std::cerr << "listening on port " << port << '\n';
            if (!server.listen("0.0.0.0", port)) throw Error("cannot listen on port " + std::to_string(port));
            return exit_ok;
        }
    } catch (const InvalidConfigurationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_input;
    }
    return exit_input;
}
