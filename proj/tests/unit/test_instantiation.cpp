#include "doctest.h"

#include "safesple/error.hpp"
#include "safesple/fm/dsl.hpp"
#include "safesple/instantiation/instance.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

using namespace safesple;
using namespace safesple::instantiation;
using namespace safesple::evidence;
using nlohmann::json;

namespace {

const std::filesystem::path data_dir(SAFESPLE_DATA_DIR);
const Timestamp t0 = *parse_timestamp("2026-06-01T12:00:00Z");

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

struct World {
    gsn::Catalog catalog = gsn::load_catalog(data_dir / "templates");
    fm::FeatureModel model = fm::load_feature_model(data_dir / "fixtures" / "feature_model.fm");
    VehicleRegistry vehicles = load_vehicle_registry(data_dir / "vehicles");
    FixtureWeatherProvider weather = FixtureWeatherProvider::load(data_dir / "fixtures" / "weather.json");
    PilotRegistry pilots = load_pilot_registry(data_dir / "fixtures" / "pilots.json");

    const gsn::SafetyCaseTemplate& wind() const { return *catalog.find(gsn::wind_template_id); }
    const gsn::SafetyCaseTemplate& pilot() const { return *catalog.find(gsn::pilot_template_id); }

    gsn::BindingSchema schema(const gsn::SafetyCaseTemplate& t) const {
        const auto doc = read_json(data_dir / "fixtures" / "feature_map.json");
        return gsn::map_features_to_parameters(model, t, gsn::feature_mapping_from_json(doc.at(t.id()), t));
    }

    FlightRequest request(const std::string& name) const {
        return request_from_json(read_json(data_dir / "fixtures" / "requests" / (name + ".json")));
    }

    EvidenceBundle bundle(const FlightRequest& r) const {
        return assemble_bundle(r, vehicles, weather, pilots, RegulationProfile{}, [] { return t0; });
    }

    SafetyCaseInstance run(const gsn::SafetyCaseTemplate& t, const std::string& request_name) const {
        return instantiate(t, schema(t), bundle(request(request_name)));
    }
};

const World& world() {
    static const World w;
    return w;
}

std::map<std::string, Status> solution_statuses(const SafetyCaseInstance& inst, const gsn::SafetyCaseTemplate& t) {
    std::map<std::string, Status> out;
    for (const auto& id : t.solutions()) out[id] = inst.node_statuses.at(id);
    return out;
}

void check_trace_totality(const SafetyCaseInstance& inst, const gsn::SafetyCaseTemplate& t) {
    CHECK(inst.trace_links.size() == inst.nodes.size());
    CHECK(inst.nodes.size() == t.nodes().size());
    for (const auto& n : inst.nodes) {
        REQUIRE(inst.trace_links.count(n.id) == 1);
        CHECK(inst.trace_links.at(n.id) == n.template_node_id);
        CHECK(t.contains(n.template_node_id));
    }
}

} // namespace

TEST_CASE("status algebra") {
    using S = Status;
    CHECK(combine({}) == S::unresolved);
    CHECK(combine({S::satisfied, S::satisfied}) == S::satisfied);
    CHECK(combine({S::satisfied, S::unresolved}) == S::unresolved);
    CHECK(combine({S::unresolved, S::violated}) == S::violated);
    for (auto s : {S::satisfied, S::violated, S::unresolved}) CHECK(parse_status(to_string(s)) == s);
    CHECK_FALSE(parse_status("maybe"));
}

TEST_CASE("instance 1: every wind-case node satisfied") {
    const auto& w = world();
    const auto inst = w.run(w.wind(), "instance-1");
    for (const auto& [id, s] : solution_statuses(inst, w.wind())) CHECK_MESSAGE(s == Status::satisfied, id);
    CHECK(inst.top_goal_status == Status::satisfied);
    CHECK(inst.unresolved.empty());
    CHECK(inst.bindings.at("Gusts") == Binding{6.0, Provenance::weather_service});
    CHECK(inst.node("E6").evaluation->description == "2 x [MissionDuration] <= [AvailableFlightTime]");
    CHECK_THROWS_AS(explain_denial(inst, w.wind()), ExplainError);
    check_trace_totality(inst, w.wind());

    const auto pilot = w.run(w.pilot(), "instance-1");
    CHECK(pilot.top_goal_status == Status::violated);
    CHECK(pilot.node_statuses.at("E1") == Status::violated);
    CHECK(pilot.node_statuses.at("E2") == Status::violated);
    CHECK(pilot.node("G1").text == "Pilot P-NOVICE can be trusted to fly safely in controlled zone A1");
}

TEST_CASE("instance 2: exactly E4 violated") {
    const auto& w = world();
    const auto inst = w.run(w.wind(), "instance-2");
    const auto statuses = solution_statuses(inst, w.wind());
    for (const auto& [id, s] : statuses) CHECK_MESSAGE(s == (id == "E4" ? Status::violated : Status::satisfied), id);
    CHECK(inst.top_goal_status == Status::violated);
    CHECK(inst.node_statuses.at("G-wind") == Status::violated);
    CHECK(inst.node_statuses.at("G-battery") == Status::satisfied);
    CHECK(inst.node("E4").text == "Forecast gusts 8 m/s do not exceed 3 m/s");
    CHECK(inst.node("C2").text ==
          "Forecast weather: surface wind 5 m/s, gusts 8 m/s, temperature 35 C, visibility 3 km, precipitation none");

    const auto ex = explain_denial(inst, w.wind());
    REQUIRE(ex.entries.size() == 1);
    const auto& e = ex.entries[0];
    CHECK(e.template_node_id == "E4");
    CHECK(e.status == Status::violated);
    CHECK(e.instance_node_id == inst.instance_id + ":E4");
    CHECK(e.chain == std::vector<std::string>{"E4", "G-wind", "S1", "G1"});
    CHECK(e.condition == "[Gusts] 8 m/s (weather-service) <= [MaxAllowedWindSpd] 3 m/s (default)");
    REQUIRE(e.operands.size() == 2);
    CHECK(e.operands[1].provenance == Provenance::default_rule);
    CHECK(std::get<double>(*e.operands[0].value) == 8);
    check_trace_totality(inst, w.wind());

    const auto doc = to_json(ex);
    CHECK(doc["entries"][0]["operands"][1]["provenance"] == "default");
}

TEST_CASE("beyond the forecast horizon: partial instance") {
    const auto& w = world();
    const auto inst = w.run(w.wind(), "beyond-horizon");
    for (const char* id : {"E1", "E2", "E3", "E4"}) CHECK_MESSAGE(inst.node_statuses.at(id) == Status::unresolved, id);
    CHECK(inst.node_statuses.at("E5") == Status::satisfied);
    CHECK(inst.node_statuses.at("E6") == Status::satisfied);
    CHECK(inst.top_goal_status == Status::unresolved);
    CHECK(inst.node_statuses.at("C2") == Status::unresolved);
    CHECK(inst.node("C2").text.find("[Gusts:?]") != std::string::npos);
    CHECK(inst.node_statuses.at("C3") == Status::satisfied);

    const auto ex = explain_denial(inst, w.wind());
    CHECK(ex.entries.size() == 4);
    for (const auto& e : ex.entries) CHECK(e.status == Status::unresolved);
    CHECK(ex.entries[3].condition == "[Gusts] ? (unresolved) <= [MaxAllowedWindSpd] 10 m/s (published)");
    check_trace_totality(inst, w.wind());
}

TEST_CASE("an empty bundle leaves every leaf unresolved") {
    const auto& w = world();
    EvidenceBundle empty;
    const auto inst = instantiate(w.wind(), gsn::BindingSchema{}, empty);
    CHECK(inst.unresolved.size() == w.wind().parameters().size());
    CHECK(inst.top_goal_status == Status::unresolved);
    const auto ex = explain_denial(inst, w.wind());
    CHECK(ex.entries.size() == 6);
    check_trace_totality(inst, w.wind());
}

TEST_CASE("determinism and content-derived ids") {
    const auto& w = world();
    const auto a = w.run(w.wind(), "instance-2");
    const auto b = w.run(w.wind(), "instance-2");
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(to_dot(a) == to_dot(b));
    CHECK(a.instance_id.size() == 16);

    auto bundle = w.bundle(w.request("instance-2"));
    bundle.bindings.at("Gusts").value = 7.0;
    CHECK(instantiate(w.wind(), w.schema(w.wind()), bundle).instance_id != a.instance_id);
    bundle.bindings.at("Gusts").value = 8.0;
    bundle.assembled_at += std::chrono::hours(1);
    CHECK(instantiate(w.wind(), w.schema(w.wind()), bundle).instance_id == a.instance_id);
}

TEST_CASE("instance documents") {
    const auto& w = world();
    const auto inst = w.run(w.wind(), "instance-2");
    const auto j = to_json(inst);
    CHECK(j["topGoalStatus"] == "violated");
    CHECK(j["nodes"].size() == w.wind().nodes().size());
    CHECK(j["edges"].size() == w.wind().supported_by().size() + w.wind().in_context_of().size());
    CHECK(j["bindings"]["MaxAllowedWindSpd"]["provenance"] == "default");
    CHECK(j["bindings"]["Visibility"]["value"] == 3.0);
    CHECK(j["generatedAt"] == "2026-06-01T12:00:00Z");
    CHECK(j["traceLinks"].size() == j["nodes"].size());

    const auto one = to_json(w.run(w.wind(), "instance-1"));
    CHECK(one["bindings"]["Visibility"]["value"] == "unlimited");

    const auto dot = to_dot(inst);
    const auto lines = std::count(dot.begin(), dot.end(), '\n');
    CHECK(lines == static_cast<long>(2 + inst.nodes.size() + inst.edges.size()));
    CHECK(dot.find("\"" + inst.instance_id + ":E4\" [kind=solution, status=violated, trace=\"E4\"") != std::string::npos);
}

TEST_CASE("select_templates") {
    const auto& w = world();
    const std::vector<std::string> both{"pilot-case", "wind-case"};
    CHECK(select_templates(w.catalog) == both);
    CHECK(select_templates(w.catalog, Status::violated) == both);
    CHECK(select_templates(w.catalog, Status::unresolved) == both);
    CHECK(select_templates(w.catalog, Status::satisfied) == std::vector<std::string>{"pilot-case"});
    CHECK_THROWS_AS(select_templates(gsn::Catalog{}), CatalogError);
    CHECK_THROWS_AS(select_templates(gsn::Catalog({w.wind()})), CatalogError);
}

TEST_CASE("required_evidence") {
    const auto& w = world();
    const auto none = required_evidence(w.wind());
    REQUIRE(none.size() == 6);
    for (const auto& r : none) CHECK(r.unresolved);
    CHECK(none[3].solution_id == "E4");
    CHECK(none[3].parameters == std::vector<std::string>{"Gusts", "MaxAllowedWindSpd"});

    const auto bundle = w.bundle(w.request("instance-1"));
    for (const auto& r : required_evidence(w.wind(), &bundle)) CHECK_FALSE(r.unresolved);

    const auto pilot = required_evidence(w.pilot());
    REQUIRE(pilot.size() == 2);
    CHECK(pilot[0].check_id == "pilot-certified");
    CHECK(pilot[1].check_id == "pilot-flight-hours");

    const auto far = w.bundle(w.request("beyond-horizon"));
    const auto items = required_evidence(w.wind(), &far);
    CHECK(std::count_if(items.begin(), items.end(), [](const auto& r) { return r.unresolved; }) == 4);
    CHECK(to_json(items[0])["missing"] == json{"Precipitation"});
}

TEST_CASE("feature-class bindings") {
    const auto& w = world();
    auto r = w.request("instance-2");
    r.configuration.selected.insert("HighWindRated");
    const auto inst = instantiate(w.wind(), w.schema(w.wind()), w.bundle(r));
    CHECK(inst.bindings.at("MaxAllowedWindSpd") == Binding{8.0, Provenance::feature_class});
    CHECK(inst.node_statuses.at("E4") == Status::satisfied);

    auto dji = w.request("instance-1");
    dji.configuration.selected.insert("HighWindRated");
    const auto published = instantiate(w.wind(), w.schema(w.wind()), w.bundle(dji));
    CHECK(published.bindings.at("MaxAllowedWindSpd") == Binding{10.0, Provenance::published});
}

TEST_CASE("instantiate errors") {
    const auto& w = world();
    auto bundle = w.bundle(w.request("instance-1"));
    bundle.bindings.at("Gusts") = Binding{std::string("windy"), Provenance::weather_service};
    CHECK_THROWS_AS(instantiate(w.wind(), gsn::BindingSchema{}, bundle), BindingTypeError);
    CHECK_THROWS_AS(instantiate(w.pilot(), w.schema(w.wind()), w.bundle(w.request("instance-1"))),
                    std::invalid_argument);
    CHECK_THROWS_AS(explain_denial(w.run(w.wind(), "instance-2"), w.pilot()), ExplainError);
}

TEST_CASE("evaluate_check comparators") {
    std::map<std::string, Binding> b{{"A", {2.0, Provenance::published}},
                                     {"B", {3.0, Provenance::published}},
                                     {"P", {Precipitation::moderate, Provenance::weather_service}},
                                     {"Q", {Precipitation::light, Provenance::published}},
                                     {"T", {true, Provenance::pilot_registry}}};
    auto param = [](const char* n) { return gsn::Operand{std::string(n), std::nullopt}; };
    auto constant = [](Value v) { return gsn::Operand{std::nullopt, v}; };
    using C = gsn::Comparator;
    auto eval = [&](C c, std::string left, std::optional<gsn::Operand> right, std::optional<gsn::Operand> upper = {},
                    std::optional<double> margin = {}) {
        return evaluate_check(gsn::EvidenceCheck{"x", c, left, right, upper, margin}, b).status;
    };
    CHECK(eval(C::less_or_equal, "A", param("B")) == Status::satisfied);
    CHECK(eval(C::less_or_equal, "A", param("B"), {}, 2.0) == Status::violated);
    CHECK(eval(C::less_or_equal, "A", param("B"), {}, 1.5) == Status::satisfied);
    CHECK(eval(C::greater_or_equal, "A", constant(2.0)) == Status::satisfied);
    CHECK(eval(C::within_closed_interval, "A", constant(2.0), param("B")) == Status::satisfied);
    CHECK(eval(C::within_closed_interval, "B", constant(0.0), param("A")) == Status::violated);
    CHECK(eval(C::level_at_most, "Q", param("P")) == Status::satisfied);
    CHECK(eval(C::level_at_most, "P", param("Q")) == Status::violated);
    CHECK(eval(C::equals, "A", constant(2.0)) == Status::satisfied);
    CHECK(eval(C::boolean_true, "T", std::nullopt) == Status::satisfied);
    CHECK(eval(C::less_or_equal, "A", param("Missing")) == Status::unresolved);
    CHECK(eval(C::within_closed_interval, "A", param("Missing"), param("B")) == Status::unresolved);
    CHECK_THROWS_AS(eval(C::boolean_true, "A", std::nullopt), BindingTypeError);
    CHECK_THROWS_AS(eval(C::level_at_most, "A", param("P")), BindingTypeError);
    CHECK_THROWS_AS(eval(C::equals, "A", param("T")), BindingTypeError);

    b["V"] = {HUGE_VAL, Provenance::weather_service};
    CHECK(eval(C::greater_or_equal, "V", constant(3.0)) == Status::satisfied);
}

namespace {

// Random rooted DAG of goals, strategies and solutions; each solution checks
// one certification parameter that may be true, false or unbound.
struct RandomCase {
    json doc;
    std::map<std::string, Binding> bindings;
    std::map<std::string, std::vector<std::string>> children;
    std::map<std::string, std::string> kind;
    std::map<std::string, std::optional<bool>> leaf_value;
};

RandomCase random_case(std::mt19937& rng, int n) {
    RandomCase rc;
    std::vector<std::string> ids;
    json nodes = json::array(), checks = json::array(), params = json::array(), supported = json::array();
    for (int i = 0; i < n; ++i) {
        const std::string id = "N" + std::to_string(i);
        std::string k = "goal";
        if (i > 0) {
            const int r = std::uniform_int_distribution<int>(0, 2)(rng);
            k = r == 0 ? "goal" : r == 1 ? "strategy" : "solution";
        }
        // at least one eligible parent among earlier nodes
        std::vector<std::string> eligible;
        for (const auto& p : ids)
            if (rc.kind[p] == "goal" || (rc.kind[p] == "strategy" && k != "strategy")) eligible.push_back(p);
        if (i > 0) {
            std::shuffle(eligible.begin(), eligible.end(), rng);
            const int parents = std::uniform_int_distribution<int>(1, std::min<int>(2, eligible.size()))(rng);
            for (int p = 0; p < parents; ++p) {
                supported.push_back({eligible[p], id});
                rc.children[eligible[p]].push_back(id);
            }
        }
        ids.push_back(id);
        rc.kind[id] = k;
        nodes.push_back({{"id", id}, {"kind", k}, {"text", "node " + id}});
        if (k == "solution") {
            const std::string param = "P" + std::to_string(i);
            params.push_back({{"name", param}, {"type", "certification"}, {"source", "pilot"}});
            checks.push_back({{"checkId", "c" + std::to_string(i)},
                              {"solution", id},
                              {"comparator", "booleanTrue"},
                              {"left", param}});
            const int v = std::uniform_int_distribution<int>(0, 2)(rng);
            if (v < 2) {
                rc.bindings[param] = Binding{v == 1, Provenance::pilot_registry};
                rc.leaf_value[id] = v == 1;
            } else {
                rc.leaf_value[id] = std::nullopt;
            }
        }
    }
    rc.doc = {{"templateId", "random"},      {"version", "1"},       {"rootGoal", "N0"},      {"parameters", params},
              {"nodes", nodes},      {"supportedBy", supported}, {"inContextOf", json::array()}, {"checks", checks}};
    return rc;
}

// Brute force: enumerate every completion of the unbound leaves; a node is
// satisfied/violated when it has that value under all completions, where a
// goal or strategy holds iff all its children hold. Nodes without children
// and solutions lacking values are unknown.
Status oracle(const RandomCase& rc, const std::string& id) {
    std::vector<std::string> open;
    for (const auto& [leaf, v] : rc.leaf_value)
        if (!v) open.push_back(leaf);
    bool seen_true = false, seen_false = false;
    bool indeterminate = false;
    for (unsigned mask = 0; mask < (1u << open.size()); ++mask) {
        std::map<std::string, bool> value;
        for (const auto& [leaf, v] : rc.leaf_value) value[leaf] = v.value_or(false);
        for (std::size_t i = 0; i < open.size(); ++i) value[open[i]] = (mask >> i) & 1u;
        // childless goals/strategies are undecidable: they never hold and never fail
        std::function<std::optional<bool>(const std::string&)> eval = [&](const std::string& n) -> std::optional<bool> {
            if (rc.kind.at(n) == "solution") return value.at(n);
            auto it = rc.children.find(n);
            if (it == rc.children.end() || it->second.empty()) return std::nullopt;
            bool all = true;
            for (const auto& c : it->second) {
                const auto v = eval(c);
                if (v == false) return false;
                if (!v) all = false;
            }
            if (all) return true;
            return std::nullopt;
        };
        const auto v = eval(id);
        if (!v) indeterminate = true;
        else if (*v) seen_true = true;
        else seen_false = true;
    }
    if (seen_false && !seen_true && !indeterminate) return Status::violated;
    if (seen_true && !seen_false && !indeterminate) return Status::satisfied;
    return Status::unresolved;
}

} // namespace

TEST_CASE("status propagation matches a brute-force evaluator on random DAGs") {
    std::mt19937 rng(20260601);
    int compared = 0;
    for (int round = 0; round < 300; ++round) {
        const auto rc = random_case(rng, 10);
        const auto t = gsn::template_from_json(rc.doc);
        EvidenceBundle bundle;
        bundle.bindings = rc.bindings;
        const auto inst = instantiate(t, gsn::BindingSchema{}, bundle);
        for (const auto& [id, k] : rc.kind) {
            INFO(rc.doc.dump());
            INFO(id);
            CHECK(inst.node_statuses.at(id) == oracle(rc, id));
            ++compared;
        }
        check_trace_totality(inst, t);
    }
    CHECK(compared == 3000);
}

TEST_CASE("adding evidence never flips satisfied and violated") {
    const auto& w = world();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> wind(0, 20), temp(-20, 50), vis(0, 10), dur(1, 40), charge(0.5, 1);
    const auto base = w.bundle(w.request("instance-2"));
    for (int round = 0; round < 100; ++round) {
        auto full = base;
        const double surface = wind(rng);
        full.bindings["SurfaceWind"] = {surface, Provenance::weather_service};
        full.bindings["Gusts"] = {surface + wind(rng) / 4, Provenance::weather_service};
        full.bindings["Temperature"] = {temp(rng), Provenance::weather_service};
        full.bindings["Visibility"] = {vis(rng), Provenance::weather_service};
        full.bindings["Precipitation"] = {static_cast<Precipitation>(rng() % 4), Provenance::weather_service};
        full.bindings["MissionDuration"] = {dur(rng), Provenance::mission_plan};
        full.bindings["ChargeFraction"] = {charge(rng), Provenance::pilot_declared};
        full.bindings["MaxAllowedWindSpd"] = {wind(rng), Provenance::published};

        auto partial = full;
        for (auto it = partial.bindings.begin(); it != partial.bindings.end();)
            if (rng() % 3 == 0) {
                partial.unresolved.insert(it->first);
                it = partial.bindings.erase(it);
            } else {
                ++it;
            }
        const auto before = instantiate(w.wind(), gsn::BindingSchema{}, partial);
        const auto after = instantiate(w.wind(), gsn::BindingSchema{}, full);
        for (const auto& [id, s] : before.node_statuses)
            if (s != Status::unresolved) CHECK_MESSAGE(after.node_statuses.at(id) == s, id);
    }
}
