#include "epicon/scenario.hpp"

#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

#include "epicon/errors.hpp"

namespace {

using epicon::ConfigError;
using epicon::Scenario;
using nlohmann::json;

json minimal_scenario_json() {
  return json::parse(R"({
    "schema_version": 1,
    "horizon": 8,
    "action_period": 4,
    "ledger_discount": 0.9,
    "demand": {"uniform_route": 100.0},
    "regions": [
      {"name": "a", "population": 10000, "initial_infected": 10,
       "pandemic_tolerance": 50.0, "lockdown_tolerance": 1.0,
       "rates": {"beta": 0.2, "gamma": 0.05, "theta": 0.1}},
      {"name": "b", "population": 20000,
       "pandemic_tolerance_fraction": 0.003, "lockdown_tolerance": 24.0,
       "rates": {"beta_stay": 0.1, "beta_move": 0.15, "gamma": 0.02,
                 "theta": 0.1}}
    ]
  })");
}

TEST(Scenario, ParsesMinimalDocument) {
  Scenario sc = epicon::scenario_from_json(minimal_scenario_json());
  ASSERT_EQ(sc.n_regions(), 2);
  EXPECT_EQ(sc.horizon, 8);
  EXPECT_EQ(sc.action_period, 4);
  EXPECT_EQ(sc.n_decisions(), 2);
  EXPECT_DOUBLE_EQ(sc.demand(0, 1), 100.0);
  EXPECT_DOUBLE_EQ(sc.demand(0, 0), 0.0);

  EXPECT_EQ(sc.regions[0].name, "a");
  EXPECT_DOUBLE_EQ(sc.regions[0].rates.beta_stay, 0.2);
  EXPECT_DOUBLE_EQ(sc.regions[0].rates.beta_move, 0.2);  // beta covers both
  EXPECT_DOUBLE_EQ(sc.regions[1].rates.beta_move, 0.15);

  // Fractional tolerance resolves against the region's own population.
  EXPECT_DOUBLE_EQ(sc.regions[1].profile.pandemic_tolerance, 60.0);

  auto states = sc.initial_states();
  EXPECT_DOUBLE_EQ(states[0].susceptible, 9990.0);
  EXPECT_DOUBLE_EQ(states[0].infected, 10.0);
  EXPECT_DOUBLE_EQ(states[1].susceptible, 20000.0);

  EXPECT_DOUBLE_EQ(sc.nominal_inbound(0), 100.0);
  auto ledger = sc.make_ledger(1);
  EXPECT_EQ(ledger.penalty, 0.0);
  EXPECT_DOUBLE_EQ(ledger.nominal_demand, 100.0);
  EXPECT_DOUBLE_EQ(ledger.discount, 0.9);
}

TEST(Scenario, RoundTripsThroughJson) {
  Scenario original = epicon::make_outbreak_scenario();
  json encoded = epicon::scenario_to_json(original);
  Scenario decoded = epicon::scenario_from_json(encoded);
  EXPECT_EQ(epicon::scenario_to_json(decoded), encoded);
}

TEST(Scenario, MissingFieldsNameTheCulprit) {
  json j = minimal_scenario_json();
  j["regions"][0].erase("lockdown_tolerance");
  try {
    epicon::scenario_from_json(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lockdown_tolerance"),
              std::string::npos)
        << e.what();
  }

  json no_regions = minimal_scenario_json();
  no_regions.erase("regions");
  EXPECT_THROW(epicon::scenario_from_json(no_regions), ConfigError);
}

TEST(Scenario, RejectsAmbiguousToleranceSpelling) {
  json j = minimal_scenario_json();
  j["regions"][0]["pandemic_tolerance_fraction"] = 0.001;  // now has both
  EXPECT_THROW(epicon::scenario_from_json(j), ConfigError);
  j["regions"][0].erase("pandemic_tolerance");
  j["regions"][0].erase("pandemic_tolerance_fraction");  // now has neither
  EXPECT_THROW(epicon::scenario_from_json(j), ConfigError);
}

TEST(Scenario, RejectsStructuralMistakes) {
  json bad_version = minimal_scenario_json();
  bad_version["schema_version"] = 2;
  EXPECT_THROW(epicon::scenario_from_json(bad_version), ConfigError);

  json ragged_period = minimal_scenario_json();
  ragged_period["horizon"] = 10;  // not divisible by action_period 4
  EXPECT_THROW(epicon::scenario_from_json(ragged_period), ConfigError);

  json bad_discount = minimal_scenario_json();
  bad_discount["ledger_discount"] = 0.0;
  EXPECT_THROW(epicon::scenario_from_json(bad_discount), ConfigError);
  bad_discount["ledger_discount"] = 1.5;
  EXPECT_THROW(epicon::scenario_from_json(bad_discount), ConfigError);

  json bad_rate = minimal_scenario_json();
  bad_rate["regions"][0]["rates"]["gamma"] = -0.1;
  EXPECT_THROW(epicon::scenario_from_json(bad_rate), ConfigError);

  json overfull = minimal_scenario_json();
  overfull["regions"][0]["initial_infected"] = 999999.0;
  EXPECT_THROW(epicon::scenario_from_json(overfull), ConfigError);

  json greedy_routes = minimal_scenario_json();
  greedy_routes["demand"] = {{"uniform_route", 50000.0}};
  EXPECT_THROW(epicon::scenario_from_json(greedy_routes), ConfigError);

  json bad_matrix = minimal_scenario_json();
  bad_matrix["demand"] = {{"matrix", {{0.0, 1.0}}}};  // not 2x2
  EXPECT_THROW(epicon::scenario_from_json(bad_matrix), ConfigError);

  json hot_diagonal = minimal_scenario_json();
  hot_diagonal["demand"] = {{"matrix", {{5.0, 1.0}, {1.0, 0.0}}}};
  EXPECT_THROW(epicon::scenario_from_json(hot_diagonal), ConfigError);
}

TEST(Scenario, ExplicitDemandMatrixParses) {
  json j = minimal_scenario_json();
  j["demand"] = {{"matrix", {{0.0, 40.0}, {70.0, 0.0}}}};
  Scenario sc = epicon::scenario_from_json(j);
  EXPECT_DOUBLE_EQ(sc.demand(0, 1), 40.0);
  EXPECT_DOUBLE_EQ(sc.demand(1, 0), 70.0);
  EXPECT_DOUBLE_EQ(sc.nominal_inbound(0), 70.0);
}

TEST(OutbreakScenario, MatchesItsDocumentedShape) {
  Scenario sc = epicon::make_outbreak_scenario();
  ASSERT_EQ(sc.n_regions(), 5);
  EXPECT_EQ(sc.horizon, 360);
  EXPECT_EQ(sc.action_period, 4);
  EXPECT_EQ(sc.n_decisions(), 90);
  EXPECT_DOUBLE_EQ(sc.ledger_discount, 0.5);

  const auto& source = sc.regions[0];
  EXPECT_EQ(source.name, "source");
  EXPECT_TRUE(source.profile.exempt_pandemic_cost);
  EXPECT_DOUBLE_EQ(source.profile.lockdown_tolerance, 0.05);
  EXPECT_DOUBLE_EQ(source.initial_infected, 2000.0);
  EXPECT_DOUBLE_EQ(source.rates.beta_stay, 0.12);
  EXPECT_GT(source.rates.beta_stay / source.rates.gamma, 1.0);  // outbreak

  for (int i = 1; i < 5; ++i) {
    EXPECT_FALSE(sc.regions[i].profile.exempt_pandemic_cost);
    EXPECT_DOUBLE_EQ(sc.regions[i].population, 1.0e7);
    EXPECT_DOUBLE_EQ(sc.regions[i].rates.beta_stay, 0.021);
    EXPECT_DOUBLE_EQ(sc.regions[i].rates.gamma, 0.03);
    EXPECT_DOUBLE_EQ(sc.regions[i].rates.theta, 0.03);
    // Receivers are subcritical: left alone, their infections die out.
    EXPECT_LT(sc.regions[i].rates.beta_stay / sc.regions[i].rates.gamma, 1.0);
  }
  // 2x2 grid: high/low hospitalization tolerance x high/low lockdown
  // tolerance, in that region order.
  EXPECT_DOUBLE_EQ(sc.regions[1].profile.pandemic_tolerance, 30000.0);
  EXPECT_DOUBLE_EQ(sc.regions[1].profile.lockdown_tolerance, 72.0);
  EXPECT_DOUBLE_EQ(sc.regions[2].profile.pandemic_tolerance, 30000.0);
  EXPECT_DOUBLE_EQ(sc.regions[2].profile.lockdown_tolerance, 24.0);
  EXPECT_DOUBLE_EQ(sc.regions[3].profile.pandemic_tolerance, 10000.0);
  EXPECT_DOUBLE_EQ(sc.regions[3].profile.lockdown_tolerance, 72.0);
  EXPECT_DOUBLE_EQ(sc.regions[4].profile.pandemic_tolerance, 10000.0);
  EXPECT_DOUBLE_EQ(sc.regions[4].profile.lockdown_tolerance, 24.0);

  // Every region sees 4 x 5000 inbound demand per step.
  for (int i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(sc.nominal_inbound(i), 20000.0);
  }

  // The initial outbreak is invisible: 2,000 infections hide in the pool.
  auto states = sc.initial_states();
  auto v = epicon::visible(states[0]);
  EXPECT_DOUBLE_EQ(v.asymptomatic_pool, 1.0e7);
  EXPECT_DOUBLE_EQ(v.hospitalized, 0.0);
}

// The checked-in scenario file must stay in sync with the built-in builder.
TEST(OutbreakScenario, CheckedInFileMatchesBuilder) {
  std::string path = std::string(EPICON_SCENARIO_DIR) + "/outbreak.json";
  Scenario from_file = epicon::load_scenario(path);
  EXPECT_EQ(epicon::scenario_to_json(from_file),
            epicon::scenario_to_json(epicon::make_outbreak_scenario()));
}

TEST(Scenario, LoadReportsMissingAndBrokenFiles) {
  EXPECT_THROW(epicon::load_scenario("/nonexistent/nope.json"), ConfigError);

  std::string path = testing::TempDir() + "/broken_scenario.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(epicon::load_scenario(path), ConfigError);
}

}  // namespace
