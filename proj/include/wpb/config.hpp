#pragma once

#include "wpb/demand_model.hpp"
#include "wpb/emission_market.hpp"
#include "wpb/provisioning_sim.hpp"
#include "wpb/wastage_penalty.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace wpb {

// In-memory form of a scenario config file. Sections mirror the JSON
// document one to one; see docs/config.md for the full key reference.

struct StatsSection {
    double r_agreed = 0.0;
    /// Derived from the demand section when absent.
    std::optional<double> mean_demand;
    std::optional<double> max_demand;
    /// Estimator used when max_demand is derived.
    std::optional<MaxMethod> max_method;

    bool operator==(const StatsSection&) const = default;
};

struct RatesSection {
    CostRates rates;
    /// c_co2 = "from_market": derived from market price, energy_full and carbon intensity.
    bool c_co2_from_market = false;

    bool operator==(const RatesSection&) const = default;
};

struct SimulationSection {
    std::uint64_t steps = 1;
    std::uint64_t replications = 1;
    std::optional<std::uint64_t> seed;
    double energy_full = 0.0;
    double carbon_intensity = 0.0;
    bool clamp_demand_to_agreed = false;
    std::uint64_t trace_limit = 100000;
    unsigned threads = 1;

    bool operator==(const SimulationSection&) const = default;
};

struct AccountEntry {
    std::string name;
    double cap_kg = 0.0;
    /// nullopt means "from_simulation": taken from a run of the configured scenario.
    std::optional<double> emissions_kg;

    bool operator==(const AccountEntry&) const = default;
};

struct MarketSection {
    double price_per_kg = 0.0;
    std::vector<AccountEntry> accounts;

    bool operator==(const MarketSection&) const = default;
};

struct ConfigDocument {
    std::optional<DemandProfile> demand;
    std::optional<StatsSection> stats;
    std::optional<RatesSection> rates;
    /// One policy, or several for a side-by-side comparison.
    std::vector<Policy> policies;
    bool policy_is_list = false;
    std::optional<SimulationSection> simulation;
    std::optional<MarketSection> market;

    bool operator==(const ConfigDocument&) const = default;
};

/// Strict parse: unknown keys, wrong types and missing required keys raise
/// Error{ConfigError} whose message starts with the offending key path.
ConfigDocument parse_config(const nlohmann::json& doc);
ConfigDocument load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ConfigDocument& doc);

/// Sections that a command needs; ConfigError names the missing one.
void require_sections(const ConfigDocument& doc, std::initializer_list<const char*> sections);

DemandStats resolve_stats(const ConfigDocument& doc);
CostRates resolve_rates(const ConfigDocument& doc);

struct ScenarioOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> steps;
    bool trace = false;
};

/// Scenario for the policy at `policy_index`. Seed precedence: override,
/// then config, otherwise ConfigError.
Scenario build_scenario(const ConfigDocument& doc, const ScenarioOverrides& overrides = {},
                        std::size_t policy_index = 0);

/// Fully explicit document for a scenario (derived values written out),
/// suitable for echoing in reports. Parsing it back and rebuilding yields
/// the same scenario.
ConfigDocument effective_document(const Scenario& scenario, const std::optional<MarketSection>& market = {});

std::string to_string(const MaxMethod& method);

}  // namespace wpb
