#pragma once

#include "wpb/demand_model.hpp"
#include "wpb/wastage_penalty.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wpb {

/// Static rule mapping scenario statistics to a provisioned level.
struct Policy {
    enum class Kind { FixedAgreed, MeanFollow, Balance, BalanceBand, FixedLevel };

    Kind kind = Kind::FixedAgreed;
    /// x_percent for BalanceBand, the level for FixedLevel, unused otherwise.
    double value = 0.0;

    static constexpr Policy fixed_agreed() noexcept { return {Kind::FixedAgreed, 0.0}; }
    static constexpr Policy mean_follow() noexcept { return {Kind::MeanFollow, 0.0}; }
    static constexpr Policy balance() noexcept { return {Kind::Balance, 0.0}; }
    static constexpr Policy balance_band(double x_percent) noexcept { return {Kind::BalanceBand, x_percent}; }
    static constexpr Policy fixed_level(double r) noexcept { return {Kind::FixedLevel, r}; }

    bool operator==(const Policy&) const = default;
};

std::string to_string(const Policy& policy);

struct Scenario {
    DemandProfile profile;
    DemandStats stats;
    CostRates rates;
    Policy policy;
    std::uint64_t steps = 1;
    std::uint64_t replications = 1;
    std::uint64_t seed = 0;
    /// kWh per step when all of r_agreed is provisioned.
    double energy_full = 0.0;
    /// kgCO2e per kWh.
    double carbon_intensity = 0.0;
    /// Truncate sampled demand at r_agreed.
    bool clamp_demand_to_agreed = false;
    bool trace = false;
    /// Upper bound on recorded trace rows across all replications.
    std::uint64_t trace_limit = 100000;
    /// Worker threads for replications; 0 picks the hardware concurrency.
    unsigned threads = 1;

    /// Throws InvalidArgument for counts or physical constants out of range.
    void validate() const;
    bool operator==(const Scenario&) const = default;
};

struct StepRecord {
    std::uint64_t replication = 0;
    std::uint64_t step = 0;
    double demand = 0.0;
    double provisioned = 0.0;
    bool violation = false;
    double wasted = 0.0;
    double wastage_cost = 0.0;
    double penalty_cost = 0.0;
};

struct SimulationReport {
    explicit SimulationReport(Scenario s) : scenario(std::move(s)) {}

    Scenario scenario;
    double provisioned_level = 0.0;
    std::uint64_t total_steps = 0;

    std::uint64_t violation_count = 0;
    double violation_frequency = 0.0;
    double total_wasted_resource = 0.0;
    double total_wastage_cost = 0.0;
    double total_penalty_cost = 0.0;
    /// Realized wastage plus penalties.
    double total_cost = 0.0;
    double mean_step_wastage_cost = 0.0;

    /// Linear-model prediction for the same level and horizon: total_steps *
    /// (max(0, c_wastage) + E(C_penal)).
    double total_expected_model_cost = 0.0;
    /// Linear-model wastage cost per step at the level (may be negative below the mean).
    double model_wastage_cost = 0.0;
    /// 1 - r/max, floored at 0 above max.
    double model_violation_probability = 0.0;
    /// P(R > r) under the demand profile itself.
    double profile_tail_probability = 0.0;

    double total_energy_kwh = 0.0;
    double total_emissions_kg = 0.0;
    /// Provisioned-share attribution of c_en and c_co2 over the run.
    double total_energy_cost = 0.0;
    double total_co2_cost = 0.0;

    std::vector<StepRecord> trace;
    bool trace_truncated = false;
};

/// Level a policy provisions for the scenario. Balance failures surface as PolicyUnresolvable.
double resolve_level(const Policy& policy, const Scenario& scenario);

/// Monte Carlo run. Replication k draws from Rng::for_stream(seed, k); results
/// are reduced in replication order, so the report is identical for every
/// thread count.
SimulationReport run_simulation(const Scenario& scenario);

struct LevelCost {
    double level = 0.0;
    double cost = 0.0;
};

struct OptimumResult {
    double r_star = 0.0;
    double cost_at_r_star = 0.0;
    std::vector<LevelCost> costs;
    /// Present when the balance is solvable for the scenario.
    std::optional<double> r_balance;
    std::optional<double> gap;
};

/// Grid search over FixedLevel policies under a shared seed; ties go to the
/// earliest grid entry.
OptimumResult empirical_optimum(const Scenario& scenario, std::span<const double> grid);

struct PolicyOutcome {
    Policy policy;
    std::optional<SimulationReport> report;
    std::string error;
};

struct PolicyComparison {
    std::vector<PolicyOutcome> outcomes;
    /// Indices into outcomes with a report, ascending total_cost (stable).
    std::vector<std::size_t> ranking;
};

/// Runs each policy on the same seed, hence on identical demand paths.
PolicyComparison compare_policies(const Scenario& base, std::span<const Policy> policies);

}  // namespace wpb
