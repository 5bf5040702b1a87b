#include "wpb/provisioning_sim.hpp"

#include "wpb/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

namespace wpb {

namespace {

struct ReplicationTotals {
    std::uint64_t violations = 0;
    double wasted = 0.0;
    double wastage_cost = 0.0;
    double penalty_cost = 0.0;
    double provisioned_share = 0.0;  // sum of r_t / r_agreed
    std::vector<StepRecord> trace;
};

ReplicationTotals run_replication(const Scenario& sc, double level, std::uint64_t index,
                                  std::uint64_t trace_rows) {
    ReplicationTotals out;
    auto rng = Rng::for_stream(sc.seed, index);
    const double agreed = sc.stats.r_agreed();
    const double price = sc.rates.provisioning_price();
    out.trace.reserve(trace_rows);

    for (std::uint64_t t = 0; t < sc.steps; ++t) {
        double demand = sample(sc.profile, rng);
        if (sc.clamp_demand_to_agreed) demand = std::min(demand, agreed);

        const bool violated = demand > level;
        const double wasted = std::max(0.0, level - demand);
        const double step_wastage = wasted / agreed * price;
        const double step_penalty = violated ? sc.rates.c_viol : 0.0;

        out.violations += violated ? 1 : 0;
        out.wasted += wasted;
        out.wastage_cost += step_wastage;
        out.penalty_cost += step_penalty;
        out.provisioned_share += level / agreed;

        if (t < trace_rows) {
            out.trace.push_back({index, t, demand, level, violated, wasted, step_wastage, step_penalty});
        }
    }
    return out;
}

unsigned worker_count(unsigned requested, std::uint64_t replications) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::uint64_t>(n, replications));
}

}  // namespace

std::string to_string(const Policy& policy) {
    char buf[64];
    switch (policy.kind) {
        case Policy::Kind::FixedAgreed: return "fixed_agreed";
        case Policy::Kind::MeanFollow: return "mean_follow";
        case Policy::Kind::Balance: return "balance";
        case Policy::Kind::BalanceBand:
            std::snprintf(buf, sizeof buf, "balance_band(%.12g)", policy.value);
            return buf;
        case Policy::Kind::FixedLevel:
            std::snprintf(buf, sizeof buf, "fixed_level(%.12g)", policy.value);
            return buf;
    }
    return "unknown";
}

void Scenario::validate() const {
    if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
    if (replications < 1) throw Error(ErrorCode::InvalidArgument, "replications must be >= 1");
    if (!std::isfinite(energy_full) || energy_full < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "energy_full must be finite and >= 0");
    }
    if (!std::isfinite(carbon_intensity) || carbon_intensity < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "carbon_intensity must be finite and >= 0");
    }
    rates.validate();
}

double resolve_level(const Policy& policy, const Scenario& scenario) {
    const auto& stats = scenario.stats;
    auto solve = [&] {
        try {
            return balance(stats, scenario.rates);
        } catch (const Error& e) {
            throw Error(ErrorCode::PolicyUnresolvable, std::string("balance unavailable: ") + e.what());
        }
    };

    switch (policy.kind) {
        case Policy::Kind::FixedAgreed:
            return stats.r_agreed();
        case Policy::Kind::MeanFollow:
            return stats.mean_demand();
        case Policy::Kind::Balance:
            return solve().r_provisioned;
        case Policy::Kind::BalanceBand: {
            const auto b = solve();
            const auto band = heuristic_band(b, policy.value, stats);
            const double r = b.r_provisioned;
            // Nearest edge; clipping at r_agreed can make the upper one closer.
            return (r - band.lower) <= (band.upper - r) ? band.lower : band.upper;
        }
        case Policy::Kind::FixedLevel:
            if (!(policy.value >= 0.0 && policy.value <= stats.r_agreed())) {
                throw Error(ErrorCode::InvalidArgument, "fixed level must lie in [0, r_agreed]");
            }
            return policy.value;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown policy kind");
}

SimulationReport run_simulation(const Scenario& scenario) {
    scenario.validate();
    const double level = resolve_level(scenario.policy, scenario);

    const std::uint64_t reps = scenario.replications;
    std::vector<ReplicationTotals> per_rep(reps);
    auto trace_rows_for = [&](std::uint64_t k) -> std::uint64_t {
        if (!scenario.trace) return 0;
        const std::uint64_t before = k * scenario.steps;  // rows claimed by earlier replications
        if (k != 0 && before / k != scenario.steps) return 0;  // overflow
        return before >= scenario.trace_limit ? 0 : std::min(scenario.steps, scenario.trace_limit - before);
    };

    const unsigned workers = worker_count(scenario.threads, reps);
    if (workers <= 1) {
        for (std::uint64_t k = 0; k < reps; ++k) per_rep[k] = run_replication(scenario, level, k, trace_rows_for(k));
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t k = next++; k < reps; k = next++) {
                    per_rep[k] = run_replication(scenario, level, k, trace_rows_for(k));
                }
            });
        }
    }

    SimulationReport rep(scenario);
    rep.provisioned_level = level;
    rep.total_steps = scenario.steps * reps;

    double provisioned_share = 0.0;
    for (auto& r : per_rep) {
        rep.violation_count += r.violations;
        rep.total_wasted_resource += r.wasted;
        rep.total_wastage_cost += r.wastage_cost;
        rep.total_penalty_cost += r.penalty_cost;
        provisioned_share += r.provisioned_share;
        for (auto& row : r.trace) rep.trace.push_back(row);
    }

    const double n = static_cast<double>(rep.total_steps);
    rep.violation_frequency = static_cast<double>(rep.violation_count) / n;
    rep.total_cost = rep.total_wastage_cost + rep.total_penalty_cost;
    rep.mean_step_wastage_cost = rep.total_wastage_cost / n;
    rep.trace_truncated = scenario.trace && rep.trace.size() < rep.total_steps;

    const auto& stats = scenario.stats;
    rep.model_wastage_cost = wastage_cost(level, stats, scenario.rates);
    rep.model_violation_probability = 1.0 - std::min(level, stats.max_demand()) / stats.max_demand();
    rep.profile_tail_probability = tail_probability(scenario.profile, level);
    rep.total_expected_model_cost =
        n * (std::max(0.0, rep.model_wastage_cost) + rep.model_violation_probability * scenario.rates.c_viol);

    rep.total_energy_kwh = provisioned_share * scenario.energy_full;
    rep.total_emissions_kg = rep.total_energy_kwh * scenario.carbon_intensity;
    rep.total_energy_cost = provisioned_share * scenario.rates.c_en;
    rep.total_co2_cost = provisioned_share * scenario.rates.c_co2;
    return rep;
}

OptimumResult empirical_optimum(const Scenario& scenario, std::span<const double> grid) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "optimum grid must not be empty");
    OptimumResult out;
    Scenario sc = scenario;
    sc.trace = false;
    for (double g : grid) {
        sc.policy = Policy::fixed_level(g);
        const auto rep = run_simulation(sc);
        out.costs.push_back({g, rep.total_cost});
    }
    const auto best = std::min_element(out.costs.begin(), out.costs.end(),
                                       [](const LevelCost& a, const LevelCost& b) { return a.cost < b.cost; });
    out.r_star = best->level;
    out.cost_at_r_star = best->cost;
    try {
        out.r_balance = balance(scenario.stats, scenario.rates).r_provisioned;
        out.gap = std::abs(out.r_star - *out.r_balance);
    } catch (const Error&) {
        // Gap is informational only.
    }
    return out;
}

PolicyComparison compare_policies(const Scenario& base, std::span<const Policy> policies) {
    PolicyComparison out;
    for (const auto& policy : policies) {
        Scenario sc = base;
        sc.policy = policy;
        PolicyOutcome outcome{policy, std::nullopt, {}};
        try {
            outcome.report = run_simulation(sc);
        } catch (const Error& e) {
            outcome.error = e.what();
        }
        out.outcomes.push_back(std::move(outcome));
    }
    for (std::size_t i = 0; i < out.outcomes.size(); ++i) {
        if (out.outcomes[i].report) out.ranking.push_back(i);
    }
    std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t a, std::size_t b) {
        return out.outcomes[a].report->total_cost < out.outcomes[b].report->total_cost;
    });
    return out;
}

}  // namespace wpb
