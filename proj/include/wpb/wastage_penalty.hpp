#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wpb {

/// Market prices. c_en and c_co2 are the per-time-unit prices of provisioning
/// the whole agreed amount; c_viol is charged per violation.
struct CostRates {
    double c_en = 0.0;
    double c_co2 = 0.0;
    double c_viol = 0.0;
    /// Additive customer-satisfaction term on the penalty side of the balance.
    double satisfaction = 0.0;

    /// Throws InvalidArgument on negative or non-finite prices.
    void validate() const;
    double provisioning_price() const noexcept { return c_en + c_co2; }

    bool operator==(const CostRates&) const = default;
};

/// Demand statistics for one SLA. Enforces 0 <= mean <= max <= r_agreed, max > 0.
class DemandStats {
public:
    DemandStats(double mean_demand, double max_demand, double r_agreed);

    double mean_demand() const noexcept { return mean_; }
    double max_demand() const noexcept { return max_; }
    double r_agreed() const noexcept { return agreed_; }

    bool operator==(const DemandStats&) const = default;

private:
    double mean_;
    double max_;
    double agreed_;
};

struct BalanceResult {
    double r_provisioned = 0.0;
    double w = 0.0;
    double c_wastage = 0.0;
    double p_viol = 0.0;
    double expected_penalty = 0.0;

    bool operator==(const BalanceResult&) const = default;
};

/// (r - mean) / r_agreed. Negative below the mean.
double wastage_fraction(double r_provisioned, const DemandStats& stats);

double wastage_cost(double r_provisioned, const DemandStats& stats, const CostRates& rates);

/// 1 - r / max. DomainError outside [0, max_demand].
double violation_probability_linear(double r_provisioned, const DemandStats& stats);

double expected_penalty(double p_viol, const CostRates& rates);

/// All BalanceResult quantities evaluated at a given level.
BalanceResult evaluate_level(double r_provisioned, const DemandStats& stats, const CostRates& rates);

/// Closed-form wastage-penalty balance
///
///   r = max * (mean * (c_en + c_co2) + r_agreed * c_viol)
///           / (max * (c_en + c_co2) + r_agreed * c_viol)
///
/// which is the weighted average of mean and max with weights
/// max * (c_en + c_co2) and r_agreed * c_viol.
///
/// Throws NonzeroSatisfaction when rates.satisfaction != 0 and
/// DegenerateCosts when both weights vanish.
BalanceResult balance_closed_form(const DemandStats& stats, const CostRates& rates);

inline constexpr double kDefaultResidualTolerance = 1e-12;
inline constexpr double kBracketRelativeWidth = 1e-12;
inline constexpr int kMaxBisectionIterations = 200;

/// Bisection on d(r) = c_wastage(r) - E(C_penal)(r) - satisfaction over
/// [mean, max]. d is nondecreasing, nonpositive at the mean and equal to the
/// full wastage minus satisfaction at the max.
///
/// Stops once |d| <= tolerance and the bracket is narrower than
/// 1e-12 * max_demand, or after 200 halvings.
///
/// Throws DegenerateCosts when both cost channels are zero and NoRootInRange
/// when d(max) < -tolerance.
BalanceResult balance_numeric(const DemandStats& stats, const CostRates& rates,
                              double tolerance = kDefaultResidualTolerance);

/// Closed form when satisfaction is zero, bisection otherwise.
BalanceResult balance(const DemandStats& stats, const CostRates& rates);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double x) const noexcept { return lower <= x && x <= upper; }
    bool operator==(const Interval&) const = default;
};

/// [r(1 - x), r(1 + x)] clipped to [0, r_agreed]; 0 <= x < 1.
Interval heuristic_band(const BalanceResult& balance, double x_percent, const DemandStats& stats);

struct SweepCell {
    double mean_demand = 0.0;
    double max_demand = 0.0;
    double r_agreed = 0.0;
    CostRates rates;
    std::optional<BalanceResult> result;
    std::string error;

    bool ok() const noexcept { return result.has_value(); }
};

/// Builds the stats from raw values and balances them; any library error
/// (including invalid stats) lands in SweepCell::error instead of escaping.
SweepCell evaluate_cell(double mean_demand, double max_demand, double r_agreed, const CostRates& rates);

/// Cartesian product, stats outermost. Failures are recorded per cell.
std::vector<SweepCell> sensitivity_sweep(std::span<const DemandStats> stats_grid,
                                         std::span<const CostRates> rates_grid);

}  // namespace wpb
