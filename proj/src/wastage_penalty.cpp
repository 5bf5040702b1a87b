#include "wpb/wastage_penalty.hpp"

#include "wpb/error.hpp"

#include <algorithm>
#include <cmath>

namespace wpb {

namespace {

void require_nonnegative(double value, const char* name) {
    if (!std::isfinite(value) || value < 0.0) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be finite and >= 0");
    }
}

// Balance residual: wastage minus (expected penalty + satisfaction).
double residual(double r, const DemandStats& stats, const CostRates& rates) {
    const double p = 1.0 - r / stats.max_demand();
    return wastage_cost(r, stats, rates) - p * rates.c_viol - rates.satisfaction;
}

}  // namespace

void CostRates::validate() const {
    require_nonnegative(c_en, "c_en");
    require_nonnegative(c_co2, "c_co2");
    require_nonnegative(c_viol, "c_viol");
    require_nonnegative(satisfaction, "satisfaction");
}

DemandStats::DemandStats(double mean_demand, double max_demand, double r_agreed)
    : mean_(mean_demand), max_(max_demand), agreed_(r_agreed) {
    require_nonnegative(mean_, "mean_demand");
    require_nonnegative(max_, "max_demand");
    require_nonnegative(agreed_, "r_agreed");
    if (!(max_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_demand must be > 0");
    if (mean_ > max_) throw Error(ErrorCode::InvalidArgument, "mean_demand must not exceed max_demand");
    if (max_ > agreed_) {
        throw Error(ErrorCode::InvalidArgument,
                    "max_demand exceeds r_agreed (set clamp_demand_to_agreed to truncate demand instead)");
    }
}

double wastage_fraction(double r_provisioned, const DemandStats& stats) {
    return (r_provisioned - stats.mean_demand()) / stats.r_agreed();
}

double wastage_cost(double r_provisioned, const DemandStats& stats, const CostRates& rates) {
    return wastage_fraction(r_provisioned, stats) * rates.provisioning_price();
}

double violation_probability_linear(double r_provisioned, const DemandStats& stats) {
    if (std::isnan(r_provisioned) || r_provisioned < 0.0 || r_provisioned > stats.max_demand()) {
        throw Error(ErrorCode::DomainError, "linear violation model needs 0 <= r_provisioned <= max_demand");
    }
    return 1.0 - r_provisioned / stats.max_demand();
}

double expected_penalty(double p_viol, const CostRates& rates) {
    if (!(p_viol >= 0.0 && p_viol <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p_viol must lie in [0, 1]");
    return p_viol * rates.c_viol;
}

BalanceResult evaluate_level(double r_provisioned, const DemandStats& stats, const CostRates& rates) {
    BalanceResult out;
    out.r_provisioned = r_provisioned;
    out.w = wastage_fraction(r_provisioned, stats);
    out.c_wastage = out.w * rates.provisioning_price();
    // Above max the linear model has no violations left.
    out.p_viol = violation_probability_linear(std::min(r_provisioned, stats.max_demand()), stats);
    out.expected_penalty = expected_penalty(out.p_viol, rates);
    return out;
}

BalanceResult balance_closed_form(const DemandStats& stats, const CostRates& rates) {
    rates.validate();
    if (rates.satisfaction != 0.0) {
        throw Error(ErrorCode::NonzeroSatisfaction, "closed form assumes satisfaction = 0; use balance_numeric");
    }
    const double price = rates.provisioning_price();
    const double mean = stats.mean_demand();
    const double max = stats.max_demand();
    const double wastage_weight = max * price;
    const double penalty_weight = stats.r_agreed() * rates.c_viol;
    const double denom = wastage_weight + penalty_weight;
    if (!(denom > 0.0)) throw Error(ErrorCode::DegenerateCosts, "both cost channels are zero");

    double r;
    if (penalty_weight == 0.0) {
        r = mean;
    } else if (wastage_weight == 0.0) {
        r = max;
    } else {
        r = max * (mean * price + stats.r_agreed() * rates.c_viol) / denom;
    }
    // The exact value is a convex combination of mean and max; only rounding can leave the range.
    return evaluate_level(std::clamp(r, mean, max), stats, rates);
}

BalanceResult balance_numeric(const DemandStats& stats, const CostRates& rates, double tolerance) {
    rates.validate();
    if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
    if (rates.provisioning_price() == 0.0 && rates.c_viol == 0.0) {
        throw Error(ErrorCode::DegenerateCosts, "both cost channels are zero");
    }

    double lo = stats.mean_demand();
    double hi = stats.max_demand();
    double d_lo = residual(lo, stats, rates);
    double d_hi = residual(hi, stats, rates);
    if (d_hi < -tolerance) {
        throw Error(ErrorCode::NoRootInRange,
                    "penalty plus satisfaction exceeds wastage even at max_demand");
    }
    if (d_lo >= 0.0) return evaluate_level(lo, stats, rates);
    if (d_hi <= 0.0) return evaluate_level(hi, stats, rates);

    const double width_tol = kBracketRelativeWidth * stats.max_demand();
    for (int i = 0; i < kMaxBisectionIterations; ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const double d_mid = residual(mid, stats, rates);
        if (d_mid == 0.0) return evaluate_level(mid, stats, rates);
        if (d_mid < 0.0) {
            lo = mid;
            d_lo = d_mid;
        } else {
            hi = mid;
            d_hi = d_mid;
        }
        if (hi - lo <= width_tol && std::min(-d_lo, d_hi) <= tolerance) break;
    }
    return evaluate_level(-d_lo <= d_hi ? lo : hi, stats, rates);
}

BalanceResult balance(const DemandStats& stats, const CostRates& rates) {
    return rates.satisfaction == 0.0 ? balance_closed_form(stats, rates) : balance_numeric(stats, rates);
}

Interval heuristic_band(const BalanceResult& balance, double x_percent, const DemandStats& stats) {
    if (!(x_percent >= 0.0 && x_percent < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "x_percent must lie in [0, 1)");
    }
    const double r = balance.r_provisioned;
    return {std::clamp(r * (1.0 - x_percent), 0.0, stats.r_agreed()),
            std::clamp(r * (1.0 + x_percent), 0.0, stats.r_agreed())};
}

SweepCell evaluate_cell(double mean_demand, double max_demand, double r_agreed, const CostRates& rates) {
    SweepCell cell{mean_demand, max_demand, r_agreed, rates, std::nullopt, {}};
    try {
        const DemandStats stats(mean_demand, max_demand, r_agreed);
        cell.result = balance(stats, rates);
    } catch (const Error& e) {
        cell.error = e.what();
    }
    return cell;
}

std::vector<SweepCell> sensitivity_sweep(std::span<const DemandStats> stats_grid,
                                         std::span<const CostRates> rates_grid) {
    std::vector<SweepCell> rows;
    rows.reserve(stats_grid.size() * rates_grid.size());
    for (const auto& stats : stats_grid) {
        for (const auto& rates : rates_grid) {
            rows.push_back(evaluate_cell(stats.mean_demand(), stats.max_demand(), stats.r_agreed(), rates));
        }
    }
    return rows;
}

}  // namespace wpb
