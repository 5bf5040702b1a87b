#pragma once

#include "wpb/rng.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wpb {

enum class DemandKind { Uniform, TruncatedNormal, LogNormal, Empirical };

std::string_view to_string(DemandKind kind) noexcept;
/// Accepts the snake_case names used in config files ("uniform", "truncated_normal", ...).
DemandKind demand_kind_from_string(std::string_view name);

// Stochastic model of per-time-unit user demand. Immutable once built, so a
// single profile can be shared by concurrent replications.
//
// Parameter layouts accepted by make_profile():
//   Uniform          [lower, upper]
//   TruncatedNormal  [mu, sigma, upper]           (lower = 0)
//                    [mu, sigma, lower, upper]
//   LogNormal        [mu_log, sigma_log]          (untruncated)
//                    [mu_log, sigma_log, upper]
//   Empirical        observed demand values, at least two
//
// params() returns the canonical layout (the 4-element form for truncated
// normals), which make_profile() accepts back unchanged.
class DemandProfile {
public:
    DemandKind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }
    const std::string& resource_unit() const noexcept { return unit_; }

    double support_lower() const noexcept { return lower_; }
    /// +infinity for an untruncated log-normal.
    double support_upper() const noexcept { return upper_; }
    bool bounded() const noexcept;

    bool operator==(const DemandProfile&) const = default;

private:
    friend DemandProfile make_profile(DemandKind, std::span<const double>, std::string);

    DemandKind kind_ = DemandKind::Uniform;
    std::vector<double> params_;
    std::string unit_;
    double lower_ = 0.0;
    double upper_ = 0.0;
    // Sorted copy of the observations; empty for parametric families.
    std::vector<double> sorted_;
    // Probability mass of the untruncated parent inside the support.
    double mass_ = 1.0;

    friend double mean(const DemandProfile&);
    friend double variance(const DemandProfile&);
    friend double tail_probability(const DemandProfile&, double);
    friend double quantile(const DemandProfile&, double);
};

/// Throws Error{InvalidDistribution} when the parameters violate the family constraints.
DemandProfile make_profile(DemandKind kind, std::span<const double> params, std::string resource_unit = {});

double mean(const DemandProfile& profile);
/// Analytic for parametric families; unbiased (n - 1) sample variance for Empirical.
double variance(const DemandProfile& profile);

/// P(R > r). Exact complement of the CDF; step ECDF for Empirical.
double tail_probability(const DemandProfile& profile, double r);

/// Smallest x with P(R <= x) >= p, for p in (0, 1).
double quantile(const DemandProfile& profile, double p);

struct MaxMethod {
    enum class Kind { PaperSum, Quantile, TrueUpperBound };
    Kind kind = Kind::TrueUpperBound;
    double q = 0.99;

    static constexpr MaxMethod paper_sum() noexcept { return {Kind::PaperSum, 0.0}; }
    static constexpr MaxMethod quantile(double q) noexcept { return {Kind::Quantile, q}; }
    static constexpr MaxMethod true_upper_bound() noexcept { return {Kind::TrueUpperBound, 0.0}; }

    bool operator==(const MaxMethod&) const = default;
};

/// TrueUpperBound for bounded profiles, Quantile(0.99) otherwise.
MaxMethod default_max_method(const DemandProfile& profile) noexcept;

// Estimate of max(R_demand).
//   PaperSum        E(R) + V(R), verbatim (note: adds units to units squared)
//   Quantile(q)     q-quantile
//   TrueUpperBound  supremum of the support; UnboundedSupport if infinite
double max_estimate(const DemandProfile& profile, MaxMethod method);

/// One draw by inversion. Consumes exactly one uniform from the generator, so
/// draws stay aligned across profiles and policies sharing a seed.
double sample(const DemandProfile& profile, Rng& rng);

// Standard normal helpers shared with the other modules' tests.
double normal_cdf(double x) noexcept;
double normal_ccdf(double x) noexcept;

}  // namespace wpb
