#include "wpb/demand_model.hpp"

#include "wpb/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/erf.hpp>

namespace wpb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) noexcept {
    if (std::isinf(x)) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// x * pdf(x), with the limit 0 at +-infinity.
double x_pdf(double x) noexcept { return std::isinf(x) ? 0.0 : x * normal_pdf(x); }

double normal_quantile(double p) { return -kSqrt2 * boost::math::erfc_inv(2.0 * p); }
double normal_cquantile(double q) { return kSqrt2 * boost::math::erfc_inv(2.0 * q); }

// Probability mass of N(0,1) on [a, b]; uses the upper tail when both ends sit
// right of zero so that far-tail truncations keep their precision.
double normal_mass(double a, double b) noexcept {
    if (a > 0.0) return normal_ccdf(a) - normal_ccdf(b);
    return normal_cdf(b) - normal_cdf(a);
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidDistribution, msg); }

bool finite(double x) noexcept { return std::isfinite(x); }

struct TruncNormStd {
    double mu, sigma, alpha, beta, mass;
};

TruncNormStd trunc_norm(const DemandProfile& p) {
    const auto& v = p.params();
    const double mu = v[0];
    const double sigma = v[1];
    const double alpha = (v[2] - mu) / sigma;
    const double beta = (v[3] - mu) / sigma;
    return {mu, sigma, alpha, beta, normal_mass(alpha, beta)};
}

}  // namespace

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / kSqrt2); }
double normal_ccdf(double x) noexcept { return 0.5 * std::erfc(x / kSqrt2); }

std::string_view to_string(DemandKind kind) noexcept {
    switch (kind) {
        case DemandKind::Uniform: return "uniform";
        case DemandKind::TruncatedNormal: return "truncated_normal";
        case DemandKind::LogNormal: return "log_normal";
        case DemandKind::Empirical: return "empirical";
    }
    return "unknown";
}

DemandKind demand_kind_from_string(std::string_view name) {
    for (auto kind : {DemandKind::Uniform, DemandKind::TruncatedNormal, DemandKind::LogNormal,
                      DemandKind::Empirical}) {
        if (to_string(kind) == name) return kind;
    }
    throw Error(ErrorCode::InvalidDistribution, "unknown distribution kind '" + std::string(name) + "'");
}

bool DemandProfile::bounded() const noexcept { return std::isfinite(upper_); }

DemandProfile make_profile(DemandKind kind, std::span<const double> params, std::string resource_unit) {
    DemandProfile p;
    p.kind_ = kind;
    p.unit_ = std::move(resource_unit);

    switch (kind) {
        case DemandKind::Uniform: {
            if (params.size() != 2) invalid("uniform takes [lower, upper]");
            const double lo = params[0], hi = params[1];
            if (!finite(lo) || !finite(hi)) invalid("uniform bounds must be finite");
            if (lo < 0.0) invalid("uniform lower bound must be >= 0");
            if (!(lo < hi)) invalid("uniform requires lower < upper");
            p.params_ = {lo, hi};
            p.lower_ = lo;
            p.upper_ = hi;
            break;
        }
        case DemandKind::TruncatedNormal: {
            double mu, sigma, lo = 0.0, hi;
            if (params.size() == 3) {
                mu = params[0], sigma = params[1], hi = params[2];
            } else if (params.size() == 4) {
                mu = params[0], sigma = params[1], lo = params[2], hi = params[3];
            } else {
                invalid("truncated_normal takes [mu, sigma, upper] or [mu, sigma, lower, upper]");
            }
            if (!finite(mu) || !finite(sigma) || !finite(lo)) invalid("truncated_normal parameters must be finite");
            if (!(sigma > 0.0)) invalid("truncated_normal requires sigma > 0");
            if (lo < 0.0) invalid("truncated_normal lower bound must be >= 0");
            if (std::isnan(hi) || !(hi > lo)) invalid("truncated_normal requires upper > lower");
            p.params_ = {mu, sigma, lo, hi};
            p.lower_ = lo;
            p.upper_ = hi;
            p.mass_ = normal_mass((lo - mu) / sigma, (hi - mu) / sigma);
            if (!(p.mass_ > 0.0)) invalid("truncated_normal support carries no probability mass");
            break;
        }
        case DemandKind::LogNormal: {
            double mu_log, sigma_log, hi = kInf;
            if (params.size() == 2) {
                mu_log = params[0], sigma_log = params[1];
            } else if (params.size() == 3) {
                mu_log = params[0], sigma_log = params[1], hi = params[2];
            } else {
                invalid("log_normal takes [mu_log, sigma_log] or [mu_log, sigma_log, upper]");
            }
            if (!finite(mu_log) || !finite(sigma_log)) invalid("log_normal parameters must be finite");
            if (!(sigma_log > 0.0)) invalid("log_normal requires sigma_log > 0");
            if (std::isnan(hi) || !(hi > 0.0)) invalid("log_normal upper truncation must be > 0");
            p.params_ = std::isinf(hi) ? std::vector<double>{mu_log, sigma_log}
                                       : std::vector<double>{mu_log, sigma_log, hi};
            p.lower_ = 0.0;
            p.upper_ = hi;
            p.mass_ = std::isinf(hi) ? 1.0 : normal_cdf((std::log(hi) - mu_log) / sigma_log);
            if (!(p.mass_ > 0.0)) invalid("log_normal truncation leaves no probability mass");
            break;
        }
        case DemandKind::Empirical: {
            if (params.size() < 2) invalid("empirical profile needs at least 2 samples");
            for (double x : params) {
                if (!finite(x) || x < 0.0) invalid("empirical samples must be finite and >= 0");
            }
            p.params_.assign(params.begin(), params.end());
            p.sorted_ = p.params_;
            std::sort(p.sorted_.begin(), p.sorted_.end());
            p.lower_ = p.sorted_.front();
            p.upper_ = p.sorted_.back();
            break;
        }
    }
    return p;
}

double mean(const DemandProfile& p) {
    switch (p.kind_) {
        case DemandKind::Uniform:
            return 0.5 * (p.lower_ + p.upper_);
        case DemandKind::TruncatedNormal: {
            const auto t = trunc_norm(p);
            const double m = t.mu + t.sigma * (normal_pdf(t.alpha) - normal_pdf(t.beta)) / t.mass;
            return std::clamp(m, p.lower_, p.upper_);
        }
        case DemandKind::LogNormal: {
            const double mu = p.params_[0], s = p.params_[1];
            const double full = std::exp(mu + 0.5 * s * s);
            if (!p.bounded()) return full;
            const double z = (std::log(p.upper_) - mu) / s;
            return std::min(full * normal_cdf(z - s) / p.mass_, p.upper_);
        }
        case DemandKind::Empirical:
            return std::accumulate(p.sorted_.begin(), p.sorted_.end(), 0.0) /
                   static_cast<double>(p.sorted_.size());
    }
    return 0.0;
}

double variance(const DemandProfile& p) {
    switch (p.kind_) {
        case DemandKind::Uniform: {
            const double w = p.upper_ - p.lower_;
            return w * w / 12.0;
        }
        case DemandKind::TruncatedNormal: {
            const auto t = trunc_norm(p);
            const double d = (normal_pdf(t.alpha) - normal_pdf(t.beta)) / t.mass;
            const double v = t.sigma * t.sigma * (1.0 + (x_pdf(t.alpha) - x_pdf(t.beta)) / t.mass - d * d);
            return std::max(v, 0.0);
        }
        case DemandKind::LogNormal: {
            const double mu = p.params_[0], s = p.params_[1];
            if (!p.bounded()) return std::exp(2.0 * mu + s * s) * std::expm1(s * s);
            const double z = (std::log(p.upper_) - mu) / s;
            const double second = std::exp(2.0 * mu + 2.0 * s * s) * normal_cdf(z - 2.0 * s) / p.mass_;
            const double m = mean(p);
            return std::max(second - m * m, 0.0);
        }
        case DemandKind::Empirical: {
            const double m = mean(p);
            double ss = 0.0;
            for (double x : p.sorted_) ss += (x - m) * (x - m);
            return ss / static_cast<double>(p.sorted_.size() - 1);
        }
    }
    return 0.0;
}

double tail_probability(const DemandProfile& p, double r) {
    if (std::isnan(r) || r < 0.0) throw Error(ErrorCode::InvalidArgument, "tail_probability requires r >= 0");
    if (r >= p.upper_) return 0.0;
    switch (p.kind_) {
        case DemandKind::Uniform:
            if (r <= p.lower_) return 1.0;
            // Written as 1 - x/width so that on [0, M] it is literally 1 - r/M.
            return 1.0 - (r - p.lower_) / (p.upper_ - p.lower_);
        case DemandKind::TruncatedNormal: {
            if (r <= p.lower_) return 1.0;
            const auto t = trunc_norm(p);
            const double z = (r - t.mu) / t.sigma;
            return std::clamp(normal_mass(z, t.beta) / t.mass, 0.0, 1.0);
        }
        case DemandKind::LogNormal: {
            if (r <= 0.0) return 1.0;
            const double mu = p.params_[0], s = p.params_[1];
            const double z = (std::log(r) - mu) / s;
            const double zu = p.bounded() ? (std::log(p.upper_) - mu) / s : kInf;
            return std::clamp(normal_mass(z, zu) / p.mass_, 0.0, 1.0);
        }
        case DemandKind::Empirical: {
            const auto above = p.sorted_.end() - std::upper_bound(p.sorted_.begin(), p.sorted_.end(), r);
            return static_cast<double>(above) / static_cast<double>(p.sorted_.size());
        }
    }
    return 0.0;
}

double quantile(const DemandProfile& p, double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile requires 0 < p < 1");
    switch (p.kind_) {
        case DemandKind::Uniform:
            return std::min(p.lower_ + prob * (p.upper_ - p.lower_), p.upper_);
        case DemandKind::TruncatedNormal: {
            const auto t = trunc_norm(p);
            double z;
            if (t.alpha > 0.0) {
                z = normal_cquantile(normal_ccdf(t.alpha) - prob * t.mass);
            } else {
                z = normal_quantile(normal_cdf(t.alpha) + prob * t.mass);
            }
            return std::clamp(t.mu + t.sigma * z, p.lower_, p.upper_);
        }
        case DemandKind::LogNormal: {
            const double mu = p.params_[0], s = p.params_[1];
            const double x = std::exp(mu + s * normal_quantile(prob * p.mass_));
            return std::min(x, p.upper_);
        }
        case DemandKind::Empirical: {
            const auto n = p.sorted_.size();
            auto idx = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n)));
            idx = std::clamp<std::size_t>(idx, 1, n);
            return p.sorted_[idx - 1];
        }
    }
    return 0.0;
}

MaxMethod default_max_method(const DemandProfile& profile) noexcept {
    return profile.bounded() ? MaxMethod::true_upper_bound() : MaxMethod::quantile(0.99);
}

double max_estimate(const DemandProfile& profile, MaxMethod method) {
    switch (method.kind) {
        case MaxMethod::Kind::PaperSum:
            return mean(profile) + variance(profile);
        case MaxMethod::Kind::Quantile:
            return quantile(profile, method.q);
        case MaxMethod::Kind::TrueUpperBound:
            if (!profile.bounded()) {
                throw Error(ErrorCode::UnboundedSupport, "profile has no finite upper bound");
            }
            return profile.support_upper();
    }
    return 0.0;
}

double sample(const DemandProfile& profile, Rng& rng) { return quantile(profile, rng.next_open_unit()); }

}  // namespace wpb
