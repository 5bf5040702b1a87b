#include "wpb/emission_market.hpp"

#include "wpb/error.hpp"

#include <cmath>

namespace wpb {

namespace {

void require_nonnegative(double value, const std::string& what) {
    if (!std::isfinite(value) || value < 0.0) throw Error(ErrorCode::InvalidArgument, what + " must be finite and >= 0");
}

}  // namespace

void DataCenterAccount::validate() const {
    require_nonnegative(cap_kg, "cap_kg of '" + name + "'");
    require_nonnegative(emissions_kg, "emissions_kg of '" + name + "'");
}

double cer_position(const DataCenterAccount& account) {
    account.validate();
    return account.cap_kg - account.emissions_kg;
}

MarketSettlement settle(std::span<const DataCenterAccount> accounts, double price_per_kg) {
    require_nonnegative(price_per_kg, "price_per_kg");
    MarketSettlement out;
    out.price_per_kg = price_per_kg;
    out.rows.reserve(accounts.size());
    for (const auto& account : accounts) {
        const double position = cer_position(account);
        double cash = position * price_per_kg;
        if (cash == 0.0) cash = 0.0;  // no negative zero in reports
        out.rows.push_back({account, position, cash});
        out.total_position_kg += position;
        out.net_cash_flow += cash;
    }
    return out;
}

double emissions_from_report(const SimulationReport& report) {
    return report.total_energy_kwh * report.scenario.carbon_intensity;
}

double derive_co2_rate(double energy_full, double carbon_intensity, double price_per_kg) {
    require_nonnegative(energy_full, "energy_full");
    require_nonnegative(carbon_intensity, "carbon_intensity");
    require_nonnegative(price_per_kg, "price_per_kg");
    return energy_full * carbon_intensity * price_per_kg;
}

}  // namespace wpb
