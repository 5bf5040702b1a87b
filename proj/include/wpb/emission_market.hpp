#pragma once

#include "wpb/provisioning_sim.hpp"

#include <span>
#include <string>
#include <vector>

namespace wpb {

/// One accounting period of a data center under an emission cap.
struct DataCenterAccount {
    std::string name;
    double cap_kg = 0.0;
    double emissions_kg = 0.0;

    void validate() const;
    bool operator==(const DataCenterAccount&) const = default;
};

struct SettlementRow {
    DataCenterAccount account;
    /// Net CERs in kg: negative must be bought, positive may be sold.
    double position_kg = 0.0;
    /// Negative pays the market, positive earns from it.
    double cash_flow = 0.0;
};

struct MarketSettlement {
    double price_per_kg = 0.0;
    std::vector<SettlementRow> rows;
    double total_position_kg = 0.0;
    /// Net flow with the (external) market; not required to be zero.
    double net_cash_flow = 0.0;
};

/// cap_kg - emissions_kg.
double cer_position(const DataCenterAccount& account);

/// Settles every account at a fixed exogenous price.
MarketSettlement settle(std::span<const DataCenterAccount> accounts, double price_per_kg);

/// total_energy_kwh * carbon_intensity of the simulated scenario.
double emissions_from_report(const SimulationReport& report);

/// Per-step CO2e price of provisioning all of r_agreed; feeds CostRates::c_co2.
double derive_co2_rate(double energy_full, double carbon_intensity, double price_per_kg);

}  // namespace wpb
