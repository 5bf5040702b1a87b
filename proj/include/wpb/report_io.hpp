#pragma once

#include "wpb/config.hpp"
#include "wpb/emission_market.hpp"
#include "wpb/provisioning_sim.hpp"
#include "wpb/wastage_penalty.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace wpb {

// Tabular outputs are CSV: fixed header row, LF line endings, reals printed
// with 12 significant digits ("%.12g"), text fields quoted only when needed.

std::string format_real(double x);

nlohmann::json balance_to_json(const BalanceResult& result, const DemandStats& stats, const CostRates& rates,
                               const std::string& method);

/// Aggregate record; `echo` is the effective config document.
nlohmann::json report_to_json(const SimulationReport& report);

nlohmann::json comparison_to_json(const PolicyComparison& comparison, const nlohmann::json& echo);

void write_trace_csv(std::ostream& out, std::span<const StepRecord> trace);

void write_settlement_csv(std::ostream& out, const MarketSettlement& settlement);

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> rows);

void write_comparison_csv(std::ostream& out, const PolicyComparison& comparison);

}  // namespace wpb
