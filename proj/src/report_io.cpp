#include "wpb/report_io.hpp"

#include <cmath>
#include <cstdio>

namespace wpb {

using nlohmann::json;

namespace {

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json balance_fields(const BalanceResult& b) {
    return {{"r_provisioned", b.r_provisioned},
            {"w", b.w},
            {"c_wastage", b.c_wastage},
            {"p_viol", b.p_viol},
            {"expected_penalty", b.expected_penalty}};
}

}  // namespace

std::string format_real(double x) {
    if (x == 0.0) return "0";  // also folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

json balance_to_json(const BalanceResult& result, const DemandStats& stats, const CostRates& rates,
                     const std::string& method) {
    json out = balance_fields(result);
    out["method"] = method;
    out["inputs"] = {{"mean_demand", stats.mean_demand()}, {"max_demand", stats.max_demand()},
                     {"r_agreed", stats.r_agreed()},       {"c_en", rates.c_en},
                     {"c_co2", rates.c_co2},               {"c_viol", rates.c_viol},
                     {"satisfaction", rates.satisfaction}};
    return out;
}

json report_to_json(const SimulationReport& r) {
    return {
        {"policy", to_string(r.scenario.policy)},
        {"seed", r.scenario.seed},
        {"provisioned_level", r.provisioned_level},
        {"total_steps", r.total_steps},
        {"violation_count", r.violation_count},
        {"violation_frequency", r.violation_frequency},
        {"total_wasted_resource", r.total_wasted_resource},
        {"total_wastage_cost", r.total_wastage_cost},
        {"total_penalty_cost", r.total_penalty_cost},
        {"total_cost", r.total_cost},
        {"mean_step_wastage_cost", r.mean_step_wastage_cost},
        {"total_expected_model_cost", r.total_expected_model_cost},
        {"model_wastage_cost", r.model_wastage_cost},
        {"model_violation_probability", r.model_violation_probability},
        {"profile_tail_probability", r.profile_tail_probability},
        {"total_energy_kwh", r.total_energy_kwh},
        {"total_emissions_kg", r.total_emissions_kg},
        {"total_energy_cost", r.total_energy_cost},
        {"total_co2_cost", r.total_co2_cost},
        {"trace_rows", r.trace.size()},
        {"trace_truncated", r.trace_truncated},
        {"scenario", to_json(effective_document(r.scenario))},
    };
}

json comparison_to_json(const PolicyComparison& comparison, const json& echo) {
    json policies = json::array();
    for (const auto& o : comparison.outcomes) {
        json entry = {{"policy", to_string(o.policy)}};
        if (o.report) {
            auto rec = report_to_json(*o.report);
            rec.erase("scenario");
            entry["report"] = std::move(rec);
        } else {
            entry["error"] = o.error;
        }
        policies.push_back(std::move(entry));
    }
    return {{"policies", std::move(policies)}, {"ranking", comparison.ranking}, {"scenario", echo}};
}

void write_trace_csv(std::ostream& out, std::span<const StepRecord> trace) {
    out << "replication,step,demand,provisioned,violation,wasted,wastage_cost,penalty_cost\n";
    for (const auto& s : trace) {
        out << s.replication << ',' << s.step << ',' << format_real(s.demand) << ',' << format_real(s.provisioned)
            << ',' << (s.violation ? 1 : 0) << ',' << format_real(s.wasted) << ',' << format_real(s.wastage_cost)
            << ',' << format_real(s.penalty_cost) << '\n';
    }
}

void write_settlement_csv(std::ostream& out, const MarketSettlement& settlement) {
    out << "name,cap_kg,emissions_kg,position_kg,cash_flow\n";
    double cap = 0.0, emissions = 0.0;
    for (const auto& row : settlement.rows) {
        out << csv_text(row.account.name) << ',' << format_real(row.account.cap_kg) << ','
            << format_real(row.account.emissions_kg) << ',' << format_real(row.position_kg) << ','
            << format_real(row.cash_flow) << '\n';
        cap += row.account.cap_kg;
        emissions += row.account.emissions_kg;
    }
    out << "TOTAL," << format_real(cap) << ',' << format_real(emissions) << ','
        << format_real(settlement.total_position_kg) << ',' << format_real(settlement.net_cash_flow) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> rows) {
    out << "mean_demand,max_demand,r_agreed,c_en,c_co2,c_viol,satisfaction,"
           "r_provisioned,w,c_wastage,p_viol,expected_penalty,error\n";
    for (const auto& c : rows) {
        out << format_real(c.mean_demand) << ',' << format_real(c.max_demand) << ',' << format_real(c.r_agreed)
            << ',' << format_real(c.rates.c_en) << ',' << format_real(c.rates.c_co2) << ','
            << format_real(c.rates.c_viol) << ',' << format_real(c.rates.satisfaction) << ',';
        if (c.result) {
            const auto& b = *c.result;
            out << format_real(b.r_provisioned) << ',' << format_real(b.w) << ',' << format_real(b.c_wastage) << ','
                << format_real(b.p_viol) << ',' << format_real(b.expected_penalty) << ",\n";
        } else {
            out << ",,,,," << csv_text(c.error) << '\n';
        }
    }
}

void write_comparison_csv(std::ostream& out, const PolicyComparison& comparison) {
    out << "rank,policy,provisioned_level,violation_count,violation_frequency,total_wastage_cost,"
           "total_penalty_cost,total_cost,total_energy_kwh,total_emissions_kg,error\n";
    std::vector<std::size_t> rank_of(comparison.outcomes.size(), 0);
    for (std::size_t i = 0; i < comparison.ranking.size(); ++i) rank_of[comparison.ranking[i]] = i + 1;
    for (std::size_t i = 0; i < comparison.outcomes.size(); ++i) {
        const auto& o = comparison.outcomes[i];
        out << (o.report ? std::to_string(rank_of[i]) : "") << ',' << csv_text(to_string(o.policy)) << ',';
        if (o.report) {
            const auto& r = *o.report;
            out << format_real(r.provisioned_level) << ',' << r.violation_count << ','
                << format_real(r.violation_frequency) << ',' << format_real(r.total_wastage_cost) << ','
                << format_real(r.total_penalty_cost) << ',' << format_real(r.total_cost) << ','
                << format_real(r.total_energy_kwh) << ',' << format_real(r.total_emissions_kg) << ",\n";
        } else {
            out << ",,,,,,,," << csv_text(o.error) << '\n';
        }
    }
}

}  // namespace wpb
