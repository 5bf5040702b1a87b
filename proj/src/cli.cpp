#include "wpb/cli.hpp"

#include "wpb/config.hpp"
#include "wpb/emission_market.hpp"
#include "wpb/error.hpp"
#include "wpb/provisioning_sim.hpp"
#include "wpb/report_io.hpp"
#include "wpb/wastage_penalty.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"

namespace wpb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void usage_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

void write_file(const fs::path& dir, const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) usage_error("cannot create output directory " + dir.string() + ": " + ec.message());
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) usage_error("cannot write " + (dir / name).string());
    f << content;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct CommonArgs {
    std::string config;
    std::string output;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

double parse_real(std::string_view text, const std::string& what) {
    double x = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) usage_error(what + ": '" + std::string(text) + "' is not a real");
    return x;
}

const std::set<std::string, std::less<>> kSweepable = {"mean_demand", "max_demand", "r_agreed",
                                                       "c_en",        "c_co2",      "c_viol"};

// name=start:stop:count, count >= 1, evenly spaced with both ends included.
SweepAxis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) usage_error("--param '" + text + "': expected name=start:stop:count");
    SweepAxis axis{text.substr(0, eq), {}};
    if (!kSweepable.contains(axis.name)) usage_error("--param: unknown parameter '" + axis.name + "'");
    const std::string_view range(text.data() + eq + 1, text.size() - eq - 1);
    const auto c1 = range.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : range.find(':', c1 + 1);
    if (c2 == std::string_view::npos || range.find(':', c2 + 1) != std::string_view::npos) {
        usage_error("--param '" + text + "': expected name=start:stop:count");
    }
    const double start = parse_real(range.substr(0, c1), "--param " + axis.name + " start");
    const double stop = parse_real(range.substr(c1 + 1, c2 - c1 - 1), "--param " + axis.name + " stop");
    const auto count_text = range.substr(c2 + 1);
    std::uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || count < 1 || count > 10'000'000) {
        usage_error("--param " + axis.name + ": count must be an integer in [1, 1e7]");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        if (i + 1 == count && count > 1) {
            axis.values.push_back(stop);
        } else {
            const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            axis.values.push_back(start + t * (stop - start));
        }
    }
    return axis;
}

int cmd_balance(const CommonArgs& args, bool numeric, double tolerance, std::ostream& out) {
    const auto doc = load_config(args.config);
    require_sections(doc, {"stats", "rates"});
    const auto stats = resolve_stats(doc);
    const auto rates = resolve_rates(doc);

    BalanceResult result;
    std::string method;
    if (numeric || rates.satisfaction != 0.0) {
        result = balance_numeric(stats, rates, tolerance);
        method = "bisection";
    } else {
        result = balance_closed_form(stats, rates);
        method = "closed_form";
    }
    const auto text = dump(balance_to_json(result, stats, rates, method));
    out << text;
    if (!args.output.empty()) write_file(args.output, "balance.json", text);
    return kExitOk;
}

int cmd_simulate(const CommonArgs& args, const ScenarioOverrides& overrides, std::ostream& out) {
    const auto doc = load_config(args.config);
    if (overrides.trace && args.output.empty()) usage_error("--trace needs --output <dir>");

    if (!doc.policy_is_list) {
        const auto scenario = build_scenario(doc, overrides);
        const auto report = run_simulation(scenario);
        const auto text = dump(report_to_json(report));
        out << text;
        if (!args.output.empty()) {
            write_file(args.output, "report.json", text);
            if (overrides.trace) {
                std::ostringstream csv;
                write_trace_csv(csv, report.trace);
                write_file(args.output, "trace.csv", csv.str());
            }
        }
        return kExitOk;
    }

    const auto base = build_scenario(doc, overrides, 0);
    const auto comparison = compare_policies(base, doc.policies);
    auto echo_doc = effective_document(base);
    echo_doc.policies = doc.policies;
    echo_doc.policy_is_list = true;
    const auto text = dump(comparison_to_json(comparison, to_json(echo_doc)));
    out << text;
    if (!args.output.empty()) {
        write_file(args.output, "report.json", text);
        std::ostringstream csv;
        write_comparison_csv(csv, comparison);
        write_file(args.output, "comparison.csv", csv.str());
        if (overrides.trace) {
            for (std::size_t i = 0; i < comparison.outcomes.size(); ++i) {
                if (!comparison.outcomes[i].report) continue;
                std::ostringstream t;
                write_trace_csv(t, comparison.outcomes[i].report->trace);
                write_file(args.output, "trace_" + std::to_string(i) + ".csv", t.str());
            }
        }
    }
    return comparison.ranking.empty() ? kExitDomain : kExitOk;
}

int cmd_etm(const CommonArgs& args, const ScenarioOverrides& overrides, std::ostream& out) {
    const auto doc = load_config(args.config);
    require_sections(doc, {"market"});

    std::optional<double> simulated;
    std::vector<DataCenterAccount> accounts;
    for (const auto& entry : doc.market->accounts) {
        double emissions;
        if (entry.emissions_kg) {
            emissions = *entry.emissions_kg;
        } else {
            if (!simulated) simulated = emissions_from_report(run_simulation(build_scenario(doc, overrides)));
            emissions = *simulated;
        }
        accounts.push_back({entry.name, entry.cap_kg, emissions});
    }
    const auto settlement = settle(accounts, doc.market->price_per_kg);
    std::ostringstream csv;
    write_settlement_csv(csv, settlement);
    out << csv.str();
    if (!args.output.empty()) write_file(args.output, "settlement.csv", csv.str());
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::vector<std::string>& params, std::ostream& out) {
    std::vector<SweepAxis> axes;
    std::set<std::string> names;
    for (const auto& p : params) {
        axes.push_back(parse_axis(p));
        if (!names.insert(axes.back().name).second) usage_error("--param " + axes.back().name + " given twice");
    }

    const auto doc = load_config(args.config);
    require_sections(doc, {"stats", "rates"});
    // Base point; invalid base stats are fine as long as the sweep overrides them.
    std::optional<DemandStats> base_stats;
    try {
        base_stats = resolve_stats(doc);
    } catch (const Error&) {
    }
    const double base_mean = base_stats ? base_stats->mean_demand() : doc.stats->mean_demand.value_or(0.0);
    const double base_max = base_stats ? base_stats->max_demand() : doc.stats->max_demand.value_or(0.0);
    const auto base_rates = resolve_rates(doc);

    std::vector<SweepCell> rows;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        double mean_demand = base_mean, max_demand = base_max, r_agreed = doc.stats->r_agreed;
        CostRates rates = base_rates;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const double v = axes[a].values[idx[a]];
            const auto& n = axes[a].name;
            if (n == "mean_demand") mean_demand = v;
            else if (n == "max_demand") max_demand = v;
            else if (n == "r_agreed") r_agreed = v;
            else if (n == "c_en") rates.c_en = v;
            else if (n == "c_co2") rates.c_co2 = v;
            else rates.c_viol = v;
        }
        rows.push_back(evaluate_cell(mean_demand, max_demand, r_agreed, rates));

        // Odometer: the last axis varies fastest.
        bool advanced = false;
        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++idx[a] < axes[a].values.size()) {
                advanced = true;
                break;
            }
            idx[a] = 0;
        }
        if (!advanced) break;
    }

    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    out << csv.str();
    if (!args.output.empty()) write_file(args.output, "sweep.csv", csv.str());
    const bool any_ok = std::any_of(rows.begin(), rows.end(), [](const SweepCell& c) { return c.ok(); });
    return any_ok ? kExitOk : kExitDomain;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wastage-penalty provisioning model: balance, simulate, emission market, sweep", "wpb"};
    app.require_subcommand(1);

    CommonArgs common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", common.config, "Scenario config (JSON)")->required();
        sub->add_option("--output", common.output, "Directory for report files");
    };

    bool numeric = false;
    double tolerance = kDefaultResidualTolerance;
    auto* balance_cmd = app.add_subcommand("balance", "Wastage-penalty balance point");
    add_common(balance_cmd);
    balance_cmd->add_flag("--numeric", numeric, "Solve by bisection instead of the closed form");
    balance_cmd->add_option("--tolerance", tolerance, "Residual tolerance for bisection");

    std::optional<std::uint64_t> seed, steps;
    bool trace = false;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo run of the configured policy (or policies)");
    add_common(simulate_cmd);
    simulate_cmd->add_option("--seed", seed, "Override simulation.seed");
    simulate_cmd->add_option("--steps", steps, "Override simulation.steps");
    simulate_cmd->add_flag("--trace", trace, "Write per-step trace CSV");

    auto* etm_cmd = app.add_subcommand("etm", "Settle CER positions at the market price");
    add_common(etm_cmd);
    etm_cmd->add_option("--seed", seed, "Seed for accounts with emissions from_simulation");
    etm_cmd->add_option("--steps", steps, "Steps for accounts with emissions from_simulation");

    std::vector<std::string> params;
    auto* sweep_cmd = app.add_subcommand("sweep", "Balance over a parameter grid");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--param", params, "name=start:stop:count (repeatable)")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        const ScenarioOverrides overrides{seed, steps, trace};
        if (app.got_subcommand(balance_cmd)) return cmd_balance(common, numeric, tolerance, out);
        if (app.got_subcommand(simulate_cmd)) return cmd_simulate(common, overrides, out);
        if (app.got_subcommand(etm_cmd)) return cmd_etm(common, overrides, out);
        return cmd_sweep(common, params, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_domain_error(e.code()) ? kExitDomain : kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace wpb
