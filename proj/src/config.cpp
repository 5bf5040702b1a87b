#include "wpb/config.hpp"

#include "wpb/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace wpb {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
    throw Error(ErrorCode::ConfigError, path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Walks one JSON object, remembering which keys were consumed so that
// finish() can reject anything left over.
class ObjectReader {
public:
    ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) config_error(path_, "expected an object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!node_.contains(key)) config_error(join(path_, key), "missing required key");
        return node_.at(key);
    }

    double real(const std::string& key) { return as_real(raw(key), join(path_, key)); }

    double real_or(const std::string& key, double fallback) { return has(key) ? real(key) : fallback; }

    std::optional<double> optional_real(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return real(key);
    }

    std::uint64_t u64(const std::string& key) { return as_u64(raw(key), join(path_, key)); }

    std::uint64_t u64_or(const std::string& key, std::uint64_t fallback) { return has(key) ? u64(key) : fallback; }

    bool boolean_or(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) config_error(join(path_, key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) config_error(join(path_, key), "expected a string");
        return v.get<std::string>();
    }

    std::string string_or(const std::string& key, const std::string& fallback) {
        return has(key) ? string(key) : fallback;
    }

    const std::string& path() const { return path_; }

    void finish() const {
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.contains(key)) config_error(join(path_, key), "unknown key");
        }
    }

    static double as_real(const json& v, const std::string& path) {
        if (!v.is_number()) config_error(path, "expected a decimal real");
        const double x = v.get<double>();
        if (!std::isfinite(x)) config_error(path, "expected a finite real");
        return x;
    }

    static std::uint64_t as_u64(const json& v, const std::string& path) {
        if (!v.is_number_unsigned()) config_error(path, "expected an unsigned 64-bit integer");
        return v.get<std::uint64_t>();
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename F>
auto with_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        config_error(path, e.what());
    }
}

DemandProfile parse_demand(const json& node) {
    ObjectReader r(node, "demand");
    const auto kind_name = r.string("kind");
    const auto& params_node = r.raw("params");
    if (!params_node.is_array()) config_error("demand.params", "expected an array of reals");
    std::vector<double> params;
    for (std::size_t i = 0; i < params_node.size(); ++i) {
        params.push_back(ObjectReader::as_real(params_node[i], "demand.params[" + std::to_string(i) + "]"));
    }
    const auto unit = r.string_or("resource_unit", "");
    r.finish();
    const auto kind = with_path("demand.kind", [&] { return demand_kind_from_string(kind_name); });
    return with_path("demand.params", [&] { return make_profile(kind, params, unit); });
}

StatsSection parse_stats(const json& node) {
    ObjectReader r(node, "stats");
    StatsSection s;
    s.r_agreed = r.real("r_agreed");
    s.mean_demand = r.optional_real("mean_demand");
    s.max_demand = r.optional_real("max_demand");
    if (r.has("max_method")) {
        const auto name = r.string("max_method");
        if (name == "paper_sum") {
            s.max_method = MaxMethod::paper_sum();
        } else if (name == "true_upper_bound") {
            s.max_method = MaxMethod::true_upper_bound();
        } else if (name == "quantile") {
            s.max_method = MaxMethod::quantile(r.real("max_quantile"));
        } else {
            config_error("stats.max_method", "expected paper_sum, true_upper_bound or quantile");
        }
    }
    r.finish();
    return s;
}

RatesSection parse_rates(const json& node) {
    ObjectReader r(node, "rates");
    RatesSection s;
    s.rates.c_en = r.real("c_en");
    if (r.has("c_co2") && node.at("c_co2").is_string()) {
        if (r.string("c_co2") != "from_market") config_error("rates.c_co2", "expected a real or \"from_market\"");
        s.c_co2_from_market = true;
    } else {
        s.rates.c_co2 = r.real("c_co2");
    }
    s.rates.c_viol = r.real("c_viol");
    s.rates.satisfaction = r.real_or("satisfaction", 0.0);
    r.finish();
    with_path("rates", [&] { s.rates.validate(); return 0; });
    return s;
}

Policy parse_policy(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    const auto kind = r.string("kind");
    Policy p;
    if (kind == "fixed_agreed") {
        p = Policy::fixed_agreed();
    } else if (kind == "mean_follow") {
        p = Policy::mean_follow();
    } else if (kind == "balance") {
        p = Policy::balance();
    } else if (kind == "balance_band") {
        p = Policy::balance_band(r.real("x_percent"));
        if (!(p.value >= 0.0 && p.value < 1.0)) config_error(join(path, "x_percent"), "must lie in [0, 1)");
    } else if (kind == "fixed_level") {
        p = Policy::fixed_level(r.real("level"));
        if (p.value < 0.0) config_error(join(path, "level"), "must be >= 0");
    } else {
        config_error(join(path, "kind"), "expected fixed_agreed, mean_follow, balance, balance_band or fixed_level");
    }
    r.finish();
    return p;
}

SimulationSection parse_simulation(const json& node) {
    ObjectReader r(node, "simulation");
    SimulationSection s;
    s.steps = r.u64("steps");
    s.replications = r.u64_or("replications", 1);
    if (r.has("seed")) s.seed = r.u64("seed");
    s.energy_full = r.real_or("energy_full", 0.0);
    s.carbon_intensity = r.real_or("carbon_intensity", 0.0);
    s.clamp_demand_to_agreed = r.boolean_or("clamp_demand_to_agreed", false);
    s.trace_limit = r.u64_or("trace_limit", 100000);
    const auto threads = r.u64_or("threads", 1);
    if (threads > std::numeric_limits<unsigned>::max()) config_error("simulation.threads", "too large");
    s.threads = static_cast<unsigned>(threads);
    r.finish();
    if (s.steps < 1) config_error("simulation.steps", "must be >= 1");
    if (s.replications < 1) config_error("simulation.replications", "must be >= 1");
    if (s.energy_full < 0.0) config_error("simulation.energy_full", "must be >= 0");
    if (s.carbon_intensity < 0.0) config_error("simulation.carbon_intensity", "must be >= 0");
    return s;
}

MarketSection parse_market(const json& node) {
    ObjectReader r(node, "market");
    MarketSection m;
    m.price_per_kg = r.real("price_per_kg");
    if (m.price_per_kg < 0.0) config_error("market.price_per_kg", "must be >= 0");
    const auto& accounts = r.raw("accounts");
    if (!accounts.is_array()) config_error("market.accounts", "expected an array");
    for (std::size_t i = 0; i < accounts.size(); ++i) {
        const auto path = "market.accounts[" + std::to_string(i) + "]";
        ObjectReader a(accounts[i], path);
        AccountEntry e;
        e.name = a.string("name");
        e.cap_kg = a.real("cap_kg");
        if (e.cap_kg < 0.0) config_error(path + ".cap_kg", "must be >= 0");
        const auto& em = a.raw("emissions_kg");
        if (em.is_string()) {
            if (em.get<std::string>() != "from_simulation") {
                config_error(path + ".emissions_kg", "expected a real or \"from_simulation\"");
            }
        } else {
            e.emissions_kg = ObjectReader::as_real(em, path + ".emissions_kg");
            if (*e.emissions_kg < 0.0) config_error(path + ".emissions_kg", "must be >= 0");
        }
        a.finish();
        m.accounts.push_back(std::move(e));
    }
    r.finish();
    return m;
}

json max_method_json(const MaxMethod& m, json& stats) {
    switch (m.kind) {
        case MaxMethod::Kind::PaperSum: return "paper_sum";
        case MaxMethod::Kind::TrueUpperBound: return "true_upper_bound";
        case MaxMethod::Kind::Quantile:
            stats["max_quantile"] = m.q;
            return "quantile";
    }
    return nullptr;
}

json policy_json(const Policy& p) {
    switch (p.kind) {
        case Policy::Kind::FixedAgreed: return {{"kind", "fixed_agreed"}};
        case Policy::Kind::MeanFollow: return {{"kind", "mean_follow"}};
        case Policy::Kind::Balance: return {{"kind", "balance"}};
        case Policy::Kind::BalanceBand: return {{"kind", "balance_band"}, {"x_percent", p.value}};
        case Policy::Kind::FixedLevel: return {{"kind", "fixed_level"}, {"level", p.value}};
    }
    return nullptr;
}

}  // namespace

ConfigDocument parse_config(const json& doc) {
    ObjectReader r(doc, "");
    ConfigDocument out;
    if (r.has("demand")) out.demand = parse_demand(r.raw("demand"));
    if (r.has("stats")) out.stats = parse_stats(r.raw("stats"));
    if (r.has("rates")) out.rates = parse_rates(r.raw("rates"));
    if (r.has("policy")) {
        const auto& p = r.raw("policy");
        if (p.is_array()) {
            out.policy_is_list = true;
            if (p.empty()) config_error("policy", "policy list must not be empty");
            for (std::size_t i = 0; i < p.size(); ++i) {
                out.policies.push_back(parse_policy(p[i], "policy[" + std::to_string(i) + "]"));
            }
        } else {
            out.policies.push_back(parse_policy(p, "policy"));
        }
    }
    if (r.has("simulation")) out.simulation = parse_simulation(r.raw("simulation"));
    if (r.has("market")) out.market = parse_market(r.raw("market"));
    r.finish();
    return out;
}

ConfigDocument load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, path.string() + ": cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ConfigDocument& doc) {
    json out = json::object();
    if (doc.demand) {
        out["demand"] = {{"kind", std::string(to_string(doc.demand->kind()))}, {"params", doc.demand->params()}};
        if (!doc.demand->resource_unit().empty()) out["demand"]["resource_unit"] = doc.demand->resource_unit();
    }
    if (doc.stats) {
        json s = {{"r_agreed", doc.stats->r_agreed}};
        if (doc.stats->mean_demand) s["mean_demand"] = *doc.stats->mean_demand;
        if (doc.stats->max_demand) s["max_demand"] = *doc.stats->max_demand;
        if (doc.stats->max_method) s["max_method"] = max_method_json(*doc.stats->max_method, s);
        out["stats"] = std::move(s);
    }
    if (doc.rates) {
        const auto& r = doc.rates->rates;
        out["rates"] = {{"c_en", r.c_en}, {"c_viol", r.c_viol}, {"satisfaction", r.satisfaction}};
        out["rates"]["c_co2"] = doc.rates->c_co2_from_market ? json("from_market") : json(r.c_co2);
    }
    if (!doc.policies.empty()) {
        if (doc.policy_is_list) {
            json list = json::array();
            for (const auto& p : doc.policies) list.push_back(policy_json(p));
            out["policy"] = std::move(list);
        } else {
            out["policy"] = policy_json(doc.policies.front());
        }
    }
    if (doc.simulation) {
        const auto& s = *doc.simulation;
        json j = {{"steps", s.steps},
                  {"replications", s.replications},
                  {"energy_full", s.energy_full},
                  {"carbon_intensity", s.carbon_intensity},
                  {"clamp_demand_to_agreed", s.clamp_demand_to_agreed},
                  {"trace_limit", s.trace_limit},
                  {"threads", s.threads}};
        if (s.seed) j["seed"] = *s.seed;
        out["simulation"] = std::move(j);
    }
    if (doc.market) {
        json accounts = json::array();
        for (const auto& a : doc.market->accounts) {
            accounts.push_back({{"name", a.name},
                                {"cap_kg", a.cap_kg},
                                {"emissions_kg", a.emissions_kg ? json(*a.emissions_kg) : json("from_simulation")}});
        }
        out["market"] = {{"price_per_kg", doc.market->price_per_kg}, {"accounts", std::move(accounts)}};
    }
    return out;
}

void require_sections(const ConfigDocument& doc, std::initializer_list<const char*> sections) {
    for (std::string_view s : sections) {
        const bool present = (s == "demand" && doc.demand) || (s == "stats" && doc.stats) ||
                             (s == "rates" && doc.rates) || (s == "policy" && !doc.policies.empty()) ||
                             (s == "simulation" && doc.simulation) || (s == "market" && doc.market);
        if (!present) config_error(std::string(s), "missing required section");
    }
}

DemandStats resolve_stats(const ConfigDocument& doc) {
    require_sections(doc, {"stats"});
    const auto& s = *doc.stats;
    auto derive = [&](const char* key) -> const DemandProfile& {
        if (!doc.demand) config_error(std::string("stats.") + key, "not given and no demand section to derive it from");
        return *doc.demand;
    };
    const double mean_demand = s.mean_demand ? *s.mean_demand : mean(derive("mean_demand"));
    double max_demand;
    if (s.max_demand) {
        max_demand = *s.max_demand;
    } else {
        const auto& profile = derive("max_demand");
        const auto method = s.max_method.value_or(default_max_method(profile));
        max_demand = with_path("stats.max_method", [&] { return max_estimate(profile, method); });
    }
    const bool clamp = doc.simulation && doc.simulation->clamp_demand_to_agreed;
    if (clamp) max_demand = std::min(max_demand, s.r_agreed);
    return with_path("stats", [&] {
        return DemandStats(clamp ? std::min(mean_demand, max_demand) : mean_demand, max_demand, s.r_agreed);
    });
}

CostRates resolve_rates(const ConfigDocument& doc) {
    require_sections(doc, {"rates"});
    CostRates rates = doc.rates->rates;
    if (doc.rates->c_co2_from_market) {
        if (!doc.market) config_error("rates.c_co2", "\"from_market\" needs a market section");
        if (!doc.simulation) config_error("rates.c_co2", "\"from_market\" needs a simulation section");
        rates.c_co2 = derive_co2_rate(doc.simulation->energy_full, doc.simulation->carbon_intensity,
                                      doc.market->price_per_kg);
    }
    return rates;
}

Scenario build_scenario(const ConfigDocument& doc, const ScenarioOverrides& overrides, std::size_t policy_index) {
    require_sections(doc, {"demand", "stats", "rates", "policy", "simulation"});
    if (policy_index >= doc.policies.size()) config_error("policy", "policy index out of range");
    const auto& sim = *doc.simulation;

    std::uint64_t seed;
    if (overrides.seed) {
        seed = *overrides.seed;
    } else if (sim.seed) {
        seed = *sim.seed;
    } else {
        config_error("simulation.seed", "no seed in config and none given on the command line");
    }

    Scenario sc{
        .profile = *doc.demand,
        .stats = resolve_stats(doc),
        .rates = resolve_rates(doc),
        .policy = doc.policies[policy_index],
        .steps = overrides.steps.value_or(sim.steps),
        .replications = sim.replications,
        .seed = seed,
        .energy_full = sim.energy_full,
        .carbon_intensity = sim.carbon_intensity,
        .clamp_demand_to_agreed = sim.clamp_demand_to_agreed,
        .trace = overrides.trace,
        .trace_limit = sim.trace_limit,
        .threads = sim.threads,
    };
    with_path("simulation", [&] { sc.validate(); return 0; });
    if (sc.policy.kind == Policy::Kind::FixedLevel && sc.policy.value > sc.stats.r_agreed()) {
        config_error("policy.level", "must not exceed r_agreed");
    }
    return sc;
}

ConfigDocument effective_document(const Scenario& sc, const std::optional<MarketSection>& market) {
    ConfigDocument doc;
    doc.demand = sc.profile;
    doc.stats = StatsSection{sc.stats.r_agreed(), sc.stats.mean_demand(), sc.stats.max_demand(), std::nullopt};
    doc.rates = RatesSection{sc.rates, false};
    doc.policies = {sc.policy};
    doc.simulation = SimulationSection{sc.steps,          sc.replications,          sc.seed,
                                       sc.energy_full,    sc.carbon_intensity,      sc.clamp_demand_to_agreed,
                                       sc.trace_limit,    sc.threads};
    doc.market = market;
    return doc;
}

std::string to_string(const MaxMethod& method) {
    switch (method.kind) {
        case MaxMethod::Kind::PaperSum: return "paper_sum";
        case MaxMethod::Kind::TrueUpperBound: return "true_upper_bound";
        case MaxMethod::Kind::Quantile: return "quantile(" + std::to_string(method.q) + ")";
    }
    return "unknown";
}

}  // namespace wpb
