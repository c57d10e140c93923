#include "medbounds/app.hpp"

#include "medbounds/covariates.hpp"
#include "medbounds/errors.hpp"
#include "medbounds/regimes.hpp"
#include "medbounds/rng.hpp"

#include <toml.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace medbounds {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + what + " '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

toml::table parse_toml(const std::string& text, const std::string& what) {
    try {
        return toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << what << ": " << e.description() << " at line " << e.source().begin.line;
        fail(ErrorCode::Parse, msg.str());
    }
}

std::string get_string(const toml::node_view<const toml::node> v, const std::string& key) {
    if (!v) return {};
    if (auto s = v.value<std::string>()) return *s;
    fail(ErrorCode::Config, "'" + key + "' must be a string");
}

std::vector<std::string> get_strings(const toml::node_view<const toml::node> v,
                                     const std::string& key) {
    std::vector<std::string> out;
    if (!v) return out;
    if (auto s = v.value<std::string>()) return {*s};
    const toml::array* a = v.as_array();
    if (!a) fail(ErrorCode::Config, "'" + key + "' must be a string or an array of strings");
    for (const auto& e : *a) {
        if (auto s = e.value<std::string>()) {
            out.push_back(*s);
        } else if (auto i = e.value<std::int64_t>(); i && e.is_integer()) {
            out.push_back(std::to_string(*i));
        } else {
            fail(ErrorCode::Config, "'" + key + "' must hold strings");
        }
    }
    return out;
}

std::string get_label(const toml::node_view<const toml::node> v, const std::string& key) {
    if (!v) return {};
    if (auto s = v.value<std::string>()) return *s;
    if (v.is_integer()) return std::to_string(*v.value<std::int64_t>());
    fail(ErrorCode::Config, "'" + key + "' must be a string or an integer");
}

template <typename T>
std::optional<T> get_number(const toml::node_view<const toml::node> v, const std::string& key) {
    if (!v) return std::nullopt;
    if constexpr (std::is_integral_v<T>) {
        const auto i = v.value<std::int64_t>();
        if (!i || !v.is_integer() || *i < 0) {
            fail(ErrorCode::Config, "'" + key + "' must be a nonnegative integer");
        }
        return static_cast<T>(*i);
    } else {
        const auto d = v.value<double>();
        if (!d) fail(ErrorCode::Config, "'" + key + "' must be a number");
        return *d;
    }
}

std::optional<bool> get_bool(const toml::node_view<const toml::node> v, const std::string& key) {
    if (!v) return std::nullopt;
    if (auto b = v.value<bool>()) return *b;
    fail(ErrorCode::Config, "'" + key + "' must be true or false");
}

ZeroCellPolicy parse_policy(const std::string& s) {
    if (s.empty() || s == "error") return ZeroCellPolicy::Error;
    if (s == "uniform") return ZeroCellPolicy::UniformFallback;
    fail(ErrorCode::Config, "zero_cells must be \"error\" or \"uniform\", got '" + s + "'");
}

std::vector<AssumptionSet> parse_assumptions(const std::vector<std::string>& names,
                                             const std::vector<std::size_t>& map) {
    std::vector<AssumptionSet> out;
    for (const auto& name : names) {
        AssumptionSet set = parse_assumption_set(name);
        if (set.kind == AssumptionSet::Kind::DeterministicCrossWorldR) {
            require(!map.empty(), ErrorCode::Config,
                    "deterministic-cross-world-r needs deterministic_map");
            set.map = map;
        }
        out.push_back(std::move(set));
    }
    return out;
}

std::vector<std::size_t> parse_map(const toml::node_view<const toml::node> v) {
    std::vector<std::size_t> map;
    if (!v) return map;
    const toml::array* a = v.as_array();
    if (!a) fail(ErrorCode::Config, "'deterministic_map' must be an array of integers");
    for (const auto& e : *a) {
        const auto i = e.value<std::int64_t>();
        if (!i || !e.is_integer() || *i < 0) {
            fail(ErrorCode::Config, "'deterministic_map' must hold nonnegative integers");
        }
        map.push_back(static_cast<std::size_t>(*i));
    }
    return map;
}

json number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

json interval_json(const IntervalEstimate& e) {
    return json{{"lower", number(e.lower)},
                {"upper", number(e.upper)},
                {"point_identified", e.point_identified}};
}

json bootstrap_json(const BootstrapResult& r, bool keep) {
    json out{{"ci_lower", number(r.ci_lower)}, {"ci_upper", number(r.ci_upper)}};
    if (keep) {
        json reps = json::array();
        for (const auto& rep : r.replicates) {
            if (rep.failed) {
                reps.push_back(nullptr);
            } else {
                reps.push_back(json::array({number(rep.lower), number(rep.upper)}));
            }
        }
        out["replicates"] = std::move(reps);
    }
    return out;
}

json error_json(const Error& e) {
    return json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
}

std::vector<IntervalEstimate> effect_targets(const StratifiedLaws& strata, const AssumptionSet& set) {
    const RegimeResult r = estimate_regime(strata, set);
    return {r.effects.gamma0, r.effects.pde, r.effects.nie};
}

json law_json(const MediationLaw& law) {
    return json{{"y_values", law.y_values()},
                {"m_levels", law.m_levels()},
                {"r_components", law.r_components()},
                {"p_r", law.r_table()},
                {"p_m", law.m_table()},
                {"p_y", law.y_table()}};
}

}  // namespace

EstimateConfig parse_estimate_config(const std::string& toml_text, const std::string& base_dir) {
    const toml::table t = parse_toml(toml_text, "config");
    const auto root = toml::node_view<const toml::node>(t);
    EstimateConfig cfg;
    cfg.input = get_string(root["input"], "input");
    if (!cfg.input.empty() && !base_dir.empty() && std::filesystem::path(cfg.input).is_relative()) {
        cfg.input = (std::filesystem::path(base_dir) / cfg.input).string();
    }

    const auto cols = root["columns"];
    ColumnRoles& roles = cfg.ingest.roles;
    roles.exposure = get_string(cols["exposure"], "columns.exposure");
    roles.mediator = get_string(cols["mediator"], "columns.mediator");
    roles.outcome = get_string(cols["outcome"], "columns.outcome");
    roles.confounders = get_strings(cols["confounders"], "columns.confounders");
    roles.covariates = get_strings(cols["covariates"], "columns.covariates");
    if (const std::string w = get_string(cols["weight"], "columns.weight"); !w.empty()) {
        roles.weight = w;
    }

    cfg.ingest.baseline_label = get_label(root["exposure"]["baseline"], "exposure.baseline");
    cfg.ingest.comparison_label = get_label(root["exposure"]["comparison"], "exposure.comparison");

    if (const toml::table* levels = t["levels"].as_table()) {
        for (const auto& [key, node] : *levels) {
            const std::string name(key.str());
            cfg.ingest.levels[name] =
                get_strings(toml::node_view<const toml::node>(node), "levels." + name);
        }
    }
    if (const toml::array* ys = t["outcome"]["values"].as_array()) {
        for (const auto& e : *ys) {
            const auto v = e.value<double>();
            if (!v) fail(ErrorCode::Config, "'outcome.values' must hold numbers");
            cfg.ingest.y_values.push_back(*v);
        }
    }

    const auto est = root["estimate"];
    cfg.assumptions = parse_assumptions(get_strings(est["assumptions"], "estimate.assumptions"),
                                        parse_map(est["deterministic_map"]));
    cfg.policy = parse_policy(get_string(est["zero_cells"], "estimate.zero_cells"));

    if (const auto bs = root["bootstrap"]; bs) {
        BootstrapOptions opts;
        if (auto b = get_number<std::size_t>(bs["replicates"], "bootstrap.replicates")) opts.replicates = *b;
        if (auto l = get_number<double>(bs["level"], "bootstrap.level")) opts.level = *l;
        if (auto s = get_number<std::uint64_t>(bs["seed"], "bootstrap.seed")) opts.seed = *s;
        cfg.keep_replicates = get_bool(bs["keep_replicates"], "bootstrap.keep_replicates").value_or(false);
        if (opts.replicates > 0) cfg.bootstrap = opts;
    }

    const auto out = root["output"];
    cfg.output = get_string(out["path"], "output.path");
    if (const std::string f = get_string(out["format"], "output.format"); !f.empty()) cfg.format = f;
    return cfg;
}

EstimateConfig load_estimate_config(const std::string& path) {
    const std::string text = read_file(path, "config file");
    return parse_estimate_config(text, std::filesystem::path(path).parent_path().string());
}

json estimate_document(const Dataset& data, const EstimateConfig& config) {
    const StratifiedLaws strata = stratify(data, config.policy);
    const std::vector<AssumptionSet> sets =
        config.assumptions.empty() ? applicable_regimes(strata.marginal.shape()) : config.assumptions;

    json results = json::array();
    for (const AssumptionSet& set : sets) {
        json rec{{"assumptions", to_string(set)}};
        try {
            const RegimeResult r = estimate_regime(strata, set);
            rec["point_identified"] = r.effects.gamma0.point_identified;
            rec["nie"] = interval_json(r.effects.nie);
            rec["pde"] = interval_json(r.effects.pde);
            rec["gamma0"] = interval_json(r.effects.gamma0);
            rec["total_effect"] = number(r.effects.total);
            rec["mean_comparison"] = number(r.effects.mean_comparison);
            rec["mean_baseline"] = number(r.effects.mean_baseline);
            if (r.covariate_candidates) {
                rec["covariate_candidates"] = {
                    {"stratum_average", interval_json(r.covariate_candidates->stratum_average)},
                    {"averaged_inputs", interval_json(r.covariate_candidates->averaged_inputs)}};
            }
            rec["notes"] = r.notes;
            if (config.bootstrap) {
                const auto policy = config.policy;
                const auto boot = weighted_bootstrap_multi(
                    data,
                    [&](const Dataset& d) { return effect_targets(stratify(d, policy), set); }, 3,
                    *config.bootstrap);
                rec["bootstrap"] = {{"replicates", config.bootstrap->replicates},
                                    {"level", config.bootstrap->level},
                                    {"seed", config.bootstrap->seed},
                                    {"failures", boot[0].failures},
                                    {"gamma0", bootstrap_json(boot[0], config.keep_replicates)},
                                    {"pde", bootstrap_json(boot[1], false)},
                                    {"nie", bootstrap_json(boot[2], false)}};
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Internal) throw;
            rec["error"] = error_json(e);
        }
        results.push_back(std::move(rec));
    }

    const DatasetCodecs& k = data.codecs();
    json doc{{"schema_version", kSchemaVersion},
             {"command", "estimate"},
             {"records", data.size()},
             {"total_weight", data.total_weight()},
             {"exposure", {{"baseline", k.exposure.label(kBaseline)},
                           {"comparison", k.exposure.label(kComparison)}}},
             {"r_levels", k.confounders.size()},
             {"m_levels", k.mediator.size()},
             {"y_values", k.outcome.values()},
             {"strata", {{"used", strata.size()}, {"dropped", strata.dropped_strata}}},
             {"results", std::move(results)}};
    return doc;
}

json run_estimate(const EstimateConfig& config) {
    require(!config.input.empty(), ErrorCode::Config, "no input file given");
    require(config.format == "json" || config.format == "csv", ErrorCode::Config,
            "output format must be json or csv");
    const Dataset data = load_csv_dataset(config.input, config.ingest);
    return estimate_document(data, config);
}

StudyConfig parse_study_config(const std::string& toml_text) {
    const toml::table t = parse_toml(toml_text, "study file");
    const auto root = toml::node_view<const toml::node>(t);
    const auto s = t.contains("study") ? root["study"] : root;
    StudyConfig cfg;
    if (auto v = get_number<std::size_t>(s["n"], "n")) cfg.n = *v;
    if (auto v = get_number<std::size_t>(s["repetitions"], "repetitions")) cfg.repetitions = *v;
    if (auto v = get_bool(s["population"], "population")) cfg.population = *v;
    if (auto v = get_number<std::size_t>(s["bootstrap"], "bootstrap")) cfg.bootstrap_replicates = *v;
    if (auto v = get_number<double>(s["level"], "level")) cfg.level = *v;
    if (auto v = get_number<std::uint64_t>(s["seed"], "seed")) cfg.seed = *v;
    cfg.policy = parse_policy(get_string(s["zero_cells"], "zero_cells"));
    cfg.assumptions =
        parse_assumptions(get_strings(s["assumptions"], "assumptions"), parse_map(s["deterministic_map"]));
    return cfg;
}

StudyConfig load_study_config(const std::string& path) {
    return parse_study_config(read_file(path, "study file"));
}

double RegimeStudy::containment_rate() const {
    const std::size_t ok = runs - failures;
    return ok == 0 ? 0.0 : static_cast<double>(contained) / static_cast<double>(ok);
}

double RegimeStudy::coverage_rate() const {
    return bootstrapped == 0 ? 0.0
                             : static_cast<double>(covered_identified) / static_cast<double>(bootstrapped);
}

StudyReport run_study(const WorldSpec& spec, const StudyConfig& config) {
    require(config.population || (config.n >= 1 && config.repetitions >= 1),
            ErrorCode::Config, "study needs n >= 1 and at least one repetition");
    StudyReport report{enumerate_truth(spec, config.policy), {}};
    const double truth = report.truth.gamma0;
    const std::vector<AssumptionSet> sets =
        config.assumptions.empty() ? applicable_regimes(report.truth.population_law.shape())
                                   : config.assumptions;
    constexpr double kTol = 1e-9;

    for (const AssumptionSet& set : sets) {
        RegimeStudy rs;
        rs.assumptions = set;
        bool population_ok = true;
        try {
            rs.population = estimate_gamma0(report.truth.strata, set);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Internal) throw;
            population_ok = false;
        }
        if (config.population) {
            rs.runs = 1;
            if (!population_ok) {
                rs.failures = 1;
            } else if (rs.population.contains(truth, kTol)) {
                rs.contained = 1;
            }
        }
        report.regimes.push_back(std::move(rs));
    }
    if (config.population) return report;

    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t data_seed = Rng::substream(config.seed, 2 * rep).next();
        const Dataset data = sample_dataset(spec, config.n, data_seed);
        std::optional<StratifiedLaws> strata;
        try {
            strata = stratify(data, config.policy);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Internal) throw;
        }
        for (RegimeStudy& rs : report.regimes) {
            ++rs.runs;
            if (!strata) {
                ++rs.failures;
                continue;
            }
            const AssumptionSet set = rs.assumptions;
            try {
                const IntervalEstimate est = estimate_gamma0(*strata, set);
                if (est.contains(truth, kTol)) ++rs.contained;
                if (config.bootstrap_replicates > 0) {
                    BootstrapOptions opts;
                    opts.replicates = config.bootstrap_replicates;
                    opts.level = config.level;
                    opts.seed = Rng::substream(config.seed, 2 * rep + 1).next();
                    opts.threads = config.threads;
                    const auto policy = config.policy;
                    const BootstrapResult b = weighted_bootstrap_ci(
                        data, [&](const Dataset& d) { return estimate_gamma0(stratify(d, policy), set); },
                        opts);
                    ++rs.bootstrapped;
                    if (b.ci_lower <= rs.population.lower + kTol &&
                        rs.population.upper <= b.ci_upper + kTol) {
                        ++rs.covered_identified;
                    }
                    if (b.ci_lower <= truth + kTol && truth <= b.ci_upper + kTol) ++rs.covered_truth;
                }
            } catch (const Error& e) {
                if (e.code() == ErrorCode::Internal) throw;
                ++rs.failures;
            }
        }
    }
    return report;
}

json study_document(const StudyReport& report, const StudyConfig& config) {
    const WorldTruth& t = report.truth;
    json regimes = json::array();
    for (const RegimeStudy& rs : report.regimes) {
        json r{{"assumptions", to_string(rs.assumptions)},
               {"population", interval_json(rs.population)},
               {"population_contains_truth", rs.population.contains(t.gamma0, 1e-9)},
               {"runs", rs.runs},
               {"failures", rs.failures},
               {"containment_rate", rs.containment_rate()}};
        if (rs.bootstrapped > 0) {
            r["bootstrapped"] = rs.bootstrapped;
            r["coverage_rate"] = rs.coverage_rate();
            r["truth_coverage_rate"] =
                static_cast<double>(rs.covered_truth) / static_cast<double>(rs.bootstrapped);
        }
        regimes.push_back(std::move(r));
    }
    return json{{"schema_version", kSchemaVersion},
                {"command", "simulate"},
                {"study", {{"n", config.n},
                           {"repetitions", config.repetitions},
                           {"population", config.population},
                           {"bootstrap", config.bootstrap_replicates},
                           {"level", config.level},
                           {"seed", config.seed}}},
                {"truth", {{"gamma0", t.gamma0},
                           {"te", t.te},
                           {"pde", t.pde},
                           {"nie", t.nie},
                           {"mean_comparison", t.mean_comparison},
                           {"mean_baseline", t.mean_baseline}}},
                {"regimes", std::move(regimes)}};
}

json oracle_document(const WorldSpec& spec) {
    const WorldTruth t = enumerate_truth(spec, ZeroCellPolicy::UniformFallback);
    json strata = json::array();
    for (std::size_t c = 0; c < t.strata.size(); ++c) {
        strata.push_back({{"pattern", t.strata.patterns[c]},
                          {"weight", t.strata.weights[c]},
                          {"law", law_json(t.strata.laws[c])}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"command", "oracle"},
                {"npsem_ie", spec.is_npsem_ie()},
                {"gamma0", t.gamma0},
                {"te", t.te},
                {"pde", t.pde},
                {"nie", t.nie},
                {"mean_comparison", t.mean_comparison},
                {"mean_baseline", t.mean_baseline},
                {"r_cross_joint", t.r_cross_joint},
                {"population_law", law_json(t.population_law)},
                {"strata", std::move(strata)}};
}

std::string estimate_csv(const json& doc) {
    std::ostringstream os;
    os << "assumptions,point_identified,gamma0_lower,gamma0_upper,pde_lower,pde_upper,"
          "nie_lower,nie_upper,total_effect,nie_ci_lower,nie_ci_upper,error\n";
    auto cell = [](const json& v) -> std::string {
        if (v.is_null()) return "";
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        return v.dump();
    };
    for (const auto& r : doc.at("results")) {
        os << r.at("assumptions").get<std::string>() << ',';
        if (r.contains("error")) {
            os << ",,,,,,,,,,\"" << r["error"]["message"].get<std::string>() << "\"\n";
            continue;
        }
        os << cell(r["point_identified"]) << ',' << cell(r["gamma0"]["lower"]) << ','
           << cell(r["gamma0"]["upper"]) << ',' << cell(r["pde"]["lower"]) << ','
           << cell(r["pde"]["upper"]) << ',' << cell(r["nie"]["lower"]) << ','
           << cell(r["nie"]["upper"]) << ',' << cell(r["total_effect"]) << ',';
        if (r.contains("bootstrap")) {
            os << cell(r["bootstrap"]["nie"]["ci_lower"]) << ','
               << cell(r["bootstrap"]["nie"]["ci_upper"]);
        } else {
            os << ',';
        }
        os << ",\n";
    }
    return os.str();
}

json error_document(const Error& e) {
    return json{{"schema_version", kSchemaVersion}, {"error", error_json(e)}};
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Config:
        case ErrorCode::MissingColumn:
        case ErrorCode::Parse:
        case ErrorCode::Io:
            return 2;
        default:
            return 3;
    }
}

std::string serialize(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace medbounds
