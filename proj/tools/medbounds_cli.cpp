#include "medbounds/app.hpp"
#include "medbounds/cross_world_lp.hpp"
#include "medbounds/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace medbounds;

namespace {

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write output file '" + path + "'");
    out << text;
}

struct EstimateFlags {
    std::string config;
    std::string input;
    std::string exposure, mediator, outcome, weight;
    std::vector<std::string> confounders, covariates;
    std::string baseline, comparison;
    std::vector<double> y_values;
    std::vector<std::string> assumptions;
    std::vector<std::size_t> map;
    std::string zero_cells;
    std::optional<std::size_t> replicates;
    std::optional<double> level;
    std::optional<std::uint64_t> seed;
    bool keep_replicates = false;
    std::string output, format;
};

EstimateConfig build_estimate_config(const EstimateFlags& f) {
    EstimateConfig cfg = f.config.empty() ? EstimateConfig{} : load_estimate_config(f.config);
    ColumnRoles& roles = cfg.ingest.roles;
    if (!f.input.empty()) cfg.input = f.input;
    if (!f.exposure.empty()) roles.exposure = f.exposure;
    if (!f.mediator.empty()) roles.mediator = f.mediator;
    if (!f.outcome.empty()) roles.outcome = f.outcome;
    if (!f.weight.empty()) roles.weight = f.weight;
    if (!f.confounders.empty()) roles.confounders = f.confounders;
    if (!f.covariates.empty()) roles.covariates = f.covariates;
    if (!f.baseline.empty()) cfg.ingest.baseline_label = f.baseline;
    if (!f.comparison.empty()) cfg.ingest.comparison_label = f.comparison;
    if (!f.y_values.empty()) cfg.ingest.y_values = f.y_values;
    if (!f.assumptions.empty()) {
        cfg.assumptions.clear();
        for (const auto& name : f.assumptions) {
            AssumptionSet set = parse_assumption_set(name);
            if (set.kind == AssumptionSet::Kind::DeterministicCrossWorldR) {
                require(!f.map.empty(), ErrorCode::Config,
                        "deterministic-cross-world-r needs --deterministic-map");
                set.map = f.map;
            }
            cfg.assumptions.push_back(std::move(set));
        }
    }
    if (f.zero_cells == "uniform") cfg.policy = ZeroCellPolicy::UniformFallback;
    if (f.zero_cells == "error") cfg.policy = ZeroCellPolicy::Error;
    if (f.replicates || f.level || f.seed) {
        BootstrapOptions opts = cfg.bootstrap.value_or(BootstrapOptions{});
        if (f.replicates) opts.replicates = *f.replicates;
        if (f.level) opts.level = *f.level;
        if (f.seed) opts.seed = *f.seed;
        cfg.bootstrap = opts;
        if (opts.replicates == 0) cfg.bootstrap.reset();
    }
    if (f.keep_replicates) cfg.keep_replicates = true;
    if (!f.output.empty()) cfg.output = f.output;
    if (!f.format.empty()) cfg.format = f.format;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounds and point estimates for natural direct and indirect effects"};
    app.require_subcommand(1);

    EstimateFlags ef;
    auto* est = app.add_subcommand("estimate", "Estimate effects from a CSV file");
    est->add_option("-c,--config", ef.config, "TOML run configuration");
    est->add_option("-i,--input", ef.input, "CSV data file");
    est->add_option("--exposure", ef.exposure, "Exposure column");
    est->add_option("--mediator", ef.mediator, "Mediator column");
    est->add_option("--outcome", ef.outcome, "Outcome column");
    est->add_option("--weight", ef.weight, "Record weight column");
    est->add_option("--confounder", ef.confounders, "Exposure-induced confounder column (repeatable)");
    est->add_option("--covariate", ef.covariates, "Baseline covariate column (repeatable)");
    est->add_option("--baseline", ef.baseline, "Exposure label of the baseline level");
    est->add_option("--comparison", ef.comparison, "Exposure label of the comparison level");
    est->add_option("--y-values", ef.y_values, "Outcome support values");
    est->add_option("-a,--assumption", ef.assumptions, "Assumption set (repeatable)");
    est->add_option("--deterministic-map", ef.map, "Map r* -> r for deterministic-cross-world-r");
    est->add_option("--zero-cells", ef.zero_cells, "error or uniform")
        ->check(CLI::IsMember({"error", "uniform"}));
    est->add_option("-B,--bootstrap", ef.replicates, "Bootstrap replicates (0 disables)");
    est->add_option("--level", ef.level, "Confidence level");
    est->add_option("--seed", ef.seed, "Bootstrap master seed");
    est->add_flag("--keep-replicates", ef.keep_replicates, "Include replicate endpoints");
    est->add_option("-o,--output", ef.output, "Output path (default stdout)");
    est->add_option("--format", ef.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    std::string world_path, study_path, sim_output, sample_path;
    std::optional<std::size_t> sim_n, sim_reps, sim_boot;
    std::optional<double> sim_level;
    std::optional<std::uint64_t> sim_seed;
    bool sim_population = false;
    std::vector<std::string> sim_assumptions;
    auto* sim = app.add_subcommand("simulate", "Simulation study against a world's exact truth");
    sim->add_option("-w,--world", world_path, "World TOML file")->required();
    sim->add_option("-s,--study", study_path, "Study TOML file");
    sim->add_option("-n,--n", sim_n, "Records per simulated dataset");
    sim->add_option("-r,--repetitions", sim_reps, "Simulated datasets");
    sim->add_option("-B,--bootstrap", sim_boot, "Bootstrap replicates per dataset");
    sim->add_option("--level", sim_level, "Confidence level");
    sim->add_option("--seed", sim_seed, "Master seed");
    sim->add_flag("--population", sim_population, "Use the population law instead of samples");
    sim->add_option("-a,--assumption", sim_assumptions, "Assumption set (repeatable)");
    sim->add_option("--write-sample", sample_path, "Write one sampled dataset as CSV and stop");
    sim->add_option("-o,--output", sim_output, "Output path (default stdout)");

    std::string oracle_world, oracle_output;
    auto* orc = app.add_subcommand("oracle", "Exact counterfactual quantities of a world");
    orc->add_option("-w,--world", oracle_world, "World TOML file")->required();
    orc->add_option("-o,--output", oracle_output, "Output path (default stdout)");

    EstimateFlags lf;
    std::string lp_world, lp_output;
    auto* lpd = app.add_subcommand("lp-dump", "Print the cross-world linear program");
    lpd->add_option("-w,--world", lp_world, "World TOML file (population law)");
    lpd->add_option("-c,--config", lf.config, "TOML run configuration");
    lpd->add_option("-i,--input", lf.input, "CSV data file");
    lpd->add_option("--exposure", lf.exposure, "Exposure column");
    lpd->add_option("--mediator", lf.mediator, "Mediator column");
    lpd->add_option("--outcome", lf.outcome, "Outcome column");
    lpd->add_option("--confounder", lf.confounders, "Exposure-induced confounder column");
    lpd->add_option("--baseline", lf.baseline, "Baseline exposure label");
    lpd->add_option("--comparison", lf.comparison, "Comparison exposure label");
    lpd->add_option("-o,--output", lp_output, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << serialize(error_document(Error(ErrorCode::Config, e.what())));
        return 2;
    }

    try {
        if (*est) {
            const EstimateConfig cfg = build_estimate_config(ef);
            const auto doc = run_estimate(cfg);
            emit(cfg.format == "csv" ? estimate_csv(doc) : serialize(doc), cfg.output);
        } else if (*sim) {
            const WorldSpec world = load_world(world_path);
            StudyConfig cfg = study_path.empty() ? StudyConfig{} : load_study_config(study_path);
            if (sim_n) cfg.n = *sim_n;
            if (sim_reps) cfg.repetitions = *sim_reps;
            if (sim_boot) cfg.bootstrap_replicates = *sim_boot;
            if (sim_level) cfg.level = *sim_level;
            if (sim_seed) cfg.seed = *sim_seed;
            if (sim_population) cfg.population = true;
            if (!sim_assumptions.empty()) {
                cfg.assumptions.clear();
                for (const auto& name : sim_assumptions) {
                    cfg.assumptions.push_back(parse_assumption_set(name));
                }
            }
            if (!sample_path.empty()) {
                std::ofstream out(sample_path);
                if (!out) fail(ErrorCode::Io, "cannot write sample file '" + sample_path + "'");
                write_csv_dataset(out, sample_dataset(world, cfg.n, cfg.seed));
                return 0;
            }
            emit(serialize(study_document(run_study(world, cfg), cfg)), sim_output);
        } else if (*orc) {
            emit(serialize(oracle_document(load_world(oracle_world))), oracle_output);
        } else if (*lpd) {
            MediationLaw law = [&] {
                if (!lp_world.empty()) return enumerate_truth(load_world(lp_world)).population_law;
                const EstimateConfig cfg = build_estimate_config(lf);
                require(!cfg.input.empty(), ErrorCode::Config, "lp-dump needs --world or --input");
                return fit_laws(load_csv_dataset(cfg.input, cfg.ingest), std::nullopt, cfg.policy);
            }();
            emit(lp_text(build_cross_world_lp(law)), lp_output);
        }
    } catch (const Error& e) {
        std::cerr << serialize(error_document(e));
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << serialize(error_document(Error(ErrorCode::Internal, e.what())));
        return 3;
    }
    return 0;
}
