#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "skynoma/skynoma.hpp"

namespace {

using namespace skynoma;

enum ExitCode { ok = 0, config_error = 2, non_convergence = 3, io_error = 4 };

void print_crosspoint(const CrosspointResult& r) {
    std::cout << to_string(r.kind) << ',' << format_sig10(r.value) << ',' << (r.feasible ? "feasible" : "infeasible")
              << ',' << to_string(r.branch);
    if (r.kind == CrosspointKind::a2c_dt || r.kind == CrosspointKind::a2c_rt)
        std::cout << ',' << format_sig10(r.lower) << ',' << format_sig10(r.upper);
    else
        std::cout << ",,";
    std::cout << '\n';
}

int cmd_validate(const std::string& file) {
    const SystemConfig cfg = load_config(file);
    std::cout << canonical_text(cfg);
    std::cout << "# config_hash = " << config_hash(cfg) << '\n';
    return ok;
}

int cmd_crosspoints(const std::string& file) {
    const SystemConfig cfg = load_config(file);
    const auto& n = cfg.noma;
    std::cout << "kind,value,status,binding,a1_lower,a1_upper\n";
    for (Scheme s : {Scheme::dt, Scheme::rt}) {
        print_crosspoint(crosspoint_rate_user1(s, n.a1));
        print_crosspoint(crosspoint_power_user1(s, n.r1));
        print_crosspoint(crosspoint_rate_user2(s, n.a1, n.r1, n.gamma));
        print_crosspoint(crosspoint_power_user2(s, n.r1, n.r2, n.gamma));
        print_crosspoint(crosspoint_gamma(s, n.a1, n.r2));
    }
    print_crosspoint(crosspoint_rate_user1_ht(cfg));
    return ok;
}

int cmd_run(const std::string& file, const std::string& engine, std::optional<std::uint64_t> trials,
            std::optional<std::uint64_t> seed, const std::string& out, std::optional<unsigned> workers) {
    ExperimentPlan plan = load_plan(file);
    if (!engine.empty()) plan.engines = detail::parse_engines(engine);
    if (trials) plan.trials = *trials;
    if (seed) plan.seed = *seed;
    if (!out.empty()) plan.output_dir = out;
    if (workers) plan.workers = std::max(1u, *workers);
    const auto csv = run_experiment(plan);
    std::cout << csv.string() << '\n';
    return ok;
}

int cmd_summarize(const std::string& dir, const std::string& objective, const std::string& user, double tie) {
    SummaryOptions opt;
    opt.minimize_outage = objective == "op";
    opt.user = user == "d1" ? User::d1 : User::d2;
    opt.tie_tolerance = tie;
    std::filesystem::path p(dir);
    if (std::filesystem::is_directory(p)) p /= "results.csv";
    std::cout << summarize_best(read_csv(p), opt);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outage and rate analysis of aerial-aided mmWave NOMA vehicular links"};
    app.require_subcommand(1);

    std::string plan_file, engine, out_dir;
    std::optional<std::uint64_t> trials, seed;
    std::optional<unsigned> workers;
    auto* run = app.add_subcommand("run", "Evaluate a sweep plan and write results.csv and plot.py");
    run->add_option("plan", plan_file, "Plan file")->required();
    run->add_option("--engine", engine, "analytical, mc or both")
        ->check(CLI::IsMember({"analytical", "mc", "both"}));
    run->add_option("--trials", trials, "Monte-Carlo trials per sweep point");
    run->add_option("--seed", seed, "Base seed");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--workers", workers, "Monte-Carlo worker threads");

    std::string config_file;
    auto* val = app.add_subcommand("validate", "Check a config file and print it fully defaulted");
    val->add_option("config", config_file, "Config file")->required();

    auto* cross = app.add_subcommand("crosspoints", "Print the NOMA/OMA cross-points of a config");
    cross->add_option("config", config_file, "Config file")->required();

    std::string results_dir, objective = "op", user = "d1";
    double tie = 1e-3;
    auto* sum = app.add_subcommand("summarize", "Best platform and scheme per sweep cell");
    sum->add_option("results", results_dir, "Results directory or CSV")->required();
    sum->add_option("--objective", objective, "op or aar")->check(CLI::IsMember({"op", "aar"}));
    sum->add_option("--user", user, "d1 or d2")->check(CLI::IsMember({"d1", "d2"}));
    sum->add_option("--tie-tolerance", tie, "Absolute tolerance for ties")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    try {
        if (*run) return cmd_run(plan_file, engine, trials, seed, out_dir, workers);
        if (*val) return cmd_validate(config_file);
        if (*cross) return cmd_crosspoints(config_file);
        if (*sum) return cmd_summarize(results_dir, objective, user, tie);
    } catch (const InvalidConfig& e) {
        for (const auto& v : e.violations()) std::cerr << "error: " << v << '\n';
        return config_error;
    } catch (const NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << '\n';
        return non_convergence;
    } catch (const DegenerateLink& e) {
        std::cerr << "error: " << e.what() << '\n';
        return config_error;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io_error;
    }
    return ok;
}
