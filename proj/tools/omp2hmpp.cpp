#include "omp2hmpp/driver.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using omp2hmpp::RunConfig;
    CLI::App app{"OpenMP to HMPP source-to-source translator and variant explorer"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string out_dir = "out";
    std::string input, executor, replay, baseline;
    double ops = 0;

    auto* transform = app.add_subcommand("transform", "emit every variant of an annotated C file");
    transform->add_option("input", input, "annotated C source")->required()->check(CLI::ExistingFile);

    auto* explore = app.add_subcommand("explore", "emit, run and rank the variants");
    explore->add_option("input", input, "annotated C source")->check(CLI::ExistingFile);
    explore->add_option("--executor", executor, "executor config (simulated or shell)")->check(CLI::ExistingFile);
    explore->add_option("--reps", cfg.repetitions, "runs per variant; the median is kept")->check(CLI::PositiveNumber);
    explore->add_option("--replay", replay, "CSV of recorded measurements used instead of running")
        ->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "speedup, GOPS/W and Pareto data from a results CSV");
    report->add_option("csv", input, "results CSV")->required()->check(CLI::ExistingFile);

    for (auto* sub : {transform, explore}) {
        sub->add_option("--cap", cfg.cap, "maximum number of variants")->check(CLI::PositiveNumber);
        sub->add_option("--block", cfg.blocks, "pragma line of a check block to vary (repeatable)");
    }
    for (auto* sub : {transform, explore, report}) sub->add_option("--out,-o", out_dir, "output directory");
    for (auto* sub : {explore, report}) {
        sub->add_option("--baseline", baseline, "baseline signature, e.g. \"0, 0, 0\"");
        sub->add_option("--ops", ops, "operation count for GOPS/W")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : omp2hmpp::kExitUsage;
    }

    if (*transform) cfg.command = RunConfig::Command::Transform;
    if (*explore) cfg.command = RunConfig::Command::Explore;
    if (*report) cfg.command = RunConfig::Command::Report;
    if (*explore && input.empty() && replay.empty()) {
        std::cerr << "error: explore needs an input file or --replay\n";
        return omp2hmpp::kExitUsage;
    }
    cfg.input = input;
    cfg.out_dir = out_dir;
    if (!executor.empty()) cfg.executor = executor;
    if (!replay.empty()) cfg.replay = replay;
    cfg.baseline = baseline;
    if (ops > 0) cfg.ops = ops;
    return omp2hmpp::run_command(cfg, std::cout, std::cerr);
}
