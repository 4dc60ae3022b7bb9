/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/experiments.h"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    pmrsim::RunConfig config;
    std::string scenario;
    std::string templateName;
    std::string experiment;

    CLI::App app{"pmrsim: group-call delivery over LTE eMBMS, discrete-event simulator"};
    auto* scenarioOpt = app.add_option("--scenario", scenario, "Scenario file (YAML)");
    auto* templateOpt = app.add_option("--template", templateName, "Preset scenario")
                            ->check(CLI::IsMember(pmrsim::templateNames()));
    scenarioOpt->excludes(templateOpt);
    app.add_option("--seed", config.seed, "Random seed")->capture_default_str();
    app.add_option("--experiment", experiment, "Experiment to run")
        ->check(CLI::IsMember({"fig2", "fig4", "fig5", "req-matrix"}));
    app.add_option("--out", config.outputDir, "Output directory (PMRSIM_OUT overrides)")->capture_default_str();
    app.add_option("--jobs", config.jobs, "Parallel engine instances for sweeps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--set", config.overrides, "Override a config value, KEY=VALUE (repeatable)");
    app.add_flag("--validate", config.validateOnly, "Validate the configuration and exit");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : pmrsim::kExitConfigError;
    }

    if (!scenario.empty())
    {
        config.scenarioPath = scenario;
    }
    if (!templateName.empty())
    {
        config.templateName = templateName;
    }
    if (!experiment.empty())
    {
        config.experiment = experiment;
    }
    return pmrsim::runExperiment(config, std::cout, std::cerr);
}
