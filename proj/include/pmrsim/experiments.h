/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_EXPERIMENTS_H
#define PMRSIM_EXPERIMENTS_H

#include "pmrsim/config.h"
#include "pmrsim/sim.h"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pmrsim
{

/// Version of every CSV layout written below; bumped on any column change.
constexpr int kCsvSchemaVersion = 1;

struct Fig2Row
{
    int nGroups{0};
    SyncMode mode{SyncMode::SingleCell};
    ServiceKind profile{ServiceKind::Voice};
    int bandwidthMhz{10};
    double throughputKbps{0};
};

/// Aggregate multicast throughput for 1..fig2MaxGroups groups, per profile, bandwidth and mode.
std::vector<Fig2Row> fig2Sweep(const Scenario& scenario);

struct Fig4Run
{
    TimeMs mcchPeriodMs{0};
    BearerOption option{BearerOption::PreEstablished};
    RunResult result;
};

/**
 * Runs the scenario once per MCCH period and bearer option (pre-established or on-demand
 * MBMS bearer). All runs share the seed, so the i-th call of every run has the same arrival
 * and startup draw. Up to jobs runs execute in parallel.
 */
std::vector<Fig4Run> fig4Runs(const Scenario& scenario, int jobs);

struct Fig5Row
{
    int nMembers{0};
    double unicastEff{0};
    double multicastEff{0};
    double envelope{0};
    int nStar{0};
    Transport realized{Transport::Unicast};
    double realizedEff{0};
};

/**
 * Drives the first group of a dynamic-activation scenario through ULI counts 1..N in the
 * first cell of its area (N = members in that cell) and records the transport the
 * controller settled on after each count, together with both efficiency curves.
 */
std::vector<Fig5Row> fig5Sweep(const Scenario& scenario);

struct ReqMatrixOutcome
{
    ScenarioSummary summary;
    RequirementReport report;
    RunResult run;
};

ReqMatrixOutcome reqMatrix(const Scenario& scenario);

/// Measurements of a finished run, as the requirement checker reads them.
ScenarioSummary summarize(const Scenario& scenario, const RunResult& run);

std::string fig2Csv(const std::vector<Fig2Row>& rows);
/// Per-call breakdown of the runs of one MCCH period.
std::string fig4Csv(const std::vector<const Fig4Run*>& runs, TimeMs requirementMs);
std::string fig5Csv(const std::vector<Fig5Row>& rows);
std::string decisionLogCsv(const MetricsSink& metrics);
std::string requirementCsv(const RequirementReport& report);
std::string requirementTable(const RequirementReport& report);

struct RunConfig
{
    std::optional<std::string> scenarioPath;
    std::optional<std::string> templateName;
    std::uint64_t seed{0};
    std::string outputDir{"pmrsim-out"};
    std::optional<std::string> experiment;
    std::vector<std::string> overrides;
    int jobs{1};
    bool validateOnly{false};
};

/// Exit status contract of the command-line tool.
enum ExitStatus : int
{
    kExitOk = 0,
    kExitRequirementFailure = 1,
    kExitConfigError = 2,
};

/**
 * Loads the scenario, runs the experiment (or a plain simulation) and writes its artifacts to
 * config.outputDir. Progress goes to out, diagnostics to err.
 */
int runExperiment(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace pmrsim

#endif // PMRSIM_EXPERIMENTS_H
