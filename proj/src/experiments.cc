/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/experiments.h"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

namespace pmrsim
{

namespace
{

std::string_view modeName(SyncMode mode)
{
    return mode == SyncMode::Sfn ? "SFN" : "SC";
}

ResourceModel withBandwidth(ResourceModel model, int bandwidthMhz)
{
    model.bandwidthMhz = bandwidthMhz;
    model.unitsPerSubframe = unitsForBandwidth(bandwidthMhz);
    return model;
}

void writeFile(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
    }
    out << content;
    if (!out)
    {
        throw Error(ErrorCode::IoError, fmt::format("write to {} failed", path.string()));
    }
}

std::string_view arrivalModeName(ArrivalMode m)
{
    return m == ArrivalMode::Poisson ? "poisson" : "once";
}

std::string_view durationModeName(DurationMode m)
{
    switch (m)
    {
    case DurationMode::Hold:
        return "hold";
    case DurationMode::Fixed:
        return "fixed";
    case DurationMode::Exponential:
        return "exponential";
    }
    return "?";
}

/// Header lines shared by every summary: schema version and the modelling assumptions in force.
std::string summaryHeader(const Scenario& s, std::string_view experiment)
{
    std::string out;
    out += fmt::format("csv_schema_version={}\n", kCsvSchemaVersion);
    out += fmt::format("experiment={}\n", experiment);
    out += fmt::format("scenario={}\n", s.name);
    out += fmt::format("seed={}\n", s.seed);
    out += fmt::format("assumption.policy={}\n", toString(s.policy.kind));
    out += fmt::format("assumption.uli_source={}\n", toString(s.policy.uliSource));
    out += fmt::format("assumption.uli_interval_ms={}\n", s.policy.uliIntervalMs);
    out += fmt::format("assumption.loss_threshold={}\n", s.policy.lossThreshold);
    out += fmt::format("assumption.switch_hysteresis={}\n", s.policy.switchHysteresis);
    out += fmt::format("assumption.arrivals={}\n", arrivalModeName(s.arrivals.mode));
    out += fmt::format("assumption.mean_interarrival_ms={}\n", s.arrivals.meanInterarrivalMs);
    out += fmt::format("assumption.call_duration={}\n", durationModeName(s.arrivals.duration));
    out += fmt::format("assumption.mean_call_duration_ms={}\n", s.arrivals.meanDurationMs);
    out += fmt::format("assumption.mcch_period_ms={}\n", s.schedule.modificationPeriodMs);
    out += fmt::format("assumption.overload_penalty={}\n", s.model.overloadPenalty);
    return out;
}

std::string runSummary(const RunResult& r)
{
    const MetricsSink& m = r.metrics;
    std::string out;
    out += fmt::format("events={}\n", r.events);
    out += fmt::format("end_ms={}\n", r.endMs);
    out += fmt::format("call_requests={}\n", m.callRequests);
    out += fmt::format("calls_started={}\n", m.callsStarted);
    out += fmt::format("calls_rejected={}\n", m.callsRejected);
    out += fmt::format("calls_completed={}\n", m.callsCompleted);
    out += fmt::format("handovers={}\n", m.handovers);
    out += fmt::format("loss_reports={}\n", m.lossReports);
    out += fmt::format("floor_denials={}\n", m.floorDenials);
    out += fmt::format("core_network_messages={}\n", m.coreNetworkMessages);
    out += fmt::format("invariant.events_checked={}\n", m.invariants.eventsChecked);
    out += fmt::format("invariant.max_drift_units={}\n", m.invariants.maxDrift);
    out += fmt::format("invariant.path_violations={}\n", m.invariants.pathViolations);
    out += fmt::format("invariant.zero_member_violations={}\n", m.invariants.zeroMemberViolations);
    return out;
}

std::string setupRows(const std::vector<SetupRecord>& setups, TimeMs requirementMs)
{
    std::string out;
    for (const SetupRecord& s : setups)
    {
        const SetupLatency& l = s.latency;
        out += fmt::format("{},{},{},{},{},{},{}\n",
                           s.callId,
                           toString(l.option),
                           l.startupMs,
                           l.bearerMs,
                           l.mcchWaitMs,
                           l.totalMs,
                           l.meets(requirementMs) ? 1 : 0);
    }
    return out;
}

constexpr std::string_view kSetupHeader = "call_id,option,startup_ms,bearer_ms,mcch_wait_ms,total_ms,meets_300ms\n";

} // namespace

std::vector<Fig2Row> fig2Sweep(const Scenario& scenario)
{
    std::vector<Fig2Row> rows;
    const ExperimentParams& e = scenario.experiment;
    for (const ServiceProfile& profile : {ServiceProfile::voice(), ServiceProfile::video()})
    {
        for (int bw : e.fig2Bandwidths)
        {
            const ResourceModel model = withBandwidth(scenario.model, bw);
            for (SyncMode mode : {SyncMode::SingleCell, SyncMode::Sfn})
            {
                const int cluster = mode == SyncMode::Sfn ? e.fig2SfnCluster : 1;
                for (int n = 1; n <= e.fig2MaxGroups; ++n)
                {
                    rows.push_back({n, mode, profile.kind, bw, systemThroughput(n, mode, profile, model, cluster)});
                }
            }
        }
    }
    return rows;
}

std::vector<Fig4Run> fig4Runs(const Scenario& scenario, int jobs)
{
    if (scenario.policy.kind != PolicyKind::StaticActivation)
    {
        throw Error(ErrorCode::ValidationError, "fig4 compares MBMS bearer options and needs policy.kind static");
    }
    std::vector<Fig4Run> runs;
    for (TimeMs period : scenario.experiment.fig4McchPeriods)
    {
        for (BearerOption option : {BearerOption::PreEstablished, BearerOption::DynamicBearer})
        {
            runs.push_back({period, option, {}});
        }
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(runs.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++)
        {
            try
            {
                Scenario s = scenario;
                s.schedule.modificationPeriodMs = runs[i].mcchPeriodMs;
                s.preEstablishedMbms = runs[i].option == BearerOption::PreEstablished;
                runs[i].result = run(s);
            }
            catch (...)
            {
                failures[i] = std::current_exception();
            }
        }
    };
    const int n = std::clamp(jobs, 1, static_cast<int>(runs.size()));
    if (n == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t)
        {
            pool.emplace_back(worker);
        }
    }
    for (const auto& f : failures)
    {
        if (f)
        {
            std::rethrow_exception(f);
        }
    }
    return runs;
}

std::vector<Fig5Row> fig5Sweep(const Scenario& scenario)
{
    if (scenario.policy.kind != PolicyKind::DynamicActivation)
    {
        throw Error(ErrorCode::ValidationError, "fig5 sweeps the dynamic activation and needs policy.kind dynamic");
    }
    if (scenario.groups.empty())
    {
        throw Error(ErrorCode::ValidationError, "fig5 needs at least one group");
    }
    Simulator sim(scenario);
    GcseController& gcse = sim.controller();
    const GroupId g = sim.groupIds().front();
    const GroupCall& group = gcse.group(g);
    if (!group.area)
    {
        throw Error(ErrorCode::ValidationError, "fig5 needs the group to have an MBMS area");
    }
    const MbmsArea& area = gcse.network().area(*group.area);
    const CellId cell = *area.cells.begin();

    std::vector<int> qualities;
    for (UeId ue : gcse.membersInCell(g, cell))
    {
        qualities.push_back(gcse.network().ue(ue).channelQuality);
    }
    if (qualities.empty())
    {
        throw Error(ErrorCode::NoMembers, fmt::format("group has no members in cell {}", cell.str()));
    }

    TimeMs now = 0;
    std::vector<Effect> pending;
    // Runs every follow-up of the controller to completion, in time order.
    auto settle = [&] {
        while (true)
        {
            for (const Effect& fx : gcse.takeOutputs().effects)
            {
                if (fx.kind != EffectKind::UliReport)
                {
                    pending.push_back(fx);
                }
            }
            if (pending.empty())
            {
                return;
            }
            auto first = std::min_element(pending.begin(), pending.end(), [](const Effect& a, const Effect& b) {
                return a.atMs < b.atMs;
            });
            const Effect fx = *first;
            pending.erase(first);
            now = std::max(now, fx.atMs);
            if (fx.kind == EffectKind::BearerComplete)
            {
                gcse.onBearerComplete(fx.bearer, now);
            }
            else
            {
                gcse.onMcchBoundary(fx.bearer, now);
            }
        }
    };

    gcse.startGroupCall(g, now, scenario.budget.callStartupMinMs);
    settle();
    const int nStar = gcse.cellThreshold(g, cell).value();

    std::vector<Fig5Row> rows;
    for (int n = 1; n <= static_cast<int>(qualities.size()); ++n)
    {
        now += scenario.policy.uliIntervalMs;
        UliReport report;
        report.group = g;
        report.source = scenario.policy.uliSource;
        report.counts[cell] = n;
        gcse.handleUli(report, now);
        settle();

        Fig5Row row;
        row.nMembers = n;
        row.unicastEff = spectralEfficiency(n, Transport::Unicast, group.profile, qualities, area, scenario.model);
        row.multicastEff = spectralEfficiency(n, Transport::Multicast, group.profile, qualities, area, scenario.model);
        row.envelope = std::max(row.unicastEff, row.multicastEff);
        row.nStar = nStar;
        const TransportState& ts = gcse.group(g).perCellTransport.at(cell);
        row.realized = ts.mode == TransportMode::MulticastActive ? Transport::Multicast : Transport::Unicast;
        row.realizedEff = row.realized == Transport::Multicast ? row.multicastEff : row.unicastEff;
        rows.push_back(row);
    }
    return rows;
}

ScenarioSummary summarize(const Scenario& scenario, const RunResult& run)
{
    ScenarioSummary s;
    const MetricsSink& m = run.metrics;
    if (!m.setupLatencies.empty())
    {
        TimeMs worst = 0;
        for (const SetupRecord& r : m.setupLatencies)
        {
            worst = std::max(worst, r.latency.totalMs);
        }
        s.setupP100Ms = worst;
    }
    s.admittedGroups = static_cast<int>(m.admittedGroups.size());
    s.areaUsers = static_cast<int>(m.servedUes.size());
    if (!scenario.groups.empty())
    {
        std::size_t largest = 0;
        for (const GroupSpec& g : scenario.groups)
        {
            largest = std::max(largest, g.members.size());
        }
        s.maxGroupSize = static_cast<int>(largest);
    }
    if (!scenario.cells.empty())
    {
        int bw = scenario.cells.front().bandwidthMhz;
        for (const Cell& c : scenario.cells)
        {
            bw = std::min(bw, c.bandwidthMhz);
        }
        s.bandwidthMhz = bw;
    }
    return s;
}

ReqMatrixOutcome reqMatrix(const Scenario& scenario)
{
    ReqMatrixOutcome o;
    o.run = run(scenario);
    o.summary = summarize(scenario, o.run);
    RequirementMatrix matrix;
    matrix.maxSetupMs = scenario.budget.requirementMs;
    o.report = checkRequirements(o.summary, matrix);
    return o;
}

std::string fig2Csv(const std::vector<Fig2Row>& rows)
{
    std::string out = "n_groups,mode,profile,bandwidth,throughput_kbps\n";
    for (const Fig2Row& r : rows)
    {
        out += fmt::format("{},{},{},{},{:.3f}\n", r.nGroups, modeName(r.mode), toString(r.profile), r.bandwidthMhz, r.throughputKbps);
    }
    return out;
}

std::string fig4Csv(const std::vector<const Fig4Run*>& runs, TimeMs requirementMs)
{
    std::string out(kSetupHeader);
    for (const Fig4Run* r : runs)
    {
        out += setupRows(r->result.metrics.setupLatencies, requirementMs);
    }
    return out;
}

std::string fig5Csv(const std::vector<Fig5Row>& rows)
{
    std::string out = "n_members,unicast_eff,multicast_eff,envelope,N*\n";
    for (const Fig5Row& r : rows)
    {
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", r.nMembers, r.unicastEff, r.multicastEff, r.envelope, r.nStar);
    }
    return out;
}

std::string decisionLogCsv(const MetricsSink& metrics)
{
    std::string out = "timestamp_ms,group_id,cell_id,decision,trigger,member_count\n";
    for (const DecisionRecord& d : metrics.switchEvents)
    {
        out += fmt::format("{},{},{},{},{},{}\n", d.timestampMs, d.group.value, d.cell.value, d.decision, d.trigger, d.memberCount);
    }
    return out;
}

std::string requirementCsv(const RequirementReport& report)
{
    std::string out = "row,comparator,threshold,measured,status\n";
    for (const RequirementFinding& f : report.findings)
    {
        out += fmt::format("{},{},{},{},{}\n",
                           f.row,
                           f.comparator,
                           f.threshold,
                           f.measured ? fmt::format("{}", *f.measured) : std::string(),
                           toString(f.status));
    }
    return out;
}

std::string requirementTable(const RequirementReport& report)
{
    std::string out = fmt::format("{:<24} {:>4} {:>10} {:>10}  {}\n", "requirement", "", "threshold", "measured", "status");
    for (const RequirementFinding& f : report.findings)
    {
        out += fmt::format("{:<24} {:>4} {:>10} {:>10}  {}\n",
                           f.row,
                           f.comparator,
                           f.threshold,
                           f.measured ? fmt::format("{}", *f.measured) : std::string("-"),
                           toString(f.status));
    }
    out += fmt::format("overall: {}\n", report.passed() ? "PASS" : "FAIL");
    return out;
}

int runExperiment(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try
    {
        if (config.scenarioPath.has_value() == config.templateName.has_value())
        {
            throw Error(ErrorCode::ConfigError, "exactly one of --scenario and --template is required");
        }
        LoadOptions options;
        options.overrides = config.overrides;
        options.seed = config.seed;

        if (config.validateOnly)
        {
            const std::vector<ConfigIssue> issues =
                config.scenarioPath
                    ? validateConfig(*config.scenarioPath, options)
                    : validateConfigText(templateText(*config.templateName), fmt::format("template:{}", *config.templateName), options);
            for (const ConfigIssue& i : issues)
            {
                err << i.str() << '\n';
            }
            if (issues.empty())
            {
                out << "ok\n";
                return kExitOk;
            }
            return kExitConfigError;
        }

        const Scenario scenario =
            config.scenarioPath ? loadScenario(*config.scenarioPath, options) : loadTemplate(*config.templateName, options);

        std::filesystem::path dir = config.outputDir;
        if (const char* env = std::getenv("PMRSIM_OUT"); env != nullptr && *env != '\0')
        {
            dir = env;
        }
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
        {
            throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
        }

        const std::string experiment = config.experiment.value_or("run");
        std::string summary = summaryHeader(scenario, experiment);
        int status = kExitOk;

        if (experiment == "fig2")
        {
            const auto rows = fig2Sweep(scenario);
            writeFile(dir / "fig2.csv", fig2Csv(rows));
            for (const ServiceProfile& p : {ServiceProfile::voice(), ServiceProfile::video()})
            {
                for (int bw : scenario.experiment.fig2Bandwidths)
                {
                    const ResourceModel m = withBandwidth(scenario.model, bw);
                    summary += fmt::format("saturation.{}.{}mhz.SC={}\n", toString(p.kind), bw, maxMulticastGroups(SyncMode::SingleCell, p, m, 1));
                    summary += fmt::format("saturation.{}.{}mhz.SFN={}\n",
                                           toString(p.kind),
                                           bw,
                                           maxMulticastGroups(SyncMode::Sfn, p, m, scenario.experiment.fig2SfnCluster));
                }
            }
            out << fmt::format("fig2: {} rows\n", rows.size());
        }
        else if (experiment == "fig4")
        {
            const auto runs = fig4Runs(scenario, config.jobs);
            for (TimeMs period : scenario.experiment.fig4McchPeriods)
            {
                std::vector<const Fig4Run*> group;
                for (const Fig4Run& r : runs)
                {
                    if (r.mcchPeriodMs == period)
                    {
                        group.push_back(&r);
                    }
                }
                writeFile(dir / fmt::format("fig4_mcch{}.csv", period), fig4Csv(group, scenario.budget.requirementMs));
            }
            for (const Fig4Run& r : runs)
            {
                const auto& setups = r.result.metrics.setupLatencies;
                long meets = 0;
                TimeMs worst = 0;
                TimeMs best = setups.empty() ? 0 : setups.front().latency.totalMs;
                for (const SetupRecord& s : setups)
                {
                    meets += s.latency.meets(scenario.budget.requirementMs) ? 1 : 0;
                    worst = std::max(worst, s.latency.totalMs);
                    best = std::min(best, s.latency.totalMs);
                }
                const std::string key = fmt::format("mcch{}.{}", r.mcchPeriodMs, toString(r.option));
                summary += fmt::format("{}.calls={}\n", key, setups.size());
                summary += fmt::format("{}.meets_requirement={}\n", key, meets);
                summary += fmt::format("{}.min_total_ms={}\n", key, best);
                summary += fmt::format("{}.max_total_ms={}\n", key, worst);
                out << fmt::format("fig4 {}: {} calls, {} within {} ms\n", key, setups.size(), meets, scenario.budget.requirementMs);
            }
        }
        else if (experiment == "fig5")
        {
            const auto rows = fig5Sweep(scenario);
            writeFile(dir / "fig5.csv", fig5Csv(rows));
            summary += fmt::format("n_star={}\n", rows.empty() ? 0 : rows.front().nStar);
            out << fmt::format("fig5: {} rows, N*={}\n", rows.size(), rows.empty() ? 0 : rows.front().nStar);
        }
        else if (experiment == "req-matrix" || experiment == "run")
        {
            ReqMatrixOutcome o = reqMatrix(scenario);
            writeFile(dir / "trace.txt", o.run.trace);
            writeFile(dir / "decision_log.csv", decisionLogCsv(o.run.metrics));
            writeFile(dir / "setup_latency.csv",
                      std::string(kSetupHeader) + setupRows(o.run.metrics.setupLatencies, scenario.budget.requirementMs));
            summary += runSummary(o.run);
            if (experiment == "req-matrix")
            {
                writeFile(dir / "req_matrix.csv", requirementCsv(o.report));
                out << requirementTable(o.report);
                summary += fmt::format("requirements={}\n", o.report.passed() ? "pass" : "fail");
                if (!o.report.passed())
                {
                    status = kExitRequirementFailure;
                }
            }
            else
            {
                out << fmt::format("run: {} events, {} calls started\n", o.run.events, o.run.metrics.callsStarted);
            }
        }
        else
        {
            throw Error(ErrorCode::ConfigError,
                        fmt::format("unknown experiment '{}' (expected fig2, fig4, fig5 or req-matrix)", experiment));
        }
        writeFile(dir / "summary.txt", summary);
        return status;
    }
    catch (const Error& e)
    {
        err << "error: " << toString(e.code()) << ": " << e.what() << '\n';
        return kExitConfigError;
    }
}

} // namespace pmrsim
