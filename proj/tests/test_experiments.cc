/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.h"

#include "pmrsim/experiments.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pmrsim;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "pmrsim_test_experiments" / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string firstLine(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

int runTemplate(const std::string& name,
                const std::string& experiment,
                const fs::path& out,
                std::vector<std::string> overrides = {},
                std::string* stdoutText = nullptr)
{
    ::unsetenv("PMRSIM_OUT");
    RunConfig c;
    c.templateName = name;
    c.experiment = experiment;
    c.outputDir = out.string();
    c.overrides = std::move(overrides);
    c.jobs = 2;
    std::ostringstream o;
    std::ostringstream e;
    const int status = runExperiment(c, o, e);
    if (stdoutText != nullptr)
    {
        *stdoutText = o.str();
    }
    return status;
}

} // namespace

TEST_CASE("fig2 CSV layout")
{
    const fs::path dir = scratch("fig2");
    REQUIRE(runTemplate("fig2", "fig2", dir) == kExitOk);
    const std::string csv = slurp(dir / "fig2.csv");
    CHECK(firstLine(dir / "fig2.csv") == "n_groups,mode,profile,bandwidth,throughput_kbps");
    CHECK(csv.find("\n1,SC,voice,5,16.000\n") != std::string::npos);
    CHECK(csv.find("\n42,SC,voice,10,672.000\n") != std::string::npos);
    CHECK(csv.find("\n150,SFN,voice,10,2400.000\n") != std::string::npos);
    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.rfind("csv_schema_version=1\n", 0) == 0);
    CHECK(summary.find("saturation.voice.10mhz.SC=42\n") != std::string::npos);
    CHECK(summary.find("saturation.video.5mhz.SFN=5\n") != std::string::npos);
}

TEST_CASE("fig4 CSV layout")
{
    const fs::path dir = scratch("fig4");
    REQUIRE(runTemplate("fig4", "fig4", dir, {"arrivals.max_calls=200"}) == kExitOk);
    for (const char* f : {"fig4_mcch50.csv", "fig4_mcch5120.csv"})
    {
        CHECK(firstLine(dir / f) == "call_id,option,startup_ms,bearer_ms,mcch_wait_ms,total_ms,meets_300ms");
    }
    const std::string csv = slurp(dir / "fig4_mcch50.csv");
    CHECK(csv.find(",pre_established,") != std::string::npos);
    CHECK(csv.find(",dynamic_bearer,") != std::string::npos);
}

TEST_CASE("fig5 CSV layout")
{
    const fs::path dir = scratch("fig5");
    REQUIRE(runTemplate("fig5", "fig5", dir) == kExitOk);
    CHECK(firstLine(dir / "fig5.csv") == "n_members,unicast_eff,multicast_eff,envelope,N*");
    std::ifstream in(dir / "fig5.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line))
    {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 4);
    }
    CHECK(rows == 40);
}

TEST_CASE("req-matrix artifacts and pass status")
{
    const fs::path dir = scratch("req");
    std::string table;
    REQUIRE(runTemplate("req-matrix", "req-matrix", dir, {}, &table) == kExitOk);
    CHECK(firstLine(dir / "req_matrix.csv") == "row,comparator,threshold,measured,status");
    CHECK(firstLine(dir / "decision_log.csv") == "timestamp_ms,group_id,cell_id,decision,trigger,member_count");
    CHECK(firstLine(dir / "setup_latency.csv") ==
          "call_id,option,startup_ms,bearer_ms,mcch_wait_ms,total_ms,meets_300ms");
    CHECK(fs::file_size(dir / "trace.txt") > 0);
    CHECK(table.find("overall: PASS") != std::string::npos);
    CHECK(slurp(dir / "summary.txt").find("requirements=pass\n") != std::string::npos);
}

TEST_CASE("on-demand bearers with the legacy MCCH period fail the setup requirement")
{
    const fs::path dir = scratch("req-legacy");
    REQUIRE(runTemplate("req-matrix",
                        "req-matrix",
                        dir,
                        {"bearers.mbms=on_demand", "schedule.mcch_period_ms=5120"}) == kExitRequirementFailure);
    CHECK(slurp(dir / "req_matrix.csv").find("\nmax_setup_ms,<=,300,") != std::string::npos);
    std::istringstream rows(slurp(dir / "req_matrix.csv"));
    std::string line;
    while (std::getline(rows, line))
    {
        if (line.rfind("max_setup_ms", 0) == 0)
        {
            CHECK(line.substr(line.rfind(',') + 1) == "fail");
        }
    }
}

TEST_CASE("video groups at 5 MHz fail admission")
{
    const fs::path dir = scratch("req-video");
    REQUIRE(runTemplate("req-matrix",
                        "req-matrix",
                        dir,
                        {"model.bandwidth_mhz=5", "groups.0.profile=video", "groups.1.profile=video"}) ==
            kExitRequirementFailure);
    const std::string csv = slurp(dir / "req_matrix.csv");
    CHECK(csv.find("min_voice_groups,>=,36,") != std::string::npos);
    CHECK(csv.find("required_bandwidth_mhz,>=,10,5,fail") != std::string::npos);
}

TEST_CASE("config and IO errors exit with status 2")
{
    const fs::path dir = scratch("errors");
    CHECK(runTemplate("req-matrix", "req-matrix", dir, {"model.mbsfn_subframes=7"}) == kExitConfigError);
    CHECK(runTemplate("nope", "run", dir) == kExitConfigError);
    CHECK(runTemplate("fig2", "fig9", dir) == kExitConfigError);

    RunConfig missing;
    missing.scenarioPath = (dir / "absent.yaml").string();
    std::ostringstream o;
    std::ostringstream e;
    CHECK(runExperiment(missing, o, e) == kExitConfigError);
    CHECK(e.str().find("IoError") != std::string::npos);

    RunConfig neither;
    CHECK(runExperiment(neither, o, e) == kExitConfigError);
}

TEST_CASE("validate mode reports issues without running")
{
    RunConfig c;
    c.templateName = "req-matrix";
    c.validateOnly = true;
    std::ostringstream o;
    std::ostringstream e;
    CHECK(runExperiment(c, o, e) == kExitOk);
    CHECK(o.str() == "ok\n");
    c.overrides = {"groups.0.size=501"};
    std::ostringstream e2;
    CHECK(runExperiment(c, o, e2) == kExitConfigError);
    CHECK(e2.str().find("groups[0].size") != std::string::npos);
    CHECK(e2.str().find("500-member group limit") != std::string::npos);
}

TEST_CASE("PMRSIM_OUT overrides the output directory")
{
    const fs::path dir = scratch("env");
    const fs::path ignored = scratch("env-ignored");
    ::setenv("PMRSIM_OUT", dir.string().c_str(), 1);
    RunConfig c;
    c.templateName = "fig5";
    c.experiment = "fig5";
    c.outputDir = ignored.string();
    std::ostringstream o;
    std::ostringstream e;
    CHECK(runExperiment(c, o, e) == kExitOk);
    ::unsetenv("PMRSIM_OUT");
    CHECK(fs::exists(dir / "fig5.csv"));
    CHECK_FALSE(fs::exists(ignored));
}

TEST_CASE("reruns produce byte-identical artifacts")
{
    for (const auto& [name, experiment] : std::vector<std::pair<std::string, std::string>>{
             {"req-matrix", "req-matrix"}, {"fig5", "fig5"}, {"fig2", "fig2"}})
    {
        CAPTURE(name);
        const fs::path a = scratch(name + "-a");
        const fs::path b = scratch(name + "-b");
        runTemplate(name, experiment, a);
        runTemplate(name, experiment, b);
        for (const auto& entry : fs::directory_iterator(a))
        {
            CAPTURE(entry.path().filename().string());
            CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
        }
    }
}

TEST_CASE("summaries feed the requirement checker")
{
    const Scenario s = loadTemplate("req-matrix");
    const ReqMatrixOutcome o = reqMatrix(s);
    CHECK(o.report.passed());
    CHECK(o.summary.admittedGroups == 36);
    CHECK(o.summary.areaUsers == 2000);
    CHECK(o.summary.maxGroupSize == 500);
    CHECK(o.summary.bandwidthMhz == 10);
    REQUIRE(o.summary.setupP100Ms.has_value());
    CHECK(*o.summary.setupP100Ms <= 300);
    CHECK(requirementCsv(o.report).rfind("row,comparator,threshold,measured,status\n", 0) == 0);
}
