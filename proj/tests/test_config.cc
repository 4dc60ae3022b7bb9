/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.h"

#include "pmrsim/config.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

using namespace pmrsim;

namespace
{

constexpr const char* kMinimal = R"(version: 1
name: minimal
seed: 9
duration_ms: 10000
cells:
  - {id: 1}
  - {id: 2, bandwidth_mhz: 5, mbsfn_subframes: 2}
areas:
  - {id: 1, cells: [1, 2], sync: sfn}
ues:
  count: 12
  quality: 7
groups:
  - {count: 2, size: 5, profile: video, priority: 3, area: 1}
)";

std::vector<ConfigIssue> issuesOf(const std::string& text, const LoadOptions& options = {})
{
    return validateConfigText(text, "test.yaml", options);
}

const ConfigIssue* findField(const std::vector<ConfigIssue>& issues, const std::string& field)
{
    auto it = std::find_if(issues.begin(), issues.end(), [&](const ConfigIssue& i) { return i.field == field; });
    return it == issues.end() ? nullptr : &*it;
}

std::string replaced(std::string text, const std::string& from, const std::string& to)
{
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

} // namespace

TEST_CASE("every preset validates")
{
    for (const std::string& name : templateNames())
    {
        CAPTURE(name);
        CHECK(validateConfigText(templateText(name), name).empty());
        CHECK_NOTHROW(loadTemplate(name));
    }
    CHECK(templateNames().size() == 4);
    CHECK_THROWS_AS(templateText("nope"), Error);
}

TEST_CASE("a minimal scenario parses into the expected structure")
{
    const Scenario s = parseScenario(kMinimal, "test.yaml");
    CHECK(s.name == "minimal");
    CHECK(s.seed == 9);
    CHECK(s.durationMs == 10000);
    REQUIRE(s.cells.size() == 2);
    CHECK(s.cells[1].bandwidthMhz == 5);
    CHECK(s.cells[1].capacityUnits == 25);
    CHECK(s.cells[1].mbsfnSubframes == 2);
    REQUIRE(s.areas.size() == 1);
    CHECK(s.areas[0].syncMode == SyncMode::Sfn);
    CHECK(s.areas[0].sfnClusterSize == 2);
    CHECK(s.ues.size() == 12);
    CHECK(s.ues[1].servingCell == CellId{2});
    CHECK(s.ues[0].channelQuality == 7);
    REQUIRE(s.groups.size() == 2);
    CHECK(s.groups[0].members.size() == 5);
    CHECK(s.groups[0].profile == ServiceProfile::video());
    CHECK(s.groups[1].members.contains(UeId{6}));
    CHECK(s.groups[1].priority == 3);
    CHECK(s.policy.kind == PolicyKind::StaticActivation);
    CHECK(s.schedule.modificationPeriodMs == 50);
}

TEST_CASE("the seed option replaces the file seed")
{
    LoadOptions o;
    o.seed = 123;
    CHECK(parseScenario(kMinimal, "test.yaml", o).seed == 123);
}

TEST_CASE("subframe ceiling is enforced with its limit in the message")
{
    const auto issues = issuesOf(replaced(kMinimal, "mbsfn_subframes: 2", "mbsfn_subframes: 7"));
    const ConfigIssue* i = findField(issues, "cells[1].mbsfn_subframes");
    REQUIRE(i != nullptr);
    CHECK(i->line == 7);
    CHECK(i->message.find("6 MBSFN subframes") != std::string::npos);
    CHECK(i->str().rfind("test.yaml:7: cells[1].mbsfn_subframes:", 0) == 0);
}

TEST_CASE("group size limit is enforced with its limit in the message")
{
    std::string text = replaced(kMinimal, "count: 12", "count: 600");
    text = replaced(text, "{count: 2, size: 5", "{count: 1, size: 501");
    const auto issues = issuesOf(text);
    const ConfigIssue* i = findField(issues, "groups[0].size");
    REQUIRE(i != nullptr);
    CHECK(i->message.find("500-member group limit") != std::string::npos);
    CHECK(i->line == 14);
}

TEST_CASE("all issues are reported, not only the first")
{
    std::string text = replaced(kMinimal, "sync: sfn", "sync: sfx");
    text = replaced(text, "quality: 7", "quality: 99");
    text += "colour: blue\n";
    const auto issues = issuesOf(text);
    CHECK(findField(issues, "areas[0].sync") != nullptr);
    CHECK(findField(issues, "ues.quality") != nullptr);
    const ConfigIssue* unknown = findField(issues, "colour");
    REQUIRE(unknown != nullptr);
    CHECK(unknown->message == "unknown key");
    CHECK(unknown->line == 15);
    try
    {
        parseScenario(text, "test.yaml");
        FAIL("expected ConfigError");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.code() == ErrorCode::ConfigError);
        CHECK(e.issues().size() == issues.size());
    }
}

TEST_CASE("references must resolve")
{
    const auto issues = issuesOf(replaced(kMinimal, "cells: [1, 2]", "cells: [1, 3]"));
    CHECK(findField(issues, "areas[0].cells[1]") != nullptr);
    const auto groupIssues = issuesOf(replaced(kMinimal, "area: 1}", "area: 4}"));
    CHECK(findField(groupIssues, "groups[0].area") != nullptr);
}

TEST_CASE("malformed YAML reports its line")
{
    const auto issues = issuesOf("version: 1\ncells: [1, 2\n");
    REQUIRE_FALSE(issues.empty());
    CHECK(issues[0].line >= 2);
}

TEST_CASE("overrides edit the tree before validation")
{
    LoadOptions o;
    o.overrides = {"model.bandwidth_mhz=5", "groups.0.profile=voice", "policy.kind=dynamic", "name=renamed"};
    const Scenario s = parseScenario(kMinimal, "test.yaml", o);
    CHECK(s.model.bandwidthMhz == 5);
    CHECK(s.cells[0].bandwidthMhz == 5);
    CHECK(s.groups[0].profile == ServiceProfile::voice());
    CHECK(s.policy.kind == PolicyKind::DynamicActivation);
    CHECK(s.name == "renamed");

    LoadOptions bad;
    bad.overrides = {"model.mbsfn_subframes=9"};
    const auto issues = issuesOf(kMinimal, bad);
    const ConfigIssue* i = findField(issues, "model.mbsfn_subframes");
    REQUIRE(i != nullptr);
    CHECK(i->source == "--set");
    CHECK(i->line == 0);

    LoadOptions index;
    index.overrides = {"groups.5.profile=video"};
    CHECK_FALSE(issuesOf(kMinimal, index).empty());
    LoadOptions noEquals;
    noEquals.overrides = {"model.bandwidth_mhz"};
    CHECK_FALSE(issuesOf(kMinimal, noEquals).empty());
}

TEST_CASE("files are read from disk")
{
    const auto path = std::filesystem::temp_directory_path() / "pmrsim_test_config.yaml";
    {
        std::ofstream out(path);
        out << kMinimal;
    }
    CHECK(loadScenario(path.string()).name == "minimal");
    CHECK(validateConfig(path.string()).empty());
    std::filesystem::remove(path);
    try
    {
        loadScenario(path.string());
        FAIL("expected IoError");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::IoError);
    }
}
