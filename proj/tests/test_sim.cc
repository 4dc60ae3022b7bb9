/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.h"

#include "fixtures.h"

#include "pmrsim/sim.h"

#include <sstream>

using namespace pmrsim;
using namespace pmrsim::testing;

namespace
{

/// Two SFN cells, ten UEs alternating between them, one voice group of the first members.
Scenario smallScenario(PolicyKind policy, int groupSize)
{
    Scenario s;
    s.durationMs = 20000;
    s.cells = {makeCell(1), makeCell(2)};
    s.areas = {makeArea(1, {1, 2}, SyncMode::Sfn, 2)};
    for (std::uint32_t u = 1; u <= 10; ++u)
    {
        s.ues.push_back(makeUe(u, 1 + (u % 2), static_cast<int>(u)));
    }
    GroupSpec g;
    g.members = ueRange(1, static_cast<std::uint32_t>(groupSize));
    g.profile = ServiceProfile::voice();
    g.area = AreaId{1};
    s.groups.push_back(g);
    s.policy.kind = policy;
    return s;
}

int countLines(const std::string& trace, const std::string& needle)
{
    std::istringstream in(trace);
    std::string line;
    int n = 0;
    while (std::getline(in, line))
    {
        n += line.find(needle) != std::string::npos ? 1 : 0;
    }
    return n;
}

} // namespace

TEST_CASE("empty scenario runs to its duration with empty metrics")
{
    Scenario s;
    s.durationMs = 5000;
    s.cells = {makeCell(1)};
    const RunResult r = run(s);
    CHECK(r.metrics.empty());
    CHECK(r.endMs == 5000);
    CHECK(r.events == 0);
    CHECK(r.trace.empty());
}

TEST_CASE("scenario validation")
{
    Scenario s = smallScenario(PolicyKind::StaticActivation, 4);
    CHECK_NOTHROW(s.validate());
    s.durationMs = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = smallScenario(PolicyKind::StaticActivation, 4);
    s.groups[0].members.insert(UeId{99});
    CHECK_THROWS_AS(s.validate(), Error);
    s = smallScenario(PolicyKind::StaticActivation, 4);
    s.groups[0].area.reset();
    CHECK_THROWS_AS(s.validate(), Error);
    s = smallScenario(PolicyKind::StaticActivation, 4);
    s.ues[0].servingCell = CellId{9};
    CHECK_THROWS_AS(Simulator{s}, Error);
}

TEST_CASE("events before the clock are refused")
{
    Simulator sim(smallScenario(PolicyKind::StaticActivation, 4));
    REQUIRE(sim.step());
    REQUIRE(sim.now() > 0);
    Event e;
    e.timeMs = sim.now() - 1;
    e.kind = EventKind::LossReport;
    e.ue = UeId{1};
    try
    {
        sim.schedule(e);
        FAIL("expected CausalityViolation");
    }
    catch (const Error& err)
    {
        CHECK(err.code() == ErrorCode::CausalityViolation);
    }
    e.timeMs = sim.now();
    CHECK_NOTHROW(sim.schedule(e));
}

TEST_CASE("events are processed in time then insertion order")
{
    Scenario s;
    s.durationMs = 1000;
    s.cells = {makeCell(1), makeCell(2)};
    s.ues = {makeUe(1, 1, 3)};
    Simulator sim(s);
    for (TimeMs t : {30, 10, 10, 20})
    {
        Event e;
        e.timeMs = t;
        e.kind = EventKind::Handover;
        e.ue = UeId{1};
        e.cell = CellId{2};
        sim.schedule(e);
    }
    std::vector<std::string> order;
    for (int i = 0; i < 4; ++i)
    {
        REQUIRE(sim.step());
    }
    std::istringstream in(sim.trace());
    std::string line;
    while (std::getline(in, line))
    {
        order.push_back(line.substr(0, line.find(" Handover")));
    }
    CHECK(order == std::vector<std::string>{"10 1", "10 2", "20 3", "30 0"});
}

TEST_CASE("same scenario and seed give an identical trace")
{
    Scenario s = smallScenario(PolicyKind::DynamicActivation, 8);
    s.policy.kind = PolicyKind::DynamicActivation;
    s.mobility.enabled = true;
    s.mobility.meanDwellMs = 2000;
    s.loss.enabled = false;
    s.talk.enabled = true;
    s.seed = 17;
    const RunResult a = run(s);
    const RunResult b = run(s);
    CHECK(a.trace == b.trace);
    CHECK(a.events == b.events);
    CHECK(a.events > 20);
    s.seed = 18;
    CHECK(run(s).trace != a.trace);
}

TEST_CASE("a dynamic call request brings up one unicast bearer per member")
{
    Scenario s = smallScenario(PolicyKind::DynamicActivation, 6);
    s.durationMs = 500; // ends before the first counting round
    s.arrivals.spreadMs = 0;
    s.arrivals.duration = DurationMode::Hold;
    const RunResult r = run(s);
    CHECK(countLines(r.trace, "CallRequest") == 1);
    CHECK(countLines(r.trace, "BearerComplete") == 6);
    CHECK(countLines(r.trace, "McchBoundary") == 0);
    REQUIRE(r.metrics.setupLatencies.size() == 1);
    CHECK(r.metrics.setupLatencies[0].latency.option == BearerOption::UnicastStart);
}

TEST_CASE("a static call activates its MBMS bearer at the MCCH boundary")
{
    Scenario s = smallScenario(PolicyKind::StaticActivation, 6);
    s.durationMs = 2000;
    s.arrivals.duration = DurationMode::Hold;
    Simulator sim(s);
    const RunResult r = sim.run();
    CHECK(countLines(r.trace, "McchBoundary") == 1);
    for (const auto& [id, b] : sim.controller().bearers().all())
    {
        if (b.kind == BearerKind::Mbms)
        {
            CHECK(b.state == BearerState::Active);
        }
    }
    CHECK(r.metrics.admittedGroups.size() == 1);
    CHECK(r.metrics.servedUes.size() == 6);
}

TEST_CASE("handover of a UE outside every group causes no group events")
{
    Scenario s = smallScenario(PolicyKind::StaticActivation, 4);
    s.arrivals.spreadMs = 0;
    s.arrivals.duration = DurationMode::Hold;
    Simulator sim(s);
    while (sim.now() < 1000 && sim.step())
    {
    }
    const std::size_t decisions = sim.metrics().switchEvents.size();
    const std::size_t gaps = sim.metrics().continuityGaps.size();
    const std::size_t admissions = sim.metrics().admissionOutcomes.size();
    Event e;
    e.timeMs = sim.now() + 10;
    e.kind = EventKind::Handover;
    e.ue = UeId{9};
    e.cell = CellId{2};
    sim.schedule(e);
    while (sim.now() < e.timeMs && sim.step())
    {
    }
    CHECK(sim.controller().network().ue(UeId{9}).servingCell == CellId{2});
    CHECK(sim.metrics().switchEvents.size() == decisions);
    CHECK(sim.metrics().continuityGaps.size() == gaps);
    CHECK(sim.metrics().admissionOutcomes.size() == admissions);
}

TEST_CASE("invariants hold through a busy run")
{
    Scenario s = smallScenario(PolicyKind::DynamicActivation, 10);
    s.policy.uliSource = UliSource::UeReported;
    s.mobility.enabled = true;
    s.mobility.meanDwellMs = 500;
    s.arrivals.mode = ArrivalMode::Poisson;
    s.arrivals.meanInterarrivalMs = 1000;
    s.arrivals.meanDurationMs = 3000;
    s.talk.enabled = true;
    s.durationMs = 60000;
    s.seed = 4;
    const RunResult r = run(s);
    CHECK(r.metrics.invariants.eventsChecked == r.events);
    CHECK(r.metrics.invariants.maxDrift == 0);
    CHECK(r.metrics.invariants.pathViolations == 0);
    CHECK(r.metrics.invariants.zeroMemberViolations == 0);
    CHECK(r.metrics.callsStarted > 5);
    CHECK(r.metrics.handovers > 100);
}

TEST_CASE("random streams are independent and seeded")
{
    auto a = makeStream(1, RngStream::Arrivals);
    auto b = makeStream(1, RngStream::Arrivals);
    auto c = makeStream(1, RngStream::Mobility);
    auto d = makeStream(2, RngStream::Arrivals);
    const auto first = a();
    CHECK(first == b());
    CHECK(first != c());
    CHECK(first != d());
}

TEST_CASE("presets are generated by name")
{
    const Scenario req = generateScenario("req-matrix", 0);
    CHECK(req.ues.size() == 2000);
    CHECK(req.groups.size() == 36);
    std::size_t largest = 0;
    for (const auto& g : req.groups)
    {
        largest = std::max(largest, g.members.size());
    }
    CHECK(largest == 500);
    const Scenario fig4 = generateScenario("fig4", 3);
    CHECK(fig4.seed == 3);
    CHECK(fig4.arrivals.maxCalls >= 10000);
    CHECK(fig4.experiment.fig4McchPeriods == std::vector<TimeMs>{50, 5120});
    CHECK_NOTHROW(generateScenario("fig2", 0));
    CHECK_NOTHROW(generateScenario("fig5", 0));
    try
    {
        generateScenario("fig9", 0);
        FAIL("expected UnknownTemplate");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::UnknownTemplate);
    }
}
