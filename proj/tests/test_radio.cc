/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.h"

#include "fixtures.h"

#include "pmrsim/radio.h"

#include <random>

using namespace pmrsim;
using namespace pmrsim::testing;

namespace
{

// Bits per unit by quality, restated here so the cost checks do not reuse the model's table.
constexpr int kEff[16] = {24, 24, 48, 48, 96, 96, 160, 160, 256, 256, 384, 384, 512, 512, 640, 640};

long ceilDiv(long a, long b)
{
    return a / b + (a % b != 0 ? 1 : 0);
}

// Brute-force crossover: walk n upward and compare unicast and multicast totals directly.
int bruteForceCrossover(const std::vector<ResourceUnits>& costs, ResourceUnits multicast)
{
    for (int n = 1;; ++n)
    {
        ResourceUnits total = 0;
        for (int i = 0; i < n; ++i)
        {
            total += costs[static_cast<std::size_t>(i) % costs.size()];
        }
        if (total > multicast)
        {
            return n;
        }
    }
}

MbmsArea sc()
{
    return makeArea(1, {1}, SyncMode::SingleCell, 1);
}

MbmsArea sfn(int cluster)
{
    std::vector<std::uint32_t> cells;
    for (int i = 1; i <= cluster; ++i)
    {
        cells.push_back(static_cast<std::uint32_t>(i));
    }
    return makeArea(1, cells, SyncMode::Sfn, cluster);
}

} // namespace

TEST_CASE("unicast cost is ceil of frame bits over bits per unit")
{
    const ResourceModel m = ResourceModel::defaults(10);
    for (int q = 0; q <= 15; ++q)
    {
        CHECK(unicastCost(ServiceProfile::voice(), q, m) == ceilDiv(160, kEff[q]));
        CHECK(unicastCost(ServiceProfile::video(), q, m) == ceilDiv(2560, kEff[q]));
    }
    CHECK(unicastCost(ServiceProfile::voice(), 0, m) == 7);
    CHECK(unicastCost(ServiceProfile::video(), 0, m) == 107);
    CHECK(unicastCost(ServiceProfile::voice(), 15, m) == 1);
}

TEST_CASE("unicast cost never increases with quality")
{
    const ResourceModel m = ResourceModel::defaults(10);
    for (const auto& p : {ServiceProfile::voice(), ServiceProfile::video()})
    {
        for (int q = 1; q <= m.qMax(); ++q)
        {
            CHECK(unicastCost(p, q, m) <= unicastCost(p, q - 1, m));
        }
    }
}

TEST_CASE("video costs sixteen times voice when the table divides the voice frame")
{
    ResourceModel m = ResourceModel::defaults(10);
    m.effTable = {1, 2, 4, 5, 8, 10, 16, 20, 32, 40, 80, 160};
    for (int q = 0; q <= m.qMax(); ++q)
    {
        CHECK(unicastCost(ServiceProfile::video(), q, m) == 16 * unicastCost(ServiceProfile::voice(), q, m));
    }
}

TEST_CASE("quality outside the table is rejected")
{
    const ResourceModel m = ResourceModel::defaults(10);
    CHECK_THROWS_AS(m.bitsPerUnit(-1), Error);
    try
    {
        unicastCost(ServiceProfile::voice(), 16, m);
        FAIL("expected QualityOutOfRange");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == ErrorCode::QualityOutOfRange);
    }
}

TEST_CASE("multicast follows the worst member and SFN lifts it")
{
    const ResourceModel m = ResourceModel::defaults(10);
    const std::vector<int> q{9, 3, 12};
    CHECK(effectiveMulticastQuality(q, sc(), m) == 3);
    CHECK(multicastCost(ServiceProfile::voice(), q, sc(), m) == ceilDiv(160, kEff[3]));
    // floor(2 * log2(cluster)) steps
    CHECK(m.sfnGain(1) == 0);
    CHECK(m.sfnGain(2) == 2);
    CHECK(m.sfnGain(3) == 3);
    CHECK(m.sfnGain(4) == 4);
    CHECK(m.sfnGain(8) == 6);
    CHECK(effectiveMulticastQuality(q, sfn(4), m) == 7);
    CHECK(effectiveMulticastQuality(std::vector<int>{14}, sfn(8), m) == 15);
    // no members: dimensioned for the cell edge
    CHECK(effectiveMulticastQuality(std::vector<int>{}, sc(), m) == 0);
    CHECK(multicastCost(ServiceProfile::video(), std::vector<int>{}, sfn(4), m) == ceilDiv(2560, kEff[4]));
}

TEST_CASE("saturation points of the multicast budget")
{
    const ResourceModel m10 = ResourceModel::defaults(10);
    const ResourceModel m5 = ResourceModel::defaults(5);
    CHECK(m10.multicastBudget() == 300);
    CHECK(m10.unicastBudget() == 200);
    CHECK(m5.multicastBudget() == 150);

    CHECK(maxMulticastGroups(SyncMode::SingleCell, ServiceProfile::voice(), m10, 1) == 300 / 7);
    CHECK(maxMulticastGroups(SyncMode::Sfn, ServiceProfile::voice(), m10, 4) == 300 / 2);
    CHECK(maxMulticastGroups(SyncMode::SingleCell, ServiceProfile::video(), m10, 1) == 300 / 107);
    CHECK(maxMulticastGroups(SyncMode::Sfn, ServiceProfile::video(), m10, 4) == 300 / 27);
    CHECK(maxMulticastGroups(SyncMode::Sfn, ServiceProfile::video(), m5, 4) == 150 / 27);
    CHECK(maxMulticastGroups(SyncMode::Sfn, ServiceProfile::video(), m5, 4) < 36);
    CHECK(maxMulticastGroups(SyncMode::Sfn, ServiceProfile::voice(), m10, 4) >= 36);
}

TEST_CASE("throughput rises to saturation then falls by the overload penalty")
{
    const ResourceModel m = ResourceModel::defaults(10);
    const ServiceProfile voice = ServiceProfile::voice();
    const int nMax = maxMulticastGroups(SyncMode::SingleCell, voice, m, 1);
    CHECK(systemThroughput(0, SyncMode::SingleCell, voice, m, 1) == 0.0);
    CHECK(systemThroughput(nMax, SyncMode::SingleCell, voice, m, 1) == doctest::Approx(nMax * 16.0));
    CHECK(systemThroughput(nMax + 10, SyncMode::SingleCell, voice, m, 1) ==
          doctest::Approx(nMax * 16.0 - 0.05 * 16.0 * 10));
    CHECK(systemThroughput(100000, SyncMode::SingleCell, voice, m, 1) == 0.0);
    CHECK(systemThroughput(10, SyncMode::Sfn, voice, m) == systemThroughput(10, SyncMode::Sfn, voice, m, 4));
}

TEST_CASE("crossover threshold matches a brute-force scan")
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> cost(1, 120);
    std::uniform_int_distribution<int> len(1, 30);
    std::uniform_int_distribution<int> mc(0, 600);
    for (int trial = 0; trial < 500; ++trial)
    {
        std::vector<ResourceUnits> costs(static_cast<std::size_t>(len(rng)));
        for (auto& c : costs)
        {
            c = cost(rng);
        }
        const ResourceUnits m = mc(rng);
        CHECK(crossoverThreshold(costs, m) == bruteForceCrossover(costs, m));
    }
}

TEST_CASE("crossover worked examples and errors")
{
    const std::vector<ResourceUnits> flat{7, 7, 7};
    CHECK(crossoverThreshold(flat, 7) == 2);
    CHECK(crossoverThreshold(flat, 6) == 1);
    CHECK(crossoverThreshold(flat, 21) == 4); // cycles past the list
    CHECK_THROWS_AS(crossoverThreshold(std::vector<ResourceUnits>{}, 5), Error);
    CHECK_THROWS_AS(crossoverThreshold(std::vector<ResourceUnits>{3, 0}, 5), Error);

    const ResourceModel m = ResourceModel::defaults(10);
    const std::vector<int> q{3, 8, 15, 0};
    std::vector<ResourceUnits> c;
    for (int x : q)
    {
        c.push_back(ceilDiv(2560, kEff[x]));
    }
    CHECK(crossoverThreshold(ServiceProfile::video(), q, sc(), m) == bruteForceCrossover(c, ceilDiv(2560, kEff[0])));
}

TEST_CASE("spectral efficiency: multicast flat, unicast non-increasing")
{
    const ResourceModel m = ResourceModel::defaults(10);
    const std::vector<int> q{5, 9, 2, 14, 7, 11};
    const double mc1 = spectralEfficiency(1, Transport::Multicast, ServiceProfile::video(), q, sc(), m);
    double prev = spectralEfficiency(1, Transport::Unicast, ServiceProfile::video(), q, sc(), m);
    CHECK(mc1 == doctest::Approx(2560.0 / ceilDiv(2560, kEff[2])));
    for (int n = 2; n <= 20; ++n)
    {
        CHECK(spectralEfficiency(n, Transport::Multicast, ServiceProfile::video(), q, sc(), m) == mc1);
        const double u = spectralEfficiency(n, Transport::Unicast, ServiceProfile::video(), q, sc(), m);
        CHECK(u <= prev);
        prev = u;
    }
    CHECK_THROWS_AS(spectralEfficiency(0, Transport::Unicast, ServiceProfile::video(), q, sc(), m), Error);
    CHECK_THROWS_AS(spectralEfficiency(1, Transport::Unicast, ServiceProfile::video(), {}, sc(), m), Error);
}

TEST_CASE("admission fits, preempts lower priority in order, and rejects cleanly")
{
    ResourceLedger ledger;
    const Cell cell = makeCell(1, 5); // 150 multicast units
    ledger.addCell(cell);

    auto group = [](std::uint32_t id, int prio) {
        GroupCall g;
        g.id = GroupId{id};
        g.priority = prio;
        return g;
    };

    CHECK(std::holds_alternative<Admitted>(admit(group(1, 1), cell, Transport::Multicast, 60, ledger)));
    CHECK(std::holds_alternative<Admitted>(admit(group(2, 1), cell, Transport::Multicast, 60, ledger)));
    CHECK(std::holds_alternative<Admitted>(admit(group(3, 0), cell, Transport::Multicast, 20, ledger)));
    CHECK(ledger.available(cell.id, Pool::Multicast) == 10);

    // same priority cannot preempt; ledger untouched
    const ResourceLedger before = ledger;
    CHECK(std::holds_alternative<Rejected>(admit(group(4, 0), cell, Transport::Multicast, 30, ledger)));
    CHECK(ledger.committed(cell.id, Pool::Multicast) == before.committed(cell.id, Pool::Multicast));
    CHECK(ledger.residents(cell.id, Pool::Multicast).size() == 3);

    // priority 2 needs 60: lowest priority (g3) goes first, then the older of g1/g2
    auto r = admit(group(5, 2), cell, Transport::Multicast, 60, ledger);
    REQUIRE(std::holds_alternative<Admitted>(r));
    const auto victims = std::get<Admitted>(r).preempted;
    REQUIRE(victims.size() == 2);
    CHECK(victims[0] == GroupId{3});
    CHECK(victims[1] == GroupId{1});
    CHECK(ledger.committedBy(cell.id, Pool::Multicast, GroupId{5}) == 60);
    CHECK(ledger.committedBy(cell.id, Pool::Multicast, GroupId{2}) == 60);
    CHECK(ledger.committed(cell.id, Pool::Multicast) <= ledger.capacity(cell.id, Pool::Multicast));

    // larger than the pool is rejected outright
    CHECK(std::holds_alternative<Rejected>(admit(group(6, 9), cell, Transport::Multicast, 151, ledger)));
    // unicast pool is independent
    CHECK(std::holds_alternative<Admitted>(admit(group(6, 0), cell, Transport::Unicast, 100, ledger)));
    CHECK(ledger.capacity(cell.id, Pool::Unicast) == 100);
}

TEST_CASE("model validation")
{
    ResourceModel m = ResourceModel::defaults(10);
    CHECK_NOTHROW(m.validate());
    m.mbsfnSubframes = 7;
    CHECK_THROWS_AS(m.validate(), Error);
    m = ResourceModel::defaults(10);
    m.effTable = {10, 5};
    CHECK_THROWS_AS(m.validate(), Error);
    CHECK(unitsForBandwidth(5) == 25);
    CHECK(unitsForBandwidth(10) == 50);
    CHECK(unitsForBandwidth(20) == 100);
}
