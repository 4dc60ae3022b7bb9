/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/radio.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pmrsim
{

std::string_view toString(Transport transport)
{
    return transport == Transport::Unicast ? "unicast" : "multicast";
}

std::string_view toString(Pool pool)
{
    return pool == Pool::Unicast ? "unicast" : "multicast";
}

std::vector<int> ResourceModel::defaultEffTable()
{
    // 8-step staircase over quality 0..15
    return {24, 24, 48, 48, 96, 96, 160, 160, 256, 256, 384, 384, 512, 512, 640, 640};
}

ResourceModel ResourceModel::defaults(int bandwidthMhz)
{
    ResourceModel m;
    m.bandwidthMhz = bandwidthMhz;
    m.unitsPerSubframe = unitsForBandwidth(bandwidthMhz);
    m.effTable = defaultEffTable();
    return m;
}

int ResourceModel::bitsPerUnit(int quality) const
{
    if (quality < 0 || quality > qMax())
    {
        throw Error(ErrorCode::QualityOutOfRange,
                    fmt::format("channel quality {} outside [0, {}]", quality, qMax()));
    }
    return effTable[static_cast<std::size_t>(quality)];
}

int ResourceModel::sfnGain(int clusterSize) const
{
    if (clusterSize <= 1)
    {
        return 0;
    }
    return static_cast<int>(std::floor(sfnGainStepsPerDoubling * std::log2(clusterSize) + 1e-9));
}

void ResourceModel::validate() const
{
    if (effTable.empty())
    {
        throw Error(ErrorCode::ValidationError, "model.eff_table is empty");
    }
    for (std::size_t i = 0; i < effTable.size(); ++i)
    {
        if (effTable[i] <= 0)
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("model.eff_table[{}] must be positive", i));
        }
        if (i > 0 && effTable[i] < effTable[i - 1])
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("model.eff_table[{}] decreases", i));
        }
    }
    if (mbsfnSubframes < 0 || mbsfnSubframes > kMaxMbsfnSubframes)
    {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("model.mbsfn_subframes {} outside [0, {}]",
                                mbsfnSubframes,
                                kMaxMbsfnSubframes));
    }
    if (unitsPerSubframe <= 0 || frameMs <= 0)
    {
        throw Error(ErrorCode::ValidationError, "model units and frame length must be positive");
    }
    if (cellEdgeQuality < 0 || cellEdgeQuality > qMax())
    {
        throw Error(ErrorCode::ValidationError, "model.cell_edge_quality outside the table");
    }
    if (sfnGainStepsPerDoubling < 0 || overloadPenalty < 0)
    {
        throw Error(ErrorCode::ValidationError, "model gains and penalties must be >= 0");
    }
}

ResourceUnits unicastCost(const ServiceProfile& profile, int quality, const ResourceModel& model)
{
    const std::int64_t bits = profile.bitsPerFrame(model.frameMs);
    const std::int64_t perUnit = model.bitsPerUnit(quality);
    return (bits + perUnit - 1) / perUnit;
}

ResourceUnits unicastCost(const ServiceProfile& profile,
                          const UserEquipment& ue,
                          const ResourceModel& model)
{
    return unicastCost(profile, ue.channelQuality, model);
}

int effectiveMulticastQuality(std::span<const int> memberQualities,
                              const MbmsArea& area,
                              const ResourceModel& model)
{
    int quality = model.cellEdgeQuality;
    if (!memberQualities.empty())
    {
        for (int q : memberQualities)
        {
            model.bitsPerUnit(q); // range check
        }
        quality = *std::min_element(memberQualities.begin(), memberQualities.end());
    }
    if (area.syncMode == SyncMode::Sfn)
    {
        quality += model.sfnGain(area.sfnClusterSize);
    }
    return std::min(quality, model.qMax());
}

ResourceUnits multicastCost(const ServiceProfile& profile,
                            std::span<const int> memberQualities,
                            const MbmsArea& area,
                            const ResourceModel& model)
{
    return unicastCost(profile, effectiveMulticastQuality(memberQualities, area, model), model);
}

ResourceUnits multicastCost(const ServiceProfile& profile,
                            const std::vector<const UserEquipment*>& membersInCell,
                            const MbmsArea& area,
                            const ResourceModel& model)
{
    std::vector<int> qualities;
    qualities.reserve(membersInCell.size());
    for (const UserEquipment* ue : membersInCell)
    {
        qualities.push_back(ue->channelQuality);
    }
    return multicastCost(profile, qualities, area, model);
}

CostReport costReport(const GroupCall& group,
                      CellId cell,
                      const std::vector<const UserEquipment*>& membersInCell,
                      const MbmsArea& area,
                      const ResourceModel& model)
{
    CostReport report;
    report.group = group.id;
    report.cell = cell;
    for (const UserEquipment* ue : membersInCell)
    {
        ResourceUnits units = unicastCost(group.profile, *ue, model);
        report.perUeUnicast.emplace_back(ue->id, units);
        report.unicastTotal += units;
    }
    report.multicastTotal = multicastCost(group.profile, membersInCell, area, model);
    return report;
}

namespace
{

MbmsArea referenceArea(SyncMode scheme, int clusterSize)
{
    MbmsArea area;
    area.syncMode = scheme;
    area.sfnClusterSize = scheme == SyncMode::Sfn ? std::max(clusterSize, 1) : 1;
    return area;
}

} // namespace

int maxMulticastGroups(SyncMode scheme,
                       const ServiceProfile& profile,
                       const ResourceModel& model,
                       int clusterSize)
{
    const ResourceUnits perGroup =
        multicastCost(profile, std::span<const int>{}, referenceArea(scheme, clusterSize), model);
    return static_cast<int>(model.multicastBudget() / perGroup);
}

double systemThroughput(int nGroups,
                        SyncMode scheme,
                        const ServiceProfile& profile,
                        const ResourceModel& model,
                        int clusterSize)
{
    if (nGroups <= 0)
    {
        return 0.0;
    }
    const int saturation = maxMulticastGroups(scheme, profile, model, clusterSize);
    const double rate = profile.appRateKbps;
    if (nGroups <= saturation)
    {
        return nGroups * rate;
    }
    const double excess = nGroups - saturation;
    return std::max(0.0, saturation * rate - model.overloadPenalty * rate * excess);
}

double systemThroughput(int nGroups,
                        SyncMode scheme,
                        const ServiceProfile& profile,
                        const ResourceModel& model)
{
    return systemThroughput(nGroups, scheme, profile, model, model.sfnReferenceCluster);
}

double spectralEfficiency(int nMembers,
                          Transport transport,
                          const ServiceProfile& profile,
                          std::span<const int> cellQualities,
                          const MbmsArea& area,
                          const ResourceModel& model)
{
    if (nMembers < 1 || cellQualities.empty())
    {
        throw Error(ErrorCode::NoMembers, "spectral efficiency needs at least one member");
    }
    const double bits = static_cast<double>(profile.bitsPerFrame(model.frameMs));
    if (transport == Transport::Multicast)
    {
        return bits / static_cast<double>(multicastCost(profile, cellQualities, area, model));
    }
    ResourceUnits total = 0;
    for (int i = 0; i < nMembers; ++i)
    {
        total += unicastCost(profile, cellQualities[static_cast<std::size_t>(i) % cellQualities.size()], model);
    }
    return bits / static_cast<double>(total);
}

int crossoverThreshold(std::span<const ResourceUnits> perUeUnicast, ResourceUnits multicastCost)
{
    if (perUeUnicast.empty())
    {
        throw Error(ErrorCode::NoMembers, "crossover needs at least one per-UE cost");
    }
    if (std::any_of(perUeUnicast.begin(), perUeUnicast.end(), [](ResourceUnits u) { return u <= 0; }))
    {
        throw Error(ErrorCode::ValidationError, "unicast costs must be positive");
    }
    ResourceUnits running = 0;
    int n = 0;
    while (running <= multicastCost)
    {
        running += perUeUnicast[static_cast<std::size_t>(n) % perUeUnicast.size()];
        ++n;
    }
    return n;
}

int crossoverThreshold(const ServiceProfile& profile,
                       std::span<const int> cellQualities,
                       const MbmsArea& area,
                       const ResourceModel& model)
{
    if (cellQualities.empty())
    {
        throw Error(ErrorCode::NoMembers, "crossover needs at least one member");
    }
    std::vector<ResourceUnits> costs;
    costs.reserve(cellQualities.size());
    for (int q : cellQualities)
    {
        costs.push_back(unicastCost(profile, q, model));
    }
    return crossoverThreshold(costs, multicastCost(profile, cellQualities, area, model));
}

void ResourceLedger::addCell(const Cell& cell)
{
    auto& pools = cells_[cell.id];
    pools[static_cast<std::size_t>(Pool::Unicast)].capacity = cell.unicastPoolUnits();
    pools[static_cast<std::size_t>(Pool::Multicast)].capacity = cell.multicastPoolUnits();
}

ResourceLedger::PoolState& ResourceLedger::pool(CellId cell, Pool p)
{
    auto it = cells_.find(cell);
    if (it == cells_.end())
    {
        throw Error(ErrorCode::UnknownCell, fmt::format("ledger has no cell {}", cell.str()));
    }
    return it->second[static_cast<std::size_t>(p)];
}

const ResourceLedger::PoolState& ResourceLedger::pool(CellId cell, Pool p) const
{
    return const_cast<ResourceLedger*>(this)->pool(cell, p);
}

ResourceUnits ResourceLedger::capacity(CellId cell, Pool p) const
{
    return pool(cell, p).capacity;
}

ResourceUnits ResourceLedger::committed(CellId cell, Pool p) const
{
    return pool(cell, p).used;
}

ResourceUnits ResourceLedger::committedBy(CellId cell, Pool p, GroupId group) const
{
    const auto& residents = pool(cell, p).residents;
    auto it = residents.find(group);
    return it == residents.end() ? 0 : it->second.units;
}

bool ResourceLedger::tryReserve(CellId cell, Pool p, GroupId group, int priority, ResourceUnits units)
{
    PoolState& state = pool(cell, p);
    if (state.used + units > state.capacity)
    {
        return false;
    }
    Commitment& c = state.residents[group];
    c.priority = priority;
    c.units += units;
    state.used += units;
    return true;
}

void ResourceLedger::release(CellId cell, Pool p, GroupId group, ResourceUnits units)
{
    PoolState& state = pool(cell, p);
    auto it = state.residents.find(group);
    if (it == state.residents.end())
    {
        return;
    }
    const ResourceUnits freed = std::min(units, it->second.units);
    it->second.units -= freed;
    state.used -= freed;
    if (it->second.units == 0)
    {
        state.residents.erase(it);
    }
}

ResourceUnits ResourceLedger::releaseGroup(CellId cell, Pool p, GroupId group)
{
    const ResourceUnits units = committedBy(cell, p, group);
    release(cell, p, group, units);
    return units;
}

const std::map<GroupId, Commitment>& ResourceLedger::residents(CellId cell, Pool p) const
{
    return pool(cell, p).residents;
}

ResourceUnits ResourceLedger::totalCommitted() const
{
    ResourceUnits total = 0;
    for (const auto& [id, pools] : cells_)
    {
        for (const auto& p : pools)
        {
            total += p.used;
        }
    }
    return total;
}

AdmissionResult admit(const GroupCall& group,
                      const Cell& cell,
                      Transport transport,
                      ResourceUnits demand,
                      ResourceLedger& load)
{
    const Pool p = transport == Transport::Unicast ? Pool::Unicast : Pool::Multicast;
    if (demand > load.capacity(cell.id, p))
    {
        return Rejected{};
    }
    ResourceUnits shortfall = demand - load.available(cell.id, p);
    if (shortfall <= 0)
    {
        load.tryReserve(cell.id, p, group.id, group.priority, demand);
        return Admitted{};
    }

    std::vector<std::pair<GroupId, Commitment>> candidates;
    for (const auto& [id, c] : load.residents(cell.id, p))
    {
        if (id != group.id && c.priority < group.priority)
        {
            candidates.emplace_back(id, c);
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.second.priority != b.second.priority)
        {
            return a.second.priority < b.second.priority;
        }
        return a.first < b.first;
    });

    std::vector<GroupId> victims;
    for (const auto& [id, c] : candidates)
    {
        if (shortfall <= 0)
        {
            break;
        }
        victims.push_back(id);
        shortfall -= c.units;
    }
    if (shortfall > 0)
    {
        return Rejected{};
    }
    for (GroupId v : victims)
    {
        load.releaseGroup(cell.id, p, v);
    }
    load.tryReserve(cell.id, p, group.id, group.priority, demand);
    return Admitted{victims};
}

} // namespace pmrsim
