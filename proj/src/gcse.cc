/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/gcse.h"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace pmrsim
{

std::string_view toString(PolicyKind kind)
{
    return kind == PolicyKind::StaticActivation ? "static" : "dynamic";
}

std::string_view toString(UliSource source)
{
    return source == UliSource::PgwUli ? "pgw" : "ue";
}

std::string_view toString(SwitchKind kind)
{
    switch (kind)
    {
    case SwitchKind::NoChange:
        return "no_change";
    case SwitchKind::UnicastToMulticast:
        return "unicast_to_multicast";
    case SwitchKind::MulticastToUnicast:
        return "multicast_to_unicast";
    }
    return "?";
}

void Policy::validate() const
{
    if (!(lossThreshold > 0.0 && lossThreshold < 1.0))
    {
        throw Error(ErrorCode::ValidationError, "policy.loss_threshold must be in (0, 1)");
    }
    if (switchHysteresis < 0)
    {
        throw Error(ErrorCode::ValidationError, "policy.hysteresis must be >= 0");
    }
    if (uliIntervalMs <= 0 || lossWindowMs <= 0)
    {
        throw Error(ErrorCode::ValidationError, "policy intervals must be positive");
    }
}

FloorTaken::FloorTaken(UeId talker)
    : Error(ErrorCode::FloorTaken, fmt::format("floor held by {}", talker.str())),
      talker_(talker)
{
}

namespace
{

Pool poolOf(BearerKind kind)
{
    return kind == BearerKind::Unicast ? Pool::Unicast : Pool::Multicast;
}

} // namespace

GcseController::GcseController(Network network, GcseConfig config)
    : network_(std::move(network)),
      config_(std::move(config)),
      bearers_(config_.budget, config_.schedule)
{
    config_.policy.validate();
    config_.model.validate();
    config_.budget.validate();
    for (const auto& [id, cell] : network_.cells())
    {
        ledger_.addCell(cell);
    }
}

GroupId GcseController::createGroup(const std::set<UeId>& members,
                                    const ServiceProfile& profile,
                                    int priority,
                                    std::optional<AreaId> area)
{
    if (area && !network_.hasArea(*area))
    {
        throw Error(ErrorCode::AreaUnconfigured, fmt::format("unknown MBMS area {}", area->str()));
    }
    GroupCall g = registry_.createGroup(network_, members, profile, priority);
    g.area = area;
    for (UeId ue : members)
    {
        network_.ue(ue).memberships.insert(g.id);
    }
    const GroupId id = g.id;
    groups_.emplace(id, std::move(g));
    calls_[id];
    dirty_.insert(id);
    return id;
}

const GroupCall& GcseController::group(GroupId id) const
{
    auto it = groups_.find(id);
    if (it == groups_.end())
    {
        throw Error(ErrorCode::UnknownGroup, fmt::format("unknown group {}", id.str()));
    }
    return it->second;
}

GroupCall& GcseController::mutableGroup(GroupId id)
{
    GroupCall& g = const_cast<GroupCall&>(group(id));
    dirty_.insert(id);
    return g;
}

bool GcseController::callActive(GroupId group) const
{
    auto it = calls_.find(group);
    return it != calls_.end() && it->second.active;
}

bool GcseController::mediaStarted(GroupId group, TimeMs now) const
{
    auto it = calls_.find(group);
    return it != calls_.end() && it->second.active && now >= it->second.mediaStartAt;
}

int GcseController::currentCallId(GroupId group) const
{
    auto it = calls_.find(group);
    return it == calls_.end() || !it->second.active ? 0 : it->second.callId;
}

std::optional<UeId> GcseController::floorHolder(GroupId group) const
{
    auto it = calls_.find(group);
    return it == calls_.end() ? std::nullopt : it->second.floorHolder;
}

bool GcseController::inArea(const GroupCall& g, CellId cell) const
{
    return g.area && network_.area(*g.area).cells.contains(cell);
}

std::vector<UeId> GcseController::membersInCell(GroupId group, CellId cell) const
{
    std::vector<UeId> out;
    for (UeId ue : this->group(group).members)
    {
        if (network_.ue(ue).servingCell == cell)
        {
            out.push_back(ue);
        }
    }
    return out;
}

std::vector<int> GcseController::qualitiesInCell(const GroupCall& g, CellId cell) const
{
    std::vector<int> q;
    for (UeId ue : g.members)
    {
        const UserEquipment& u = network_.ue(ue);
        if (u.servingCell == cell)
        {
            q.push_back(u.channelQuality);
        }
    }
    return q;
}

ResourceUnits GcseController::designMulticastCost(const GroupCall& g) const
{
    return multicastCost(g.profile, std::span<const int>{}, network_.area(*g.area), config_.model);
}

ResourceUnits GcseController::cellMulticastCost(const GroupCall& g, CellId cell) const
{
    return multicastCost(g.profile, qualitiesInCell(g, cell), network_.area(*g.area), config_.model);
}

std::optional<int> GcseController::cellThreshold(GroupId group, CellId cell) const
{
    const GroupCall& g = this->group(group);
    if (!inArea(g, cell))
    {
        return std::nullopt;
    }
    const std::vector<int> q = qualitiesInCell(g, cell);
    if (q.empty())
    {
        return std::nullopt;
    }
    return crossoverThreshold(g.profile, q, network_.area(*g.area), config_.model);
}

void GcseController::record(TimeMs now,
                            const GroupCall& g,
                            CellId cell,
                            std::string decision,
                            std::string trigger)
{
    int count = 0;
    for (UeId ue : g.members)
    {
        if (network_.ue(ue).servingCell == cell)
        {
            ++count;
        }
    }
    out_.decisions.push_back({now, g.id, cell, std::move(decision), std::move(trigger), count});
}

void GcseController::setRx(UeId ue, GroupId group, RxMode mode)
{
    dirty_.insert(group);
    UserEquipment& u = network_.ue(ue);
    if (mode == RxMode::None)
    {
        u.rxMode.erase(group);
    }
    else
    {
        u.rxMode[group] = mode;
    }
}

void GcseController::scheduleUli(GroupId group, TimeMs at)
{
    Effect e;
    e.atMs = at;
    e.kind = EffectKind::UliReport;
    e.group = group;
    e.callId = calls_.at(group).callId;
    out_.effects.push_back(e);
}

void GcseController::reserveOnBearer(BearerId id, CellId cell, ResourceUnits units)
{
    bearers_.bearer(id).reservations[cell] += units;
    reserved_.insert(id);
}

void GcseController::releaseBearer(GroupId group, BearerId id, TimeMs now)
{
    const Bearer& b = bearers_.bearer(id);
    for (const auto& [cell, units] : b.reservations)
    {
        ledger_.release(cell, poolOf(b.kind), group, units);
    }
    reserved_.erase(id);
    if (b.state != BearerState::Idle)
    {
        bearers_.release(id, now);
    }
    else
    {
        bearers_.bearer(id).reservations.clear();
    }
}

std::optional<TimeMs> GcseController::addUnicastReceiver(GroupCall& g,
                                                         UeId ue,
                                                         CellId cell,
                                                         TimeMs now,
                                                         const std::string& context,
                                                         bool reserve,
                                                         bool fresh)
{
    const ResourceUnits cost = unicastCost(g.profile, network_.ue(ue), config_.model);
    if (reserve && !ledger_.tryReserve(cell, Pool::Unicast, g.id, g.priority, cost))
    {
        out_.admissions.push_back({now, g.id, cell, Transport::Unicast, false, cost, {}, context});
        return std::nullopt;
    }
    const Establishment e =
        bearers_.establishUnicastBearer(ue, g, network_, now, config_.preEstablishedUnicast && !fresh);
    reserveOnBearer(e.bearer, cell, cost);

    TransportState& ts = g.perCellTransport[cell];
    ts.unicastBearers[ue] = e.bearer;
    ts.refreshMode();
    setRx(ue, g.id, RxMode::UnicastRx);
    calls_.at(g.id).dropped.erase(ue);

    Effect fx;
    fx.atMs = e.completionMs;
    fx.kind = EffectKind::BearerComplete;
    fx.bearer = e.bearer;
    fx.group = g.id;
    fx.callId = calls_.at(g.id).callId;
    out_.effects.push_back(fx);
    return e.completionMs - now;
}

void GcseController::releaseUnicast(GroupCall& g, CellId cell, UeId ue, TimeMs now)
{
    auto tsIt = g.perCellTransport.find(cell);
    if (tsIt == g.perCellTransport.end())
    {
        return;
    }
    TransportState& ts = tsIt->second;
    for (auto* bearerMap : {&ts.unicastBearers, &ts.pendingUnicast})
    {
        auto it = bearerMap->find(ue);
        if (it != bearerMap->end())
        {
            releaseBearer(g.id, it->second, now);
            bearerMap->erase(it);
        }
    }
    ts.refreshMode();
}

std::optional<TimeMs> GcseController::attachReceiver(GroupCall& g,
                                                     UeId ue,
                                                     TimeMs now,
                                                     const std::string& trigger,
                                                     bool fresh)
{
    const CellId cell = network_.ue(ue).servingCell;
    TransportState& ts = g.perCellTransport[cell];
    if (ts.multicastBearer)
    {
        setRx(ue, g.id, RxMode::MulticastRx);
        calls_.at(g.id).dropped.erase(ue);
        return TimeMs{0};
    }
    auto gap = addUnicastReceiver(g, ue, cell, now, trigger, true, fresh);
    if (!gap)
    {
        setRx(ue, g.id, RxMode::None);
        calls_.at(g.id).dropped.insert(ue);
    }
    return gap;
}

void GcseController::detachReceiver(GroupCall& g, UeId ue, CellId cell, TimeMs now)
{
    releaseUnicast(g, cell, ue, now);
    setRx(ue, g.id, RxMode::None);
}

void GcseController::releaseMulticast(GroupCall& g, CellId cell, TimeMs now, const std::string& trigger)
{
    TransportState& ts = g.perCellTransport[cell];
    bool released = false;
    for (auto* slot : {&ts.multicastBearer, &ts.pendingMulticast})
    {
        if (*slot)
        {
            releaseBearer(g.id, **slot, now);
            slot->reset();
            released = true;
        }
    }
    ts.refreshMode();
    if (released)
    {
        record(now, g, cell, "release_multicast", trigger);
    }
}

void GcseController::enforceZeroMembers(GroupCall& g, CellId cell, TimeMs now)
{
    if (config_.policy.kind != PolicyKind::DynamicActivation)
    {
        return;
    }
    auto it = g.perCellTransport.find(cell);
    if (it == g.perCellTransport.end())
    {
        return;
    }
    if (!(it->second.multicastBearer || it->second.pendingMulticast))
    {
        return;
    }
    if (membersInCell(g.id, cell).empty())
    {
        releaseMulticast(g, cell, now, "zero_members");
    }
}

void GcseController::handlePreemption(const std::vector<GroupId>& victims, TimeMs now)
{
    for (GroupId v : victims)
    {
        endCall(v, now, "preempted");
    }
}

BearerId GcseController::provisionMbmsBearer(GroupId group, TimeMs now)
{
    return bearers_.establishMbmsBearer(this->group(group), network_, MbmsSetup::PreArranged, now)
        .bearer;
}

const std::map<CellId, TransportState>& GcseController::startGroupCall(GroupId group,
                                                                       TimeMs now,
                                                                       TimeMs startupDrawMs)
{
    GroupCall& g = mutableGroup(group);
    CallState& call = calls_.at(group);
    if (call.active)
    {
        return g.perCellTransport;
    }
    const bool isStatic = config_.policy.kind == PolicyKind::StaticActivation;
    if (isStatic && (!g.area || !network_.hasArea(*g.area)))
    {
        throw Error(ErrorCode::AreaUnconfigured,
                    fmt::format("group {} has no MBMS area for static activation", g.id.str()));
    }

    std::optional<BearerId> preArranged;
    if (isStatic && config_.preEstablishedMbms)
    {
        preArranged = bearers_.preArranged(group);
        if (!preArranged || bearers_.bearer(*preArranged).state != BearerState::PreEstablished)
        {
            throw Error(ErrorCode::NoPreestablishedBearer,
                        fmt::format("group {} has no pre-established MBMS bearer", g.id.str()));
        }
    }

    // Demand per cell and transport pool, admitted atomically against a copy of the ledger.
    std::map<CellId, ResourceUnits> demand;
    if (isStatic)
    {
        const ResourceUnits perCell = designMulticastCost(g);
        for (CellId c : network_.area(*g.area).cells)
        {
            demand[c] = perCell;
        }
    }
    else
    {
        for (UeId ue : g.members)
        {
            const UserEquipment& u = network_.ue(ue);
            demand[u.servingCell] += unicastCost(g.profile, u, config_.model);
        }
    }
    const Transport transport = isStatic ? Transport::Multicast : Transport::Unicast;

    ResourceLedger trial = ledger_;
    std::vector<GroupId> victims;
    std::vector<AdmissionRecord> admissions;
    for (const auto& [cellId, units] : demand)
    {
        AdmissionResult r = admit(g, network_.cell(cellId), transport, units, trial);
        if (const auto* rej = std::get_if<Rejected>(&r))
        {
            (void)rej;
            out_.admissions.push_back({now, g.id, cellId, transport, false, units, {}, "call_start"});
            throw Error(ErrorCode::AdmissionFailed,
                        fmt::format("group {} not admitted in cell {}", g.id.str(), cellId.str()));
        }
        const auto& ok = std::get<Admitted>(r);
        victims.insert(victims.end(), ok.preempted.begin(), ok.preempted.end());
        admissions.push_back({now, g.id, cellId, transport, true, units, ok.preempted, "call_start"});
    }
    ledger_ = std::move(trial);
    out_.admissions.insert(out_.admissions.end(), admissions.begin(), admissions.end());

    call.active = true;
    call.callId = nextCallId_++;
    call.startedAt = now;
    call.floorHolder.reset();
    call.dropped.clear();
    handlePreemption(victims, now);

    SetupLatency latency;
    if (isStatic)
    {
        BearerId mbms;
        if (preArranged)
        {
            mbms = *preArranged;
            latency = setupLatency(BearerOption::PreEstablished,
                                   config_.budget,
                                   config_.schedule,
                                   now,
                                   startupDrawMs);
        }
        else
        {
            mbms = bearers_.establishMbmsBearer(g, network_, MbmsSetup::OnDemand, now).bearer;
            latency = setupLatency(BearerOption::DynamicBearer,
                                   config_.budget,
                                   config_.schedule,
                                   now,
                                   startupDrawMs);
        }
        for (const auto& [cellId, units] : demand)
        {
            reserveOnBearer(mbms, cellId, units);
            TransportState& ts = g.perCellTransport[cellId];
            ts.multicastBearer = mbms;
            ts.refreshMode();
            record(now, g, cellId, "start_multicast", "call_start");
        }
        for (UeId ue : g.members)
        {
            attachReceiver(g, ue, now, "call_start");
        }
        Effect fx;
        fx.atMs = now + latency.totalMs;
        fx.kind = EffectKind::McchBoundary;
        fx.bearer = mbms;
        fx.group = g.id;
        fx.callId = call.callId;
        out_.effects.push_back(fx);
    }
    else
    {
        latency = setupLatency(BearerOption::UnicastStart,
                               config_.budget,
                               config_.schedule,
                               now,
                               startupDrawMs,
                               config_.preEstablishedUnicast);
        for (UeId ue : g.members)
        {
            const CellId cellId = network_.ue(ue).servingCell;
            addUnicastReceiver(g, ue, cellId, now, "call_start", false);
        }
        for (const auto& [cellId, units] : demand)
        {
            record(now, g, cellId, "start_unicast", "call_start");
        }
        if (config_.policy.uliSource == UliSource::UeReported)
        {
            scheduleUli(g.id, now);
        }
        else
        {
            scheduleUli(g.id, now + config_.policy.uliIntervalMs);
        }
    }
    call.mediaStartAt = now + latency.totalMs;
    out_.setups.push_back({call.callId, g.id, now, latency});
    return g.perCellTransport;
}

void GcseController::endCall(GroupId group, TimeMs now, const std::string& trigger)
{
    GroupCall& g = mutableGroup(group);
    CallState& call = calls_.at(group);
    if (!call.active)
    {
        return;
    }
    std::set<BearerId> multicast;
    for (auto& [cellId, ts] : g.perCellTransport)
    {
        const bool hadTransport = ts.mode != TransportMode::NoTransport || ts.pendingMulticast ||
                                  !ts.pendingUnicast.empty();
        for (auto* bearerMap : {&ts.unicastBearers, &ts.pendingUnicast})
        {
            for (const auto& [ue, id] : *bearerMap)
            {
                releaseBearer(g.id, id, now);
            }
            bearerMap->clear();
        }
        for (auto* slot : {&ts.multicastBearer, &ts.pendingMulticast})
        {
            if (*slot)
            {
                multicast.insert(**slot);
                slot->reset();
            }
        }
        ts.refreshMode();
        if (hadTransport)
        {
            record(now, g, cellId, "release", trigger);
        }
    }
    const auto preArranged = bearers_.preArranged(group);
    for (BearerId id : multicast)
    {
        releaseBearer(g.id, id, now);
        if (preArranged && *preArranged == id && config_.preEstablishedMbms)
        {
            bearers_.rearm(id, now);
        }
    }
    for (UeId ue : g.members)
    {
        setRx(ue, g.id, RxMode::None);
    }
    call.active = false;
    call.floorHolder.reset();
    call.dropped.clear();
}

void GcseController::joinGroup(GroupId group, UeId ue, TimeMs now)
{
    GroupCall& g = mutableGroup(group);
    if (g.members.contains(ue))
    {
        return;
    }
    g.members = pmrsim::joinGroup(g, ue, network_, registry_.maxGroupSize()).members;
    network_.ue(ue).memberships.insert(group);
    if (callActive(group))
    {
        attachReceiver(g, ue, now, "join");
        if (config_.policy.kind == PolicyKind::DynamicActivation &&
            config_.policy.uliSource == UliSource::UeReported)
        {
            ++out_.coreNetworkMessages;
            scheduleUli(group, now);
        }
    }
}

void GcseController::leaveGroup(GroupId group, UeId ue, TimeMs now)
{
    GroupCall& g = mutableGroup(group);
    if (!g.members.contains(ue))
    {
        return;
    }
    if (g.members.size() == 1)
    {
        throw Error(ErrorCode::EmptyGroup,
                    fmt::format("{} is the last member of {}", ue.str(), g.id.str()));
    }
    UserEquipment& u = network_.ue(ue);
    const CellId cell = u.servingCell;
    detachReceiver(g, ue, cell, now);
    g.members.erase(ue);
    u.memberships.erase(group);
    u.lossEstimate.erase(group);
    calls_.at(group).dropped.erase(ue);
    if (calls_.at(group).floorHolder == ue)
    {
        calls_.at(group).floorHolder.reset();
    }
    if (callActive(group))
    {
        enforceZeroMembers(g, cell, now);
        if (config_.policy.kind == PolicyKind::DynamicActivation &&
            config_.policy.uliSource == UliSource::UeReported)
        {
            ++out_.coreNetworkMessages;
            scheduleUli(group, now);
        }
    }
}

UliReport GcseController::currentCounts(GroupId group, UliSource source) const
{
    const GroupCall& g = this->group(group);
    UliReport report;
    report.group = group;
    report.source = source;
    if (g.area)
    {
        for (CellId c : network_.area(*g.area).cells)
        {
            report.counts[c] = 0;
        }
    }
    for (UeId ue : g.members)
    {
        ++report.counts[network_.ue(ue).servingCell];
    }
    return report;
}

std::vector<SwitchDecision> GcseController::evaluateUli(const UliReport& report) const
{
    const GroupCall& g = group(report.group);
    if (config_.policy.kind == PolicyKind::StaticActivation)
    {
        return {};
    }
    long total = 0;
    for (const auto& [cell, count] : report.counts)
    {
        if (count < 0)
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("negative count for cell {}", cell.str()));
        }
        total += count;
    }
    if (total > static_cast<long>(g.members.size()))
    {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("report counts {} members, group {} has {}",
                                total,
                                g.id.str(),
                                g.members.size()));
    }

    const bool active = callActive(report.group);
    std::vector<SwitchDecision> decisions;
    for (const auto& [cell, count] : report.counts)
    {
        SwitchDecision d{cell, SwitchKind::NoChange, count, std::nullopt};
        if (!active || !inArea(g, cell))
        {
            decisions.push_back(d);
            continue;
        }
        d.threshold = cellThreshold(report.group, cell);

        const TransportState* ts = nullptr;
        if (auto it = g.perCellTransport.find(cell); it != g.perCellTransport.end())
        {
            ts = &it->second;
        }
        const bool multicastSide = ts && (ts->multicastBearer || ts->pendingMulticast);
        const bool switchingDown = ts && !ts->pendingUnicast.empty();

        if (count == 0)
        {
            if (multicastSide)
            {
                d.kind = SwitchKind::MulticastToUnicast;
            }
        }
        else if (d.threshold)
        {
            if (!multicastSide && count >= *d.threshold)
            {
                d.kind = SwitchKind::UnicastToMulticast;
            }
            else if (multicastSide && !switchingDown &&
                     count < *d.threshold - config_.policy.switchHysteresis)
            {
                d.kind = SwitchKind::MulticastToUnicast;
            }
        }
        decisions.push_back(d);
    }
    return decisions;
}

std::vector<SwitchDecision> GcseController::handleUli(const UliReport& report, TimeMs now)
{
    std::vector<SwitchDecision> decisions = evaluateUli(report);
    GroupCall& g = mutableGroup(report.group);
    for (const SwitchDecision& d : decisions)
    {
        switch (d.kind)
        {
        case SwitchKind::NoChange:
            break;
        case SwitchKind::UnicastToMulticast:
            switchToMulticast(g, d.cell, d.memberCount, now);
            break;
        case SwitchKind::MulticastToUnicast:
            if (d.memberCount == 0)
            {
                releaseMulticast(g, d.cell, now, "zero_members");
            }
            else
            {
                switchToUnicast(g, d.cell, d.memberCount, now);
            }
            break;
        }
    }
    return decisions;
}

void GcseController::onUliEvent(GroupId group, int callId, TimeMs now)
{
    if (!callActive(group) || calls_.at(group).callId != callId)
    {
        return;
    }
    const UliSource source = config_.policy.uliSource;
    if (source == UliSource::UeReported)
    {
        ++out_.coreNetworkMessages;
    }
    handleUli(currentCounts(group, source), now);
    if (source == UliSource::PgwUli && callActive(group))
    {
        scheduleUli(group, now + config_.policy.uliIntervalMs);
    }
}

void GcseController::switchToMulticast(GroupCall& g, CellId cell, int /*count*/, TimeMs now)
{
    const ResourceUnits cost = cellMulticastCost(g, cell);
    AdmissionResult r = admit(g, network_.cell(cell), Transport::Multicast, cost, ledger_);
    if (std::holds_alternative<Rejected>(r))
    {
        out_.admissions.push_back({now, g.id, cell, Transport::Multicast, false, cost, {}, "switch"});
        return;
    }
    const auto victims = std::get<Admitted>(r).preempted;
    out_.admissions.push_back({now, g.id, cell, Transport::Multicast, true, cost, victims, "switch"});

    const Establishment e = bearers_.establishMbmsBearer(g, network_, MbmsSetup::OnDemand, now, cell);
    reserveOnBearer(e.bearer, cell, cost);
    TransportState& ts = g.perCellTransport[cell];
    ts.pendingMulticast = e.bearer;
    record(now, g, cell, "to_multicast", "uli");

    Effect fx;
    fx.atMs = e.completionMs;
    fx.kind = EffectKind::McchBoundary;
    fx.bearer = e.bearer;
    fx.group = g.id;
    fx.callId = calls_.at(g.id).callId;
    out_.effects.push_back(fx);

    handlePreemption(victims, now);
}

void GcseController::switchToUnicast(GroupCall& g, CellId cell, int /*count*/, TimeMs now)
{
    TransportState& ts = g.perCellTransport[cell];
    if (ts.pendingMulticast && !ts.multicastBearer)
    {
        releaseBearer(g.id, *ts.pendingMulticast, now);
        ts.pendingMulticast.reset();
        record(now, g, cell, "cancel_multicast", "uli");
        return;
    }
    if (!ts.multicastBearer || !ts.pendingUnicast.empty())
    {
        return;
    }

    std::vector<UeId> receivers;
    ResourceUnits demand = 0;
    for (UeId ue : membersInCell(g.id, cell))
    {
        if (network_.ue(ue).modeFor(g.id) == RxMode::MulticastRx)
        {
            receivers.push_back(ue);
            demand += unicastCost(g.profile, network_.ue(ue), config_.model);
        }
    }
    if (receivers.empty())
    {
        releaseMulticast(g, cell, now, "uli");
        return;
    }
    AdmissionResult r = admit(g, network_.cell(cell), Transport::Unicast, demand, ledger_);
    if (std::holds_alternative<Rejected>(r))
    {
        out_.admissions.push_back({now, g.id, cell, Transport::Unicast, false, demand, {}, "switch"});
        return;
    }
    const auto victims = std::get<Admitted>(r).preempted;
    out_.admissions.push_back({now, g.id, cell, Transport::Unicast, true, demand, victims, "switch"});

    for (UeId ue : receivers)
    {
        const Establishment e =
            bearers_.establishUnicastBearer(ue, g, network_, now, config_.preEstablishedUnicast);
        reserveOnBearer(e.bearer, cell, unicastCost(g.profile, network_.ue(ue), config_.model));
        ts.pendingUnicast[ue] = e.bearer;

        Effect fx;
        fx.atMs = e.completionMs;
        fx.kind = EffectKind::BearerComplete;
        fx.bearer = e.bearer;
        fx.group = g.id;
        fx.callId = calls_.at(g.id).callId;
        out_.effects.push_back(fx);
    }
    record(now, g, cell, "to_unicast", "uli");
    handlePreemption(victims, now);
}

void GcseController::finalizeMulticast(GroupCall& g, CellId cell, TimeMs now)
{
    TransportState& ts = g.perCellTransport[cell];
    const BearerId id = *ts.pendingMulticast;
    bearers_.activate(id, now);
    ts.multicastBearer = id;
    ts.pendingMulticast.reset();
    for (UeId ue : membersInCell(g.id, cell))
    {
        releaseUnicast(g, cell, ue, now);
        setRx(ue, g.id, RxMode::MulticastRx);
        calls_.at(g.id).dropped.erase(ue);
    }
    ts.refreshMode();
    record(now, g, cell, "multicast_active", "mcch_boundary");
}

void GcseController::finalizeUnicast(GroupCall& g, CellId cell, TimeMs now)
{
    TransportState& ts = g.perCellTransport[cell];
    for (const auto& [ue, id] : ts.pendingUnicast)
    {
        ts.unicastBearers[ue] = id;
        setRx(ue, g.id, RxMode::UnicastRx);
    }
    ts.pendingUnicast.clear();
    if (ts.multicastBearer)
    {
        releaseBearer(g.id, *ts.multicastBearer, now);
        ts.multicastBearer.reset();
    }
    ts.refreshMode();
    // Members that arrived while the switch was in flight were on multicast only.
    for (UeId ue : membersInCell(g.id, cell))
    {
        if (network_.ue(ue).modeFor(g.id) == RxMode::MulticastRx)
        {
            attachReceiver(g, ue, now, "switch");
        }
    }
    record(now, g, cell, "unicast_active", "bearer_complete");
}

void GcseController::onBearerComplete(BearerId id, TimeMs now)
{
    Bearer& b = bearers_.bearer(id);
    if (b.state == BearerState::PreEstablished || b.state == BearerState::Activating)
    {
        bearers_.activate(id, now);
    }
    else
    {
        return;
    }
    if (b.kind != BearerKind::Unicast || !b.ue)
    {
        return;
    }
    GroupCall& g = mutableGroup(b.group);
    const CellId cell = b.cells.front();
    auto tsIt = g.perCellTransport.find(cell);
    if (tsIt == g.perCellTransport.end())
    {
        return;
    }
    TransportState& ts = tsIt->second;
    auto pit = ts.pendingUnicast.find(*b.ue);
    if (pit == ts.pendingUnicast.end() || pit->second != id)
    {
        return;
    }
    const bool allDone = std::all_of(ts.pendingUnicast.begin(), ts.pendingUnicast.end(), [&](const auto& kv) {
        return bearers_.bearer(kv.second).state == BearerState::Active;
    });
    if (allDone)
    {
        finalizeUnicast(g, cell, now);
    }
}

void GcseController::onMcchBoundary(BearerId id, TimeMs now)
{
    const Bearer& b = bearers_.bearer(id);
    if (b.kind != BearerKind::Mbms)
    {
        return;
    }
    GroupCall& g = mutableGroup(b.group);
    CallState& call = calls_.at(g.id);
    if (!call.active)
    {
        return;
    }
    if (config_.policy.kind == PolicyKind::StaticActivation)
    {
        if (b.state == BearerState::PreEstablished || b.state == BearerState::Activating)
        {
            bearers_.activate(id, now);
        }
        return;
    }
    for (auto& [cellId, ts] : g.perCellTransport)
    {
        if (ts.pendingMulticast && *ts.pendingMulticast == id)
        {
            finalizeMulticast(g, cellId, now);
            return;
        }
    }
}

FallbackDecision GcseController::handleLossReport(UeId ue, GroupId group, double measuredLoss, TimeMs now)
{
    GroupCall& g = mutableGroup(group);
    UserEquipment& u = network_.ue(ue);
    if (!g.members.contains(ue) || u.modeFor(group) != RxMode::MulticastRx)
    {
        throw Error(ErrorCode::NotMulticastReceiver,
                    fmt::format("{} is not receiving {} via multicast", ue.str(), g.id.str()));
    }
    u.lossEstimate[group] = measuredLoss;
    if (!(measuredLoss > config_.policy.lossThreshold))
    {
        return {};
    }
    const CellId cell = u.servingCell;
    if (!addUnicastReceiver(g, ue, cell, now, "loss_fallback", true))
    {
        return {};
    }
    record(now, g, cell, "fallback_unicast", "loss");
    return {FallbackKind::FallbackToUnicast, g.perCellTransport[cell].unicastBearers.at(ue)};
}

void GcseController::handleHandover(UeId ue, CellId fromCell, CellId toCell, TimeMs now)
{
    if (!network_.hasCell(toCell))
    {
        throw Error(ErrorCode::UnknownCell, fmt::format("unknown cell {}", toCell.str()));
    }
    UserEquipment& u = network_.ue(ue);
    const CellId previous = u.servingCell;
    (void)fromCell;
    u.servingCell = toCell;
    dirty_.insert(u.memberships.begin(), u.memberships.end());

    for (GroupId gid : std::set<GroupId>(u.memberships))
    {
        if (!callActive(gid))
        {
            continue;
        }
        GroupCall& g = mutableGroup(gid);
        releaseUnicast(g, previous, ue, now);
        setRx(ue, gid, RxMode::None);
        const auto gap = attachReceiver(g, ue, now, "handover", true);
        if (gap)
        {
            out_.gaps.push_back({now, ue, gid, previous, toCell, *gap});
        }
        enforceZeroMembers(g, previous, now);
        if (config_.policy.kind == PolicyKind::DynamicActivation &&
            config_.policy.uliSource == UliSource::UeReported)
        {
            ++out_.coreNetworkMessages;
            scheduleUli(gid, now);
        }
    }
}

UplinkRecord GcseController::uplinkTalkBurst(UeId ue, GroupId group, TimeMs now, int talkerPriority)
{
    const GroupCall& g = this->group(group);
    if (!g.members.contains(ue))
    {
        throw Error(ErrorCode::UnknownUe, fmt::format("{} is not a member of {}", ue.str(), g.id.str()));
    }
    CallState& call = calls_.at(group);
    UplinkRecord rec;
    rec.atMs = now;
    rec.ue = ue;
    rec.group = group;
    if (call.floorHolder && *call.floorHolder != ue)
    {
        if (call.floorPriority >= talkerPriority)
        {
            throw FloorTaken(*call.floorHolder);
        }
        rec.preemptedTalker = call.floorHolder;
    }
    call.floorHolder = ue;
    call.floorPriority = talkerPriority;
    rec.uplink = Transport::Unicast;
    rec.downlink = network_.ue(ue).modeFor(group) == RxMode::MulticastRx ? Transport::Multicast
                                                                          : Transport::Unicast;
    out_.uplink.push_back(rec);
    return rec;
}

void GcseController::releaseFloor(UeId ue, GroupId group)
{
    CallState& call = calls_.at(this->group(group).id);
    if (call.floorHolder == ue)
    {
        call.floorHolder.reset();
        call.floorPriority = 0;
    }
}

ResourceUnits GcseController::conservationDrift() const
{
    std::map<std::pair<CellId, Pool>, ResourceUnits> fromBearers;
    for (BearerId id : reserved_)
    {
        const Bearer& b = bearers_.bearer(id);
        for (const auto& [cell, units] : b.reservations)
        {
            fromBearers[{cell, poolOf(b.kind)}] += units;
        }
    }
    ResourceUnits drift = 0;
    for (const auto& [cellId, cell] : network_.cells())
    {
        for (Pool p : {Pool::Unicast, Pool::Multicast})
        {
            auto it = fromBearers.find({cellId, p});
            const ResourceUnits expected = it == fromBearers.end() ? 0 : it->second;
            drift += std::abs(ledger_.committed(cellId, p) - expected);
            if (ledger_.committed(cellId, p) > ledger_.capacity(cellId, p))
            {
                drift += ledger_.committed(cellId, p) - ledger_.capacity(cellId, p);
            }
        }
    }
    return drift;
}

int GcseController::pathViolations(bool full) const
{
    if (full)
    {
        int violations = 0;
        for (const auto& [gid, g] : groups_)
        {
            violations += groupPathViolations(gid);
        }
        return violations;
    }
    for (GroupId gid : dirty_)
    {
        pathCache_[gid] = groupPathViolations(gid);
    }
    dirty_.clear();
    int violations = 0;
    for (const auto& [gid, n] : pathCache_)
    {
        violations += n;
    }
    return violations;
}

int GcseController::groupPathViolations(GroupId gid) const
{
    const GroupCall& g = groups_.at(gid);
    const CallState& call = calls_.at(gid);
    int violations = 0;
    if (!call.active)
    {
        for (UeId ue : g.members)
        {
            if (network_.ue(ue).modeFor(gid) != RxMode::None)
            {
                ++violations;
            }
        }
        return violations;
    }
    for (UeId ue : g.members)
    {
        if (call.dropped.contains(ue))
        {
            continue;
        }
        const UserEquipment& u = network_.ue(ue);
        const auto tsIt = g.perCellTransport.find(u.servingCell);
        const bool unicast = tsIt != g.perCellTransport.end() && tsIt->second.unicastBearers.contains(ue);
        const bool multicast = tsIt != g.perCellTransport.end() && tsIt->second.multicastBearer.has_value();
        const RxMode rx = u.modeFor(gid);
        const bool viaUnicast = rx == RxMode::UnicastRx && unicast;
        const bool viaMulticast = rx == RxMode::MulticastRx && multicast && !unicast;
        if (viaUnicast == viaMulticast)
        {
            ++violations;
        }
    }
    for (const auto& [cellId, ts] : g.perCellTransport)
    {
        if (!ts.invariantsHold())
        {
            ++violations;
        }
        for (const auto& [ue, id] : ts.unicastBearers)
        {
            if (!g.members.contains(ue) || network_.ue(ue).servingCell != cellId)
            {
                ++violations;
            }
        }
    }
    return violations;
}

int GcseController::zeroMemberViolations() const
{
    if (config_.policy.kind != PolicyKind::DynamicActivation)
    {
        return 0;
    }
    int violations = 0;
    for (const auto& [gid, g] : groups_)
    {
        for (const auto& [cellId, ts] : g.perCellTransport)
        {
            if ((ts.mode == TransportMode::MulticastActive || ts.mode == TransportMode::Mixed) &&
                membersInCell(gid, cellId).empty())
            {
                ++violations;
            }
        }
    }
    return violations;
}

bool GcseController::quiescent() const
{
    for (const auto& [gid, g] : groups_)
    {
        for (const auto& [cellId, ts] : g.perCellTransport)
        {
            if (ts.pendingMulticast || !ts.pendingUnicast.empty())
            {
                return false;
            }
        }
    }
    return true;
}

int GcseController::receiversWithPath(GroupId group) const
{
    if (!callActive(group))
    {
        return 0;
    }
    int n = 0;
    for (UeId ue : this->group(group).members)
    {
        if (network_.ue(ue).modeFor(group) != RxMode::None)
        {
            ++n;
        }
    }
    return n;
}

GcseOutputs GcseController::takeOutputs()
{
    GcseOutputs out = std::move(out_);
    out_ = GcseOutputs{};
    return out;
}

} // namespace pmrsim
