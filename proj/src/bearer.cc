/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/bearer.h"

#include <fmt/format.h>

namespace pmrsim
{

std::string_view toString(BearerKind kind)
{
    return kind == BearerKind::Unicast ? "unicast" : "mbms";
}

std::string_view toString(BearerState state)
{
    switch (state)
    {
    case BearerState::Idle:
        return "Idle";
    case BearerState::PreEstablished:
        return "PreEstablished";
    case BearerState::Activating:
        return "Activating";
    case BearerState::Active:
        return "Active";
    case BearerState::Releasing:
        return "Releasing";
    }
    return "?";
}

std::string_view toString(BearerOption option)
{
    switch (option)
    {
    case BearerOption::PreEstablished:
        return "pre_established";
    case BearerOption::DynamicBearer:
        return "dynamic_bearer";
    case BearerOption::UnicastStart:
        return "unicast_start";
    }
    return "?";
}

bool legalTransition(BearerState from, BearerState to)
{
    using S = BearerState;
    return (from == S::Idle && (to == S::PreEstablished || to == S::Activating)) ||
           (from == S::PreEstablished && to == S::Active) ||
           (from == S::Activating && to == S::Active) ||
           (from == S::Active && to == S::Releasing) || (from == S::Releasing && to == S::Idle);
}

std::optional<TimeMs> Bearer::timestamp(BearerState s) const
{
    for (auto it = history.rbegin(); it != history.rend(); ++it)
    {
        if (it->first == s)
        {
            return it->second;
        }
    }
    return std::nullopt;
}

void Bearer::transition(BearerState to, TimeMs at)
{
    if (!legalTransition(state, to))
    {
        throw Error(ErrorCode::IllegalTransition,
                    fmt::format("bearer {}: {} -> {}", id.str(), toString(state), toString(to)));
    }
    if (!history.empty() && at < history.back().second)
    {
        throw Error(ErrorCode::IllegalTransition,
                    fmt::format("bearer {}: transition at {} ms precedes {} ms",
                                id.str(),
                                at,
                                history.back().second));
    }
    state = to;
    history.emplace_back(to, at);
}

void LatencyBudget::validate() const
{
    if (callStartupMinMs < 0 || callStartupMaxMs < callStartupMinMs)
    {
        throw Error(ErrorCode::ValidationError, "budget.call_startup_ms must be a range [min, max]");
    }
    if (radioIfMs < 0 || networkIfMs < 0 || processingMs < 0 || otherNetworkMs() < 0)
    {
        throw Error(ErrorCode::ValidationError,
                    "budget components must be >= 0 and fit within bearer_establishment_ms");
    }
    if (requirementMs <= 0)
    {
        throw Error(ErrorCode::ValidationError, "budget.requirement_ms must be positive");
    }
}

SetupLatency setupLatency(BearerOption option,
                          const LatencyBudget& budget,
                          const McchSchedule& schedule,
                          TimeMs arrivalMs,
                          TimeMs startupDrawMs,
                          bool preEstablishedUnicast)
{
    if (startupDrawMs < budget.callStartupMinMs || startupDrawMs > budget.callStartupMaxMs)
    {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("startup draw {} ms outside [{}, {}]",
                                startupDrawMs,
                                budget.callStartupMinMs,
                                budget.callStartupMaxMs));
    }

    SetupLatency s;
    s.option = option;
    s.startupMs = startupDrawMs;
    s.components.push_back({"call_startup", startupDrawMs});

    switch (option)
    {
    case BearerOption::PreEstablished:
        s.mcchWaitMs = mcchWait(arrivalMs, schedule);
        break;
    case BearerOption::DynamicBearer:
        s.components.push_back({"radio_interface", budget.radioIfMs});
        s.components.push_back({"network_interface", budget.networkIfMs});
        s.components.push_back({"request_processing", budget.processingMs});
        s.components.push_back({"other_network", budget.otherNetworkMs()});
        s.bearerMs = budget.bearerEstablishmentMs;
        s.mcchWaitMs = mcchWait(arrivalMs, schedule);
        break;
    case BearerOption::UnicastStart:
        s.bearerMs = preEstablishedUnicast ? 0 : budget.unicastEstablishmentMs();
        s.components.push_back({"unicast_bearer", s.bearerMs});
        break;
    }
    if (option != BearerOption::UnicastStart)
    {
        s.components.push_back({"mcch_wait", s.mcchWaitMs});
    }

    s.totalMs = 0;
    for (const auto& c : s.components)
    {
        s.totalMs += c.ms;
    }
    return s;
}

BearerId BearerTable::nextId()
{
    return BearerId{next_++};
}

Establishment BearerTable::establishMbmsBearer(const GroupCall& group,
                                               const Network& network,
                                               MbmsSetup when,
                                               TimeMs now,
                                               std::optional<CellId> cell)
{
    if (!group.area || !network.hasArea(*group.area))
    {
        throw Error(ErrorCode::AreaUnconfigured,
                    fmt::format("group {} has no configured MBMS area", group.id.str()));
    }
    const MbmsArea& area = network.area(*group.area);
    if (cell && !area.cells.contains(*cell))
    {
        throw Error(ErrorCode::AreaUnconfigured,
                    fmt::format("cell {} is outside area {}", cell->str(), area.id.str()));
    }

    if (when == MbmsSetup::PreArranged)
    {
        if (auto existing = preArranged(group.id))
        {
            return {*existing, now};
        }
    }

    Bearer b;
    b.id = nextId();
    b.kind = BearerKind::Mbms;
    b.qosClass = group.profile.qosClass;
    b.group = group.id;
    b.tmgi = group.tmgi;
    b.area = area.id;
    if (cell)
    {
        b.cells.push_back(*cell);
    }
    else
    {
        b.cells.assign(area.cells.begin(), area.cells.end());
    }
    b.history.emplace_back(BearerState::Idle, now);

    Establishment e{b.id, now};
    if (when == MbmsSetup::PreArranged)
    {
        b.transition(BearerState::PreEstablished, now);
        preArranged_[group.id] = b.id;
    }
    else
    {
        b.transition(BearerState::Activating, now);
        e.completionMs = nextMcchBoundary(now + budget_.bearerEstablishmentMs, schedule_);
    }
    bearers_.emplace(b.id, std::move(b));
    return e;
}

Establishment BearerTable::establishUnicastBearer(UeId ue,
                                                  const GroupCall& group,
                                                  const Network& network,
                                                  TimeMs now,
                                                  bool preEstablished)
{
    if (!network.hasUe(ue))
    {
        throw Error(ErrorCode::UnknownUe, fmt::format("unknown UE {}", ue.str()));
    }
    const auto key = std::make_pair(ue, group.id);
    if (auto it = unicast_.find(key); it != unicast_.end())
    {
        const Bearer& existing = bearers_.at(it->second);
        if (existing.state != BearerState::Idle)
        {
            const auto done = existing.timestamp(BearerState::Active);
            return {existing.id, existing.state == BearerState::Active && done ? *done : now};
        }
    }

    Bearer b;
    b.id = nextId();
    b.kind = BearerKind::Unicast;
    b.qosClass = group.profile.qosClass;
    b.group = group.id;
    b.ue = ue;
    b.cells.push_back(network.ue(ue).servingCell);
    b.history.emplace_back(BearerState::Idle, now);

    Establishment e{b.id, now};
    if (preEstablished)
    {
        b.transition(BearerState::PreEstablished, now);
    }
    else
    {
        b.transition(BearerState::Activating, now);
        e.completionMs = now + budget_.unicastEstablishmentMs();
    }
    unicast_[key] = b.id;
    bearers_.emplace(b.id, std::move(b));
    return e;
}

const Bearer& BearerTable::bearer(BearerId id) const
{
    auto it = bearers_.find(id);
    if (it == bearers_.end())
    {
        throw Error(ErrorCode::ValidationError, fmt::format("unknown bearer {}", id.str()));
    }
    return it->second;
}

Bearer& BearerTable::bearer(BearerId id)
{
    return const_cast<Bearer&>(std::as_const(*this).bearer(id));
}

void BearerTable::activate(BearerId id, TimeMs now)
{
    bearer(id).transition(BearerState::Active, now);
}

void BearerTable::release(BearerId id, TimeMs now)
{
    Bearer& b = bearer(id);
    if (b.state == BearerState::PreEstablished || b.state == BearerState::Activating)
    {
        b.transition(BearerState::Active, now);
    }
    if (b.state == BearerState::Active)
    {
        b.transition(BearerState::Releasing, now);
    }
    if (b.state == BearerState::Releasing)
    {
        b.transition(BearerState::Idle, now);
    }
    b.reservations.clear();
}

void BearerTable::rearm(BearerId id, TimeMs now)
{
    bearer(id).transition(BearerState::PreEstablished, now);
}

std::optional<BearerId> BearerTable::preArranged(GroupId group) const
{
    auto it = preArranged_.find(group);
    if (it == preArranged_.end())
    {
        return std::nullopt;
    }
    return it->second;
}

} // namespace pmrsim
