/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/sim.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace pmrsim
{

std::string_view toString(EventKind kind)
{
    switch (kind)
    {
    case EventKind::CallRequest:
        return "CallRequest";
    case EventKind::BearerComplete:
        return "BearerComplete";
    case EventKind::McchBoundary:
        return "McchBoundary";
    case EventKind::UliReport:
        return "UliReport";
    case EventKind::LossReport:
        return "LossReport";
    case EventKind::Handover:
        return "Handover";
    case EventKind::TalkBurst:
        return "TalkBurst";
    case EventKind::CallEnd:
        return "CallEnd";
    }
    return "?";
}

std::string Event::traceLine() const
{
    std::string line = fmt::format("{} {} {}", timeMs, seq, toString(kind));
    switch (kind)
    {
    case EventKind::CallRequest:
        line += fmt::format(" group={}", group.str());
        break;
    case EventKind::BearerComplete:
    case EventKind::McchBoundary:
        line += fmt::format(" group={} call={} bearer={}", group.str(), callId, bearer.str());
        break;
    case EventKind::UliReport:
    case EventKind::CallEnd:
        line += fmt::format(" group={} call={}", group.str(), callId);
        break;
    case EventKind::LossReport:
        line += fmt::format(" ue={}", ue.str());
        break;
    case EventKind::Handover:
        line += fmt::format(" ue={} to={}", ue.str(), cell.str());
        break;
    case EventKind::TalkBurst:
        line += fmt::format(" group={} call={} ue={} phase={}",
                            group.str(),
                            callId,
                            ue.str(),
                            release ? "end" : "start");
        break;
    }
    return line;
}

void Scenario::validate() const
{
    if (durationMs <= 0)
    {
        throw Error(ErrorCode::ValidationError, "duration_ms must be positive");
    }
    std::set<CellId> cellIds;
    for (const Cell& c : cells)
    {
        if (!cellIds.insert(c.id).second)
        {
            throw Error(ErrorCode::ValidationError, fmt::format("duplicate cell {}", c.id.str()));
        }
        if (c.mbsfnSubframes < 0 || c.mbsfnSubframes > kMaxMbsfnSubframes)
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("cell {}: mbsfn_subframes {} exceeds the ceiling of {} of {}",
                                    c.id.str(),
                                    c.mbsfnSubframes,
                                    kMaxMbsfnSubframes,
                                    kSubframesPerFrame));
        }
    }
    std::set<AreaId> areaIds;
    for (const MbmsArea& a : areas)
    {
        if (!areaIds.insert(a.id).second)
        {
            throw Error(ErrorCode::ValidationError, fmt::format("duplicate area {}", a.id.str()));
        }
        a.validate();
        for (CellId c : a.cells)
        {
            if (!cellIds.contains(c))
            {
                throw Error(ErrorCode::ValidationError,
                            fmt::format("area {} references unknown cell {}", a.id.str(), c.str()));
            }
        }
    }
    std::set<UeId> ueIds;
    for (const UserEquipment& u : ues)
    {
        if (!ueIds.insert(u.id).second)
        {
            throw Error(ErrorCode::ValidationError, fmt::format("duplicate UE {}", u.id.str()));
        }
        if (!cellIds.contains(u.servingCell))
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("UE {} placed in unknown cell {}", u.id.str(), u.servingCell.str()));
        }
        if (u.channelQuality < 0 || u.channelQuality > model.qMax())
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("UE {} quality {} outside [0, {}]",
                                    u.id.str(),
                                    u.channelQuality,
                                    model.qMax()));
        }
    }
    for (std::size_t i = 0; i < groups.size(); ++i)
    {
        const GroupSpec& g = groups[i];
        if (g.members.empty())
        {
            throw Error(ErrorCode::ValidationError, fmt::format("group {} has no members", i));
        }
        if (g.members.size() > maxGroupSize)
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("group {} has {} members, limit is {}",
                                    i,
                                    g.members.size(),
                                    maxGroupSize));
        }
        for (UeId u : g.members)
        {
            if (!ueIds.contains(u))
            {
                throw Error(ErrorCode::ValidationError,
                            fmt::format("group {} references unknown UE {}", i, u.str()));
            }
        }
        if (g.area && !areaIds.contains(*g.area))
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("group {} references unknown area {}", i, g.area->str()));
        }
        if (policy.kind == PolicyKind::StaticActivation && !g.area)
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("group {} needs an MBMS area under static activation", i));
        }
    }
    for (const auto& [cell, next] : mobility.neighbors)
    {
        if (!cellIds.contains(cell))
        {
            throw Error(ErrorCode::ValidationError,
                        fmt::format("mobility references unknown cell {}", cell.str()));
        }
        for (CellId n : next)
        {
            if (!cellIds.contains(n))
            {
                throw Error(ErrorCode::ValidationError,
                            fmt::format("cell {} has unknown neighbor {}", cell.str(), n.str()));
            }
        }
    }
    if (arrivals.meanInterarrivalMs <= 0 || arrivals.meanDurationMs <= 0 || arrivals.spreadMs < 0 ||
        arrivals.maxCalls < 0)
    {
        throw Error(ErrorCode::ValidationError, "arrival parameters must be positive");
    }
    if (mobility.meanDwellMs <= 0 || loss.meanIntervalMs <= 0 || talk.meanIntervalMs <= 0 ||
        talk.burstMs <= 0 || metrics.sampleIntervalMs <= 0)
    {
        throw Error(ErrorCode::ValidationError, "mean intervals must be positive");
    }
    if (loss.maxLoss < 0.0 || loss.maxLoss > 1.0)
    {
        throw Error(ErrorCode::ValidationError, "loss.max_loss must be in [0, 1]");
    }
    if (schedule.modificationPeriodMs <= 0)
    {
        throw Error(ErrorCode::ValidationError, "schedule.mcch_period_ms must be positive");
    }
    policy.validate();
    budget.validate();
    model.validate();
}

bool MetricsSink::empty() const
{
    return setupLatencies.empty() && throughputSeries.empty() && switchEvents.empty() &&
           continuityGaps.empty() && admissionOutcomes.empty() && utilizationSeries.empty() &&
           uplink.empty();
}

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Network buildNetwork(const Scenario& s)
{
    Network net;
    for (const Cell& c : s.cells)
    {
        net.addCell(c);
    }
    for (const MbmsArea& a : s.areas)
    {
        net.addArea(a);
    }
    for (UserEquipment u : s.ues)
    {
        u.memberships.clear();
        u.rxMode.clear();
        u.lossEstimate.clear();
        net.registerUe(std::move(u));
    }
    return net;
}

GcseConfig buildConfig(const Scenario& s)
{
    GcseConfig c;
    c.policy = s.policy;
    c.model = s.model;
    c.budget = s.budget;
    c.schedule = s.schedule;
    c.preEstablishedMbms = s.preEstablishedMbms;
    c.preEstablishedUnicast = s.preEstablishedUnicast;
    return c;
}

const Scenario& validated(const Scenario& s)
{
    s.validate();
    return s;
}

} // namespace

std::mt19937_64 makeStream(std::uint64_t seed, RngStream stream)
{
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

Simulator::Simulator(const Scenario& scenario)
    : scenario_(validated(scenario)),
      gcse_(buildNetwork(scenario_), buildConfig(scenario_)),
      arrivals_(makeStream(scenario_.seed, RngStream::Arrivals)),
      mobility_(makeStream(scenario_.seed, RngStream::Mobility)),
      startup_(makeStream(scenario_.seed, RngStream::Startup)),
      loss_(makeStream(scenario_.seed, RngStream::Loss)),
      talk_(makeStream(scenario_.seed, RngStream::Talk))
{
    for (const GroupSpec& spec : scenario_.groups)
    {
        const GroupId id = gcse_.createGroup(spec.members, spec.profile, spec.priority, spec.area);
        groupIndex_[id] = groupIds_.size();
        groupIds_.push_back(id);
        if (scenario_.policy.kind == PolicyKind::StaticActivation && scenario_.preEstablishedMbms)
        {
            gcse_.provisionMbmsBearer(id, 0);
        }
    }
    drainOutputs();

    for (GroupId id : groupIds_)
    {
        if (scenario_.arrivals.mode == ArrivalMode::Once)
        {
            std::uniform_int_distribution<TimeMs> spread(0, scenario_.arrivals.spreadMs);
            scheduleRequest(id, spread(arrivals_));
        }
        else
        {
            scheduleRequest(id, drawExponential(arrivals_, scenario_.arrivals.meanInterarrivalMs));
        }
    }
    for (const auto& [ueId, ue] : gcse_.network().ues())
    {
        if (scenario_.mobility.enabled && scenario_.cells.size() > 1)
        {
            scheduleNextHandover(ueId, 0);
        }
        if (scenario_.loss.enabled)
        {
            scheduleNextLoss(ueId, 0);
        }
    }
}

TimeMs Simulator::drawExponential(std::mt19937_64& rng, double mean)
{
    std::exponential_distribution<double> d(1.0 / mean);
    return static_cast<TimeMs>(std::llround(d(rng)));
}

void Simulator::schedule(Event e)
{
    if (e.timeMs < now_)
    {
        throw Error(ErrorCode::CausalityViolation,
                    fmt::format("{} scheduled at {} ms, clock is at {} ms",
                                toString(e.kind),
                                e.timeMs,
                                now_));
    }
    e.seq = seq_++;
    queue_.push(e);
}

bool Simulator::mayRequest() const
{
    return scenario_.arrivals.maxCalls == 0 || requestsIssued_ < scenario_.arrivals.maxCalls;
}

void Simulator::scheduleRequest(GroupId group, TimeMs at)
{
    if (!mayRequest())
    {
        return;
    }
    ++requestsIssued_;
    Event e;
    e.timeMs = at;
    e.kind = EventKind::CallRequest;
    e.group = group;
    schedule(e);
}

void Simulator::scheduleNextHandover(UeId ue, TimeMs from)
{
    Event e;
    e.timeMs = from + std::max<TimeMs>(1, drawExponential(mobility_, scenario_.mobility.meanDwellMs));
    e.kind = EventKind::Handover;
    e.ue = ue;

    const CellId current = gcse_.network().ue(ue).servingCell;
    std::vector<CellId> options;
    auto it = scenario_.mobility.neighbors.find(current);
    if (it != scenario_.mobility.neighbors.end() && !it->second.empty())
    {
        options = it->second;
    }
    else
    {
        for (const Cell& c : scenario_.cells)
        {
            if (c.id != current)
            {
                options.push_back(c.id);
            }
        }
    }
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    e.cell = options[pick(mobility_)];
    schedule(e);
}

void Simulator::scheduleNextLoss(UeId ue, TimeMs from)
{
    Event e;
    e.timeMs = from + std::max<TimeMs>(1, drawExponential(loss_, scenario_.loss.meanIntervalMs));
    e.kind = EventKind::LossReport;
    e.ue = ue;
    schedule(e);
}

void Simulator::scheduleNextTalk(GroupId group, int callId, TimeMs from)
{
    const auto& members = gcse_.group(group).members;
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    Event e;
    e.timeMs = from + std::max<TimeMs>(1, drawExponential(talk_, scenario_.talk.meanIntervalMs));
    e.kind = EventKind::TalkBurst;
    e.group = group;
    e.callId = callId;
    e.ue = *std::next(members.begin(), static_cast<std::ptrdiff_t>(pick(talk_)));
    schedule(e);
}

void Simulator::drainOutputs()
{
    GcseOutputs out = gcse_.takeOutputs();
    for (const Effect& fx : out.effects)
    {
        Event e;
        e.timeMs = fx.atMs;
        e.group = fx.group;
        e.bearer = fx.bearer;
        e.callId = fx.callId;
        switch (fx.kind)
        {
        case EffectKind::BearerComplete:
            e.kind = EventKind::BearerComplete;
            break;
        case EffectKind::McchBoundary:
            e.kind = EventKind::McchBoundary;
            break;
        case EffectKind::UliReport:
            e.kind = EventKind::UliReport;
            break;
        }
        schedule(e);
    }
    auto append = [](auto& to, auto& from) { to.insert(to.end(), from.begin(), from.end()); };
    append(metrics_.switchEvents, out.decisions);
    append(metrics_.continuityGaps, out.gaps);
    append(metrics_.admissionOutcomes, out.admissions);
    append(metrics_.uplink, out.uplink);
    append(metrics_.setupLatencies, out.setups);
    metrics_.coreNetworkMessages += out.coreNetworkMessages;
}

void Simulator::sampleUntil(TimeMs t)
{
    if (scenario_.groups.empty())
    {
        return;
    }
    while (nextSample_ <= t && nextSample_ <= scenario_.durationMs)
    {
        double kbps = 0;
        for (GroupId g : groupIds_)
        {
            if (gcse_.mediaStarted(g, nextSample_))
            {
                kbps += gcse_.group(g).profile.appRateKbps * gcse_.receiversWithPath(g);
            }
        }
        metrics_.throughputSeries.push_back({nextSample_, kbps});
        for (const Cell& c : scenario_.cells)
        {
            metrics_.utilizationSeries.push_back({nextSample_,
                                                  c.id,
                                                  gcse_.ledger().committed(c.id, Pool::Unicast),
                                                  gcse_.ledger().committed(c.id, Pool::Multicast)});
        }
        nextSample_ += scenario_.metrics.sampleIntervalMs;
    }
}

void Simulator::checkInvariants()
{
    InvariantTally& t = metrics_.invariants;
    ++t.eventsChecked;
    t.maxDrift = std::max(t.maxDrift, gcse_.conservationDrift());
    t.pathViolations += gcse_.pathViolations();
    t.zeroMemberViolations += gcse_.zeroMemberViolations();
}

bool Simulator::step()
{
    if (queue_.empty() || queue_.top().timeMs > scenario_.durationMs)
    {
        return false;
    }
    const Event e = queue_.top();
    queue_.pop();
    sampleUntil(e.timeMs);
    now_ = e.timeMs;
    ++events_;
    trace_ += e.traceLine();
    trace_ += '\n';
    dispatch(e);
    drainOutputs();
    if (scenario_.metrics.checkInvariants)
    {
        checkInvariants();
    }
    return true;
}

RunResult Simulator::run()
{
    while (step())
    {
    }
    if (!queue_.empty())
    {
        sampleUntil(scenario_.durationMs);
    }
    now_ = std::max(now_, scenario_.durationMs);
    if (scenario_.metrics.checkInvariants)
    {
        // The per-event probe rescans changed groups only; close the run with a full scan.
        metrics_.invariants.pathViolations += gcse_.pathViolations(true);
    }
    return {metrics_, trace_, now_, events_};
}

void Simulator::dispatch(const Event& e)
{
    switch (e.kind)
    {
    case EventKind::CallRequest:
        onCallRequest(e);
        break;
    case EventKind::BearerComplete:
        if (gcse_.currentCallId(e.group) == e.callId)
        {
            gcse_.onBearerComplete(e.bearer, now_);
        }
        break;
    case EventKind::McchBoundary:
        if (gcse_.currentCallId(e.group) == e.callId)
        {
            gcse_.onMcchBoundary(e.bearer, now_);
        }
        break;
    case EventKind::UliReport:
        gcse_.onUliEvent(e.group, e.callId, now_);
        break;
    case EventKind::LossReport:
        onLossReport(e);
        break;
    case EventKind::Handover:
        onHandover(e);
        break;
    case EventKind::TalkBurst:
        onTalkBurst(e);
        break;
    case EventKind::CallEnd:
        onCallEnd(e);
        break;
    }
}

void Simulator::onCallRequest(const Event& e)
{
    ++metrics_.callRequests;
    if (gcse_.callActive(e.group))
    {
        return;
    }
    std::uniform_int_distribution<TimeMs> startup(scenario_.budget.callStartupMinMs,
                                                  scenario_.budget.callStartupMaxMs);
    const TimeMs draw = startup(startup_);
    try
    {
        gcse_.startGroupCall(e.group, now_, draw);
    }
    catch (const Error& err)
    {
        if (err.code() != ErrorCode::AdmissionFailed)
        {
            throw;
        }
        ++metrics_.callsRejected;
        if (scenario_.arrivals.mode == ArrivalMode::Poisson)
        {
            scheduleRequest(e.group, now_ + drawExponential(arrivals_, scenario_.arrivals.meanInterarrivalMs));
        }
        return;
    }
    ++metrics_.callsStarted;
    metrics_.admittedGroups.insert(e.group);
    for (UeId ue : gcse_.group(e.group).members)
    {
        if (gcse_.network().ue(ue).modeFor(e.group) != RxMode::None)
        {
            metrics_.servedUes.insert(ue);
        }
    }

    const int callId = gcse_.currentCallId(e.group);
    if (scenario_.talk.enabled)
    {
        scheduleNextTalk(e.group, callId, now_ + gcse_.outputs().setups.back().latency.totalMs);
    }

    TimeMs duration = 0;
    switch (scenario_.arrivals.duration)
    {
    case DurationMode::Hold:
        return;
    case DurationMode::Fixed:
        duration = static_cast<TimeMs>(std::llround(scenario_.arrivals.meanDurationMs));
        break;
    case DurationMode::Exponential:
        duration = std::max<TimeMs>(1, drawExponential(arrivals_, scenario_.arrivals.meanDurationMs));
        break;
    }
    Event end;
    end.timeMs = now_ + duration;
    end.kind = EventKind::CallEnd;
    end.group = e.group;
    end.callId = callId;
    schedule(end);
}

void Simulator::onCallEnd(const Event& e)
{
    if (gcse_.currentCallId(e.group) != e.callId)
    {
        return;
    }
    gcse_.endCall(e.group, now_, "call_end");
    ++metrics_.callsCompleted;
    if (scenario_.arrivals.mode == ArrivalMode::Poisson)
    {
        scheduleRequest(e.group, now_ + drawExponential(arrivals_, scenario_.arrivals.meanInterarrivalMs));
    }
}

void Simulator::onLossReport(const Event& e)
{
    const UserEquipment& ue = gcse_.network().ue(e.ue);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double scale = 1.0 - static_cast<double>(ue.channelQuality) / scenario_.model.qMax();
    const double loss = u(loss_) * scenario_.loss.maxLoss * scale;
    for (GroupId g : std::set<GroupId>(ue.memberships))
    {
        if (gcse_.callActive(g) && ue.modeFor(g) == RxMode::MulticastRx)
        {
            ++metrics_.lossReports;
            gcse_.handleLossReport(e.ue, g, loss, now_);
        }
    }
    scheduleNextLoss(e.ue, now_);
}

void Simulator::onHandover(const Event& e)
{
    const CellId from = gcse_.network().ue(e.ue).servingCell;
    if (from != e.cell)
    {
        ++metrics_.handovers;
        gcse_.handleHandover(e.ue, from, e.cell, now_);
    }
    scheduleNextHandover(e.ue, now_);
}

void Simulator::onTalkBurst(const Event& e)
{
    if (gcse_.currentCallId(e.group) != e.callId)
    {
        return;
    }
    if (e.release)
    {
        gcse_.releaseFloor(e.ue, e.group);
        return;
    }
    try
    {
        gcse_.uplinkTalkBurst(e.ue, e.group, now_);
        Event end = e;
        end.timeMs = now_ + scenario_.talk.burstMs;
        end.release = true;
        schedule(end);
    }
    catch (const FloorTaken&)
    {
        ++metrics_.floorDenials;
    }
    catch (const Error& err)
    {
        // The talker may have left the group since the burst was drawn.
        if (err.code() != ErrorCode::UnknownUe)
        {
            throw;
        }
    }
    scheduleNextTalk(e.group, e.callId, now_);
}

RunResult run(const Scenario& scenario)
{
    Simulator sim(scenario);
    return sim.run();
}

} // namespace pmrsim
