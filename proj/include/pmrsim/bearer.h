/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_BEARER_H
#define PMRSIM_BEARER_H

#include "pmrsim/domain.h"

#include <cmath>
#include <concepts>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmrsim
{

enum class BearerKind
{
    Unicast,
    Mbms,
};

enum class BearerState
{
    Idle,
    PreEstablished,
    Activating,
    Active,
    Releasing,
};

std::string_view toString(BearerKind kind);
std::string_view toString(BearerState state);

bool legalTransition(BearerState from, BearerState to);

struct Bearer
{
    BearerId id;
    BearerKind kind{BearerKind::Unicast};
    BearerState state{BearerState::Idle};
    int qosClass{0};
    GroupId group;
    std::optional<UeId> ue; ///< owner of a unicast bearer
    std::optional<Tmgi> tmgi;
    std::optional<AreaId> area;
    std::vector<CellId> cells; ///< cells an MBMS bearer transmits in
    std::vector<std::pair<BearerState, TimeMs>> history;
    std::map<CellId, ResourceUnits> reservations; ///< radio units committed on behalf of this bearer

    /// Time of the most recent entry into state.
    std::optional<TimeMs> timestamp(BearerState s) const;

    /// Throws IllegalTransition on a transition outside the lifecycle or a time going backwards.
    void transition(BearerState to, TimeMs at);

    bool carriesTraffic() const
    {
        return state == BearerState::Active;
    }
};

struct LatencyBudget
{
    TimeMs callStartupMinMs{220};
    TimeMs callStartupMaxMs{250};
    TimeMs bearerEstablishmentMs{115};
    TimeMs radioIfMs{10};
    TimeMs networkIfMs{5};
    TimeMs processingMs{5};
    TimeMs requirementMs{300};
    TimeMs pocPreestablishedMs{4000};
    TimeMs pocCreatedMs{7000};

    /// Part of bearer establishment not covered by the itemized interface delays.
    TimeMs otherNetworkMs() const
    {
        return bearerEstablishmentMs - radioIfMs - networkIfMs - processingMs;
    }

    /// Time to bring up a unicast bearer that was not pre-established.
    TimeMs unicastEstablishmentMs() const
    {
        return radioIfMs + networkIfMs + processingMs;
    }

    void validate() const;
};

struct McchSchedule
{
    TimeMs modificationPeriodMs{50};
    TimeMs phaseMs{0};

    static McchSchedule legacy()
    {
        return {5120, 0};
    }
    static McchSchedule proposed()
    {
        return {50, 0};
    }
};

/**
 * First MCCH modification boundary at or after now. Works on integer milliseconds for the
 * simulator and on continuous time for statistical analysis of the wait.
 */
template <typename T>
    requires std::integral<T> || std::floating_point<T>
T nextMcchBoundary(T now, const McchSchedule& schedule)
{
    const T period = static_cast<T>(schedule.modificationPeriodMs);
    const T phase = static_cast<T>(schedule.phaseMs);
    if constexpr (std::integral<T>)
    {
        T offset = (now - phase) % period;
        if (offset < 0)
        {
            offset += period;
        }
        return offset == 0 ? now : now + (period - offset);
    }
    else
    {
        return phase + std::ceil((now - phase) / period) * period;
    }
}

template <typename T>
T mcchWait(T now, const McchSchedule& schedule)
{
    return nextMcchBoundary(now, schedule) - now;
}

enum class BearerOption
{
    PreEstablished,
    DynamicBearer,
    UnicastStart, ///< dynamic activation: call starts on unicast bearers
};

std::string_view toString(BearerOption option);

struct LatencyComponent
{
    std::string name;
    TimeMs ms{0};
};

struct SetupLatency
{
    BearerOption option{BearerOption::PreEstablished};
    TimeMs startupMs{0};
    TimeMs bearerMs{0};
    TimeMs mcchWaitMs{0};
    TimeMs totalMs{0};
    std::vector<LatencyComponent> components;

    bool meets(TimeMs requirementMs) const
    {
        return totalMs <= requirementMs;
    }
};

/**
 * End-to-end call setup latency. The MCCH wait is measured from the call arrival; the
 * startup draw must lie in the budget's startup range (ValidationError otherwise).
 * UnicastStart ignores the MCCH and adds the unicast establishment time unless the
 * unicast bearer is pre-established.
 */
SetupLatency setupLatency(BearerOption option,
                          const LatencyBudget& budget,
                          const McchSchedule& schedule,
                          TimeMs arrivalMs,
                          TimeMs startupDrawMs,
                          bool preEstablishedUnicast = true);

enum class MbmsSetup
{
    PreArranged,
    OnDemand,
};

struct Establishment
{
    BearerId bearer;
    TimeMs completionMs{0};
};

/// Owns every bearer of a run. Bearers are never erased; released ones return to Idle.
class BearerTable
{
  public:
    BearerTable(LatencyBudget budget, McchSchedule schedule)
        : budget_(budget),
          schedule_(schedule)
    {
    }

    /**
     * PreArranged fixes TMGI, QoS and area ahead of the call and leaves the bearer in
     * PreEstablished; asking again for the same group returns the existing bearer.
     * OnDemand starts Activating and completes at the first MCCH boundary after the
     * establishment time. cell restricts the bearer to one cell of the area.
     * Throws AreaUnconfigured when the group has no usable area.
     */
    Establishment establishMbmsBearer(const GroupCall& group,
                                      const Network& network,
                                      MbmsSetup when,
                                      TimeMs now,
                                      std::optional<CellId> cell = std::nullopt);

    /**
     * Idempotent per (ue, group) while a bearer is live. With preEstablished the bearer
     * completes immediately; otherwise after the unicast establishment time.
     */
    Establishment establishUnicastBearer(UeId ue,
                                         const GroupCall& group,
                                         const Network& network,
                                         TimeMs now,
                                         bool preEstablished);

    void activate(BearerId id, TimeMs now);
    /// Active or Activating bearers go through Releasing to Idle; reservations are cleared.
    void release(BearerId id, TimeMs now);
    /// Idle -> PreEstablished, so a pre-arranged bearer is ready for the group's next call.
    void rearm(BearerId id, TimeMs now);

    const Bearer& bearer(BearerId id) const;
    Bearer& bearer(BearerId id);
    std::optional<BearerId> preArranged(GroupId group) const;

    const std::map<BearerId, Bearer>& all() const
    {
        return bearers_;
    }

    const LatencyBudget& budget() const
    {
        return budget_;
    }
    const McchSchedule& schedule() const
    {
        return schedule_;
    }

  private:
    BearerId nextId();

    LatencyBudget budget_;
    McchSchedule schedule_;
    std::uint32_t next_{1};
    std::map<BearerId, Bearer> bearers_;
    std::map<GroupId, BearerId> preArranged_;
    std::map<std::pair<UeId, GroupId>, BearerId> unicast_;
};

} // namespace pmrsim

#endif // PMRSIM_BEARER_H
