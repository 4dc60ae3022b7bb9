/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_GCSE_H
#define PMRSIM_GCSE_H

#include "pmrsim/bearer.h"
#include "pmrsim/domain.h"
#include "pmrsim/radio.h"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pmrsim
{

enum class PolicyKind
{
    StaticActivation,
    DynamicActivation,
};

enum class UliSource
{
    PgwUli,
    UeReported,
};

std::string_view toString(PolicyKind kind);
std::string_view toString(UliSource source);

struct Policy
{
    PolicyKind kind{PolicyKind::StaticActivation};
    double lossThreshold{0.05};
    TimeMs lossWindowMs{1000};
    int switchHysteresis{1};
    UliSource uliSource{UliSource::PgwUli};
    TimeMs uliIntervalMs{1000};

    void validate() const;
};

struct UliReport
{
    GroupId group;
    std::map<CellId, int> counts;
    UliSource source{UliSource::PgwUli};
};

enum class SwitchKind
{
    NoChange,
    UnicastToMulticast,
    MulticastToUnicast,
};

std::string_view toString(SwitchKind kind);

struct SwitchDecision
{
    CellId cell;
    SwitchKind kind{SwitchKind::NoChange};
    int memberCount{0};
    std::optional<int> threshold; ///< N* of the cell, when it could be computed
};

enum class FallbackKind
{
    NoChange,
    FallbackToUnicast,
};

struct FallbackDecision
{
    FallbackKind kind{FallbackKind::NoChange};
    std::optional<BearerId> bearer;
};

/// One transport decision; the CSV decision log is a list of these.
struct DecisionRecord
{
    TimeMs timestampMs{0};
    GroupId group;
    CellId cell;
    std::string decision;
    std::string trigger;
    int memberCount{0};
};

struct ContinuityGap
{
    TimeMs atMs{0};
    UeId ue;
    GroupId group;
    CellId fromCell;
    CellId toCell;
    TimeMs gapMs{0};
};

struct AdmissionRecord
{
    TimeMs atMs{0};
    GroupId group;
    CellId cell;
    Transport transport{Transport::Multicast};
    bool admitted{false};
    ResourceUnits demand{0};
    std::vector<GroupId> preempted;
    std::string context;
};

struct UplinkRecord
{
    TimeMs atMs{0};
    UeId ue;
    GroupId group;
    Transport uplink{Transport::Unicast};
    Transport downlink{Transport::Unicast};
    std::optional<UeId> preemptedTalker;
};

struct SetupRecord
{
    int callId{0};
    GroupId group;
    TimeMs arrivalMs{0};
    SetupLatency latency;
};

enum class EffectKind
{
    BearerComplete,
    McchBoundary,
    UliReport,
};

/// Follow-up work the controller asks the event loop to schedule.
struct Effect
{
    TimeMs atMs{0};
    EffectKind kind{EffectKind::BearerComplete};
    BearerId bearer;
    GroupId group;
    int callId{0}; ///< call the effect belongs to; stale effects are dropped
};

/// Everything the controller produced since the last drain.
struct GcseOutputs
{
    std::vector<Effect> effects;
    std::vector<DecisionRecord> decisions;
    std::vector<ContinuityGap> gaps;
    std::vector<AdmissionRecord> admissions;
    std::vector<UplinkRecord> uplink;
    std::vector<SetupRecord> setups;
    int coreNetworkMessages{0};
};

/// Raised when floor control refuses a talk burst.
class FloorTaken : public Error
{
  public:
    explicit FloorTaken(UeId talker);
    UeId talker() const
    {
        return talker_;
    }

  private:
    UeId talker_;
};

struct GcseConfig
{
    Policy policy;
    ResourceModel model{ResourceModel::defaults()};
    LatencyBudget budget;
    McchSchedule schedule;
    bool preEstablishedMbms{true};
    bool preEstablishedUnicast{true};
};

/**
 * Group Communication Service Enabler.
 *
 * Owns the network view, the groups, the bearer table and the radio ledger, and decides the
 * downlink transport of every group in every cell. Handlers mutate state and append their
 * consequences to outputs(); nothing here knows about the event queue.
 *
 * Under static activation a call runs on the group's MBMS bearer in every cell of its area
 * and members fall back to unicast on loss or outside the area. Under dynamic activation a
 * call starts on unicast bearers and each cell of the area switches to multicast once the
 * reported member count reaches the cell's crossover threshold.
 */
class GcseController
{
  public:
    GcseController(Network network, GcseConfig config);

    GroupId createGroup(const std::set<UeId>& members,
                        const ServiceProfile& profile,
                        int priority,
                        std::optional<AreaId> area);
    void joinGroup(GroupId group, UeId ue, TimeMs now);
    void leaveGroup(GroupId group, UeId ue, TimeMs now);

    /// Pre-arranges the group's MBMS bearer (TMGI, QoS class and area fixed in advance).
    BearerId provisionMbmsBearer(GroupId group, TimeMs now);

    /**
     * Starts a call. Throws AdmissionFailed when a cell cannot host the call (state is left
     * untouched in that case) and NoPreestablishedBearer for a static call configured for
     * pre-established bearers that has none.
     */
    const std::map<CellId, TransportState>& startGroupCall(GroupId group,
                                                            TimeMs now,
                                                            TimeMs startupDrawMs);
    void endCall(GroupId group, TimeMs now, const std::string& trigger);

    /// Pure: the switch decisions a report would cause. Empty under static activation.
    std::vector<SwitchDecision> evaluateUli(const UliReport& report) const;
    /// Evaluates the report and executes its decisions.
    std::vector<SwitchDecision> handleUli(const UliReport& report, TimeMs now);
    /// Report built from the controller's own view, as the PGW would provide it.
    UliReport currentCounts(GroupId group, UliSource source) const;
    /// Scheduled counting round for a call; ignored when that call is over.
    void onUliEvent(GroupId group, int callId, TimeMs now);

    FallbackDecision handleLossReport(UeId ue, GroupId group, double measuredLoss, TimeMs now);
    void handleHandover(UeId ue, CellId fromCell, CellId toCell, TimeMs now);

    UplinkRecord uplinkTalkBurst(UeId ue, GroupId group, TimeMs now, int talkerPriority = 0);
    void releaseFloor(UeId ue, GroupId group);

    void onBearerComplete(BearerId bearer, TimeMs now);
    void onMcchBoundary(BearerId bearer, TimeMs now);

    /// Crossover threshold of the group in a cell given its current members there.
    std::optional<int> cellThreshold(GroupId group, CellId cell) const;

    // Invariant probes used by the simulator and the tests.
    ResourceUnits conservationDrift() const;
    /// Members of live calls without exactly one downlink path, plus malformed transport
    /// states. Only groups touched since the last call are rescanned unless full is set.
    int pathViolations(bool full = false) const;
    int zeroMemberViolations() const;
    bool quiescent() const;

    GcseOutputs takeOutputs();
    const GcseOutputs& outputs() const
    {
        return out_;
    }

    const Network& network() const
    {
        return network_;
    }
    const GroupCall& group(GroupId id) const;
    const std::map<GroupId, GroupCall>& groups() const
    {
        return groups_;
    }
    const BearerTable& bearers() const
    {
        return bearers_;
    }
    const ResourceLedger& ledger() const
    {
        return ledger_;
    }
    const GcseConfig& config() const
    {
        return config_;
    }
    bool callActive(GroupId group) const;
    /// True once the call's setup latency has elapsed.
    bool mediaStarted(GroupId group, TimeMs now) const;
    /// Id of the running call, 0 when idle.
    int currentCallId(GroupId group) const;
    std::optional<UeId> floorHolder(GroupId group) const;
    std::vector<UeId> membersInCell(GroupId group, CellId cell) const;
    /// Members of active calls with an assigned downlink path.
    int receiversWithPath(GroupId group) const;

  private:
    struct CallState
    {
        bool active{false};
        int callId{0};
        TimeMs startedAt{0};
        TimeMs mediaStartAt{0};
        std::optional<UeId> floorHolder;
        int floorPriority{0};
        std::set<UeId> dropped;
    };

    GroupCall& mutableGroup(GroupId id);
    bool inArea(const GroupCall& g, CellId cell) const;
    std::vector<int> qualitiesInCell(const GroupCall& g, CellId cell) const;
    ResourceUnits designMulticastCost(const GroupCall& g) const;
    ResourceUnits cellMulticastCost(const GroupCall& g, CellId cell) const;

    /// Gives ue a path in its serving cell; returns the gap until media reaches it. A fresh
    /// unicast bearer is never pre-established (the UE has just entered the cell).
    std::optional<TimeMs> attachReceiver(GroupCall& g,
                                         UeId ue,
                                         TimeMs now,
                                         const std::string& trigger,
                                         bool fresh = false);
    void detachReceiver(GroupCall& g, UeId ue, CellId cell, TimeMs now);
    /// Sets up a unicast path for ue in cell. With reserve the units are taken from the
    /// ledger first and nullopt is returned when they do not fit; rx mode is untouched then.
    std::optional<TimeMs> addUnicastReceiver(GroupCall& g,
                                             UeId ue,
                                             CellId cell,
                                             TimeMs now,
                                             const std::string& context,
                                             bool reserve,
                                             bool fresh = false);
    void releaseUnicast(GroupCall& g, CellId cell, UeId ue, TimeMs now);
    void releaseBearer(GroupId group, BearerId id, TimeMs now);
    void reserveOnBearer(BearerId id, CellId cell, ResourceUnits units);
    void releaseMulticast(GroupCall& g, CellId cell, TimeMs now, const std::string& trigger);
    void enforceZeroMembers(GroupCall& g, CellId cell, TimeMs now);
    void switchToMulticast(GroupCall& g, CellId cell, int count, TimeMs now);
    void switchToUnicast(GroupCall& g, CellId cell, int count, TimeMs now);
    void finalizeMulticast(GroupCall& g, CellId cell, TimeMs now);
    void finalizeUnicast(GroupCall& g, CellId cell, TimeMs now);
    void handlePreemption(const std::vector<GroupId>& victims, TimeMs now);
    void record(TimeMs now, const GroupCall& g, CellId cell, std::string decision, std::string trigger);
    void scheduleUli(GroupId group, TimeMs at);
    void setRx(UeId ue, GroupId group, RxMode mode);
    int groupPathViolations(GroupId group) const;

    Network network_;
    GcseConfig config_;
    GroupRegistry registry_;
    BearerTable bearers_;
    ResourceLedger ledger_;
    std::map<GroupId, GroupCall> groups_;
    std::map<GroupId, CallState> calls_;
    int nextCallId_{1};
    std::set<BearerId> reserved_; ///< bearers currently holding radio units
    mutable std::set<GroupId> dirty_; ///< groups changed since the last path probe
    mutable std::map<GroupId, int> pathCache_;
    GcseOutputs out_;
};

} // namespace pmrsim

#endif // PMRSIM_GCSE_H
