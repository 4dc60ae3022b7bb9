/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_SIM_H
#define PMRSIM_SIM_H

#include "pmrsim/gcse.h"

#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace pmrsim
{

enum class EventKind
{
    CallRequest,
    BearerComplete,
    McchBoundary,
    UliReport,
    LossReport,
    Handover,
    TalkBurst,
    CallEnd,
};

std::string_view toString(EventKind kind);

struct Event
{
    TimeMs timeMs{0};
    std::uint64_t seq{0};
    EventKind kind{EventKind::CallRequest};
    GroupId group;
    UeId ue;
    CellId cell; ///< handover target
    BearerId bearer;
    int callId{0};
    bool release{false}; ///< TalkBurst: end of the burst rather than its start

    /// Trace line without the trailing newline.
    std::string traceLine() const;
};

struct EventAfter
{
    bool operator()(const Event& a, const Event& b) const
    {
        return a.timeMs != b.timeMs ? a.timeMs > b.timeMs : a.seq > b.seq;
    }
};

struct GroupSpec
{
    std::set<UeId> members;
    ServiceProfile profile;
    int priority{1};
    std::optional<AreaId> area;
};

enum class ArrivalMode
{
    Once,    ///< one call per group, uniform in [0, spreadMs]
    Poisson, ///< idle times between a call's end and the group's next request are exponential
};

enum class DurationMode
{
    Hold, ///< calls last until the end of the run
    Fixed,
    Exponential,
};

struct ArrivalSpec
{
    ArrivalMode mode{ArrivalMode::Once};
    TimeMs spreadMs{1000};
    double meanInterarrivalMs{60000};
    DurationMode duration{DurationMode::Exponential};
    double meanDurationMs{60000};
    long maxCalls{0}; ///< 0 = unlimited
};

struct MobilitySpec
{
    bool enabled{false};
    double meanDwellMs{30000};
    std::map<CellId, std::vector<CellId>> neighbors; ///< empty entry = every other cell
};

struct LossSpec
{
    bool enabled{false};
    double meanIntervalMs{1000};
    double maxLoss{0.2}; ///< loss of a cell-edge receiver; scales down linearly with quality
};

struct TalkSpec
{
    bool enabled{false};
    double meanIntervalMs{5000};
    TimeMs burstMs{2000};
};

struct MetricsSpec
{
    TimeMs sampleIntervalMs{1000};
    bool checkInvariants{true};
};

/// Parameters only the experiment drivers read.
struct ExperimentParams
{
    int fig2MaxGroups{200};
    std::vector<int> fig2Bandwidths{5, 10};
    int fig2SfnCluster{4};
    std::vector<TimeMs> fig4McchPeriods{50, 5120};
};

struct Scenario
{
    std::string name{"scenario"};
    std::uint64_t seed{0};
    TimeMs durationMs{60000};
    std::vector<Cell> cells;
    std::vector<MbmsArea> areas;
    std::vector<UserEquipment> ues;
    std::vector<GroupSpec> groups;
    Policy policy;
    McchSchedule schedule;
    LatencyBudget budget;
    ResourceModel model{ResourceModel::defaults()};
    bool preEstablishedMbms{true};
    bool preEstablishedUnicast{true};
    std::size_t maxGroupSize{kDefaultMaxGroupSize};
    ArrivalSpec arrivals;
    MobilitySpec mobility;
    LossSpec loss;
    TalkSpec talk;
    MetricsSpec metrics;
    ExperimentParams experiment;

    /// Throws ValidationError naming the offending entry.
    void validate() const;
};

struct ThroughputSample
{
    TimeMs atMs{0};
    double kbps{0};
};

struct UtilizationSample
{
    TimeMs atMs{0};
    CellId cell;
    ResourceUnits unicastUnits{0};
    ResourceUnits multicastUnits{0};
};

struct InvariantTally
{
    long eventsChecked{0};
    ResourceUnits maxDrift{0};
    long pathViolations{0};
    long zeroMemberViolations{0};
};

struct MetricsSink
{
    std::vector<SetupRecord> setupLatencies;
    std::vector<ThroughputSample> throughputSeries;
    std::vector<DecisionRecord> switchEvents;
    std::vector<ContinuityGap> continuityGaps;
    std::vector<AdmissionRecord> admissionOutcomes;
    std::vector<UtilizationSample> utilizationSeries;
    std::vector<UplinkRecord> uplink;

    long callRequests{0};
    long callsStarted{0};
    long callsRejected{0};
    long callsCompleted{0};
    long floorDenials{0};
    long lossReports{0};
    long handovers{0};
    int coreNetworkMessages{0};
    std::set<GroupId> admittedGroups;
    std::set<UeId> servedUes;
    InvariantTally invariants;

    bool empty() const;
};

enum class RngStream : std::uint64_t
{
    Generation = 1,
    Arrivals,
    Mobility,
    Startup,
    Loss,
    Talk,
};

/// Independent generator for one stream of a run.
std::mt19937_64 makeStream(std::uint64_t seed, RngStream stream);

struct RunResult
{
    MetricsSink metrics;
    std::string trace;
    TimeMs endMs{0};
    long events{0};
};

/**
 * Single-threaded discrete-event engine around one GcseController.
 *
 * Events are processed in (time, seq) order; seq is the insertion counter, so the trace is a
 * pure function of the scenario. Invariant probes run after every event when enabled.
 */
class Simulator
{
  public:
    explicit Simulator(const Scenario& scenario);

    /// Processes one event. Returns false once the queue is empty or past the run duration.
    bool step();
    RunResult run();

    /// Throws CausalityViolation for an event before the current clock.
    void schedule(Event e);

    TimeMs now() const
    {
        return now_;
    }
    std::size_t pending() const
    {
        return queue_.size();
    }
    const GcseController& controller() const
    {
        return gcse_;
    }
    GcseController& controller()
    {
        return gcse_;
    }
    const MetricsSink& metrics() const
    {
        return metrics_;
    }
    const std::string& trace() const
    {
        return trace_;
    }
    /// Ids of the scenario's groups, in scenario order.
    const std::vector<GroupId>& groupIds() const
    {
        return groupIds_;
    }

  private:
    void dispatch(const Event& e);
    void onCallRequest(const Event& e);
    void onCallEnd(const Event& e);
    void onLossReport(const Event& e);
    void onHandover(const Event& e);
    void onTalkBurst(const Event& e);
    void drainOutputs();
    void sampleUntil(TimeMs t);
    void checkInvariants();
    bool mayRequest() const;
    void scheduleRequest(GroupId group, TimeMs at);
    void scheduleNextHandover(UeId ue, TimeMs from);
    void scheduleNextLoss(UeId ue, TimeMs from);
    void scheduleNextTalk(GroupId group, int callId, TimeMs from);
    TimeMs drawExponential(std::mt19937_64& rng, double mean);

    Scenario scenario_;
    GcseController gcse_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t seq_{0};
    TimeMs now_{0};
    TimeMs nextSample_{0};
    long events_{0};
    long requestsIssued_{0};
    std::vector<GroupId> groupIds_;
    std::map<GroupId, std::size_t> groupIndex_;
    MetricsSink metrics_;
    std::string trace_;

    std::mt19937_64 arrivals_;
    std::mt19937_64 mobility_;
    std::mt19937_64 startup_;
    std::mt19937_64 loss_;
    std::mt19937_64 talk_;
};

RunResult run(const Scenario& scenario);

/// Named preset scenario. Throws UnknownTemplate.
Scenario generateScenario(std::string_view templateName, std::uint64_t seed);

} // namespace pmrsim

#endif // PMRSIM_SIM_H
