/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_DOMAIN_H
#define PMRSIM_DOMAIN_H

#include "pmrsim/types.h"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pmrsim
{

constexpr int kSubframesPerFrame = 10;
constexpr int kMaxMbsfnSubframes = 6;
constexpr std::size_t kDefaultMaxGroupSize = 500;

enum class ServiceKind
{
    Voice,
    Video,
};

std::string_view toString(ServiceKind kind);

struct ServiceProfile
{
    ServiceKind kind{ServiceKind::Voice};
    int appRateKbps{16};
    int qosClass{1};

    static ServiceProfile voice();
    static ServiceProfile video();

    /// Application bits carried in one radio frame of the given length.
    std::int64_t bitsPerFrame(TimeMs frameMs) const
    {
        return static_cast<std::int64_t>(appRateKbps) * frameMs;
    }

    friend bool operator==(const ServiceProfile&, const ServiceProfile&) = default;
};

enum class RxMode
{
    None,
    UnicastRx,
    MulticastRx,
};

std::string_view toString(RxMode mode);

struct UserEquipment
{
    UeId id;
    CellId servingCell;
    int channelQuality{0}; ///< abstract index in [0, q_max]; higher is better
    std::set<GroupId> memberships;
    std::map<GroupId, RxMode> rxMode;
    std::map<GroupId, double> lossEstimate;

    RxMode modeFor(GroupId group) const;
};

/// Resource units per subframe for a channel bandwidth (LTE PRB count).
int unitsForBandwidth(int bandwidthMhz);

struct Cell
{
    CellId id;
    std::set<AreaId> mbmsAreas;
    int bandwidthMhz{10};
    int mbsfnSubframes{kMaxMbsfnSubframes};
    int capacityUnits{50}; ///< units per subframe

    ResourceUnits multicastPoolUnits() const
    {
        return static_cast<ResourceUnits>(mbsfnSubframes) * capacityUnits;
    }
    ResourceUnits unicastPoolUnits() const
    {
        return static_cast<ResourceUnits>(kSubframesPerFrame - mbsfnSubframes) * capacityUnits;
    }
};

enum class SyncMode
{
    SingleCell,
    Sfn,
};

std::string_view toString(SyncMode mode);

struct MbmsArea
{
    AreaId id;
    std::set<CellId> cells;
    SyncMode syncMode{SyncMode::SingleCell};
    int sfnClusterSize{1};

    /// Throws ValidationError when cells is empty or a single-cell area has a cluster > 1.
    void validate() const;
};

enum class TransportMode
{
    NoTransport,
    UnicastOnly,
    MulticastActive,
    Mixed,
};

std::string_view toString(TransportMode mode);

/**
 * Downlink transport of one group in one cell.
 *
 * The pending fields hold bearers that were requested for a transport switch but have not
 * completed yet. Receivers keep their current path until the switch is finalized, so the
 * pending bearers never count as a downlink path.
 */
struct TransportState
{
    TransportMode mode{TransportMode::NoTransport};
    std::optional<BearerId> multicastBearer;
    std::map<UeId, BearerId> unicastBearers;

    std::optional<BearerId> pendingMulticast;
    std::map<UeId, BearerId> pendingUnicast;

    /// Recomputes mode from the bearers present. A multicast bearer with no unicast
    /// receivers is MulticastActive even when nobody is listening.
    void refreshMode();

    bool invariantsHold() const;
};

struct GroupCall
{
    GroupId id;
    Tmgi tmgi;
    std::set<UeId> members;
    ServiceProfile profile;
    int priority{0};
    std::optional<AreaId> area;
    std::map<CellId, TransportState> perCellTransport;
};

/// Registered cells, areas and terminals. Lookups throw on unknown ids.
class Network
{
  public:
    void addCell(Cell cell);
    void addArea(MbmsArea area);
    void registerUe(UserEquipment ue);

    bool hasUe(UeId id) const
    {
        return ues_.contains(id);
    }
    bool hasCell(CellId id) const
    {
        return cells_.contains(id);
    }

    const UserEquipment& ue(UeId id) const;
    UserEquipment& ue(UeId id);
    const Cell& cell(CellId id) const;
    const MbmsArea& area(AreaId id) const;
    bool hasArea(AreaId id) const
    {
        return areas_.contains(id);
    }

    const std::map<UeId, UserEquipment>& ues() const
    {
        return ues_;
    }
    const std::map<CellId, Cell>& cells() const
    {
        return cells_;
    }
    const std::map<AreaId, MbmsArea>& areas() const
    {
        return areas_;
    }

  private:
    std::map<UeId, UserEquipment> ues_;
    std::map<CellId, Cell> cells_;
    std::map<AreaId, MbmsArea> areas_;
};

/**
 * Allocates group ids and TMGIs. Both are handed out monotonically, so a TMGI is never
 * reused within one registry; release() only drops it from the active set.
 */
class GroupRegistry
{
  public:
    explicit GroupRegistry(std::size_t maxGroupSize = kDefaultMaxGroupSize)
        : maxGroupSize_(maxGroupSize)
    {
    }

    GroupCall createGroup(const Network& network,
                          const std::set<UeId>& members,
                          const ServiceProfile& profile,
                          int priority);

    void release(const GroupCall& group);

    bool tmgiActive(Tmgi tmgi) const
    {
        return activeTmgis_.contains(tmgi);
    }
    std::size_t maxGroupSize() const
    {
        return maxGroupSize_;
    }

  private:
    std::size_t maxGroupSize_;
    std::uint32_t nextGroup_{1};
    std::uint32_t nextTmgi_{1};
    std::set<Tmgi> activeTmgis_;
};

/// Adds ue to the group. Joining an existing member returns the group unchanged.
GroupCall joinGroup(GroupCall group,
                    UeId ue,
                    const Network& network,
                    std::size_t maxGroupSize = kDefaultMaxGroupSize);

struct RequirementMatrix
{
    TimeMs maxSetupMs{300};
    int minVoiceGroups{36};
    int minAreaUsers{2000};
    int maxGroupSize{500};
    int requiredBandwidthMhz{10};
};

/// Measured outcome of a run, as consumed by checkRequirements. Unset fields were not measured.
struct ScenarioSummary
{
    std::optional<TimeMs> setupP100Ms;
    std::optional<int> admittedGroups;
    std::optional<int> areaUsers;
    std::optional<int> maxGroupSize;
    std::optional<int> bandwidthMhz;
};

enum class FindingStatus
{
    Pass,
    Fail,
    NotMeasured,
};

std::string_view toString(FindingStatus status);

struct RequirementFinding
{
    std::string row;
    std::string comparator; ///< "<=" or ">="
    double threshold{0};
    std::optional<double> measured;
    FindingStatus status{FindingStatus::NotMeasured};
};

struct RequirementReport
{
    std::vector<RequirementFinding> findings;

    /// True iff no row failed. Unmeasured rows do not fail the report.
    bool passed() const;
};

RequirementReport checkRequirements(const ScenarioSummary& summary,
                                    const RequirementMatrix& matrix = {});

} // namespace pmrsim

#endif // PMRSIM_DOMAIN_H
