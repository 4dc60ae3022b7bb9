/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_RADIO_H
#define PMRSIM_RADIO_H

#include "pmrsim/domain.h"

#include <array>
#include <map>
#include <span>
#include <variant>
#include <vector>

namespace pmrsim
{

/**
 * Link-budget level description of the radio access.
 *
 * Channel quality is an abstract index; effTable maps it to the number of application bits
 * one resource unit carries. Multicast cost follows the worst receiver, SFN combining lifts
 * that receiver by sfnGain(clusterSize) quality steps.
 */
struct ResourceModel
{
    int bandwidthMhz{10};
    int unitsPerSubframe{50};
    int mbsfnSubframes{kMaxMbsfnSubframes};
    TimeMs frameMs{10};
    std::vector<int> effTable; ///< bits per unit, indexed by quality 0..qMax()
    double sfnGainStepsPerDoubling{2.0};
    int cellEdgeQuality{0};
    double overloadPenalty{0.05}; ///< goodput lost per excess group, as a fraction of app rate
    int sfnReferenceCluster{4};

    static ResourceModel defaults(int bandwidthMhz = 10);
    static std::vector<int> defaultEffTable();

    int qMax() const
    {
        return static_cast<int>(effTable.size()) - 1;
    }

    /// Throws QualityOutOfRange outside [0, qMax()].
    int bitsPerUnit(int quality) const;

    /// Quality uplift from combining clusterSize synchronized cells; 0 for a single cell.
    int sfnGain(int clusterSize) const;

    ResourceUnits multicastBudget() const
    {
        return static_cast<ResourceUnits>(mbsfnSubframes) * unitsPerSubframe;
    }
    ResourceUnits unicastBudget() const
    {
        return static_cast<ResourceUnits>(kSubframesPerFrame - mbsfnSubframes) * unitsPerSubframe;
    }

    /// Throws ValidationError on a non-monotone table or an out-of-range subframe count.
    void validate() const;
};

enum class Transport
{
    Unicast,
    Multicast,
};

std::string_view toString(Transport transport);

ResourceUnits unicastCost(const ServiceProfile& profile, int quality, const ResourceModel& model);
ResourceUnits unicastCost(const ServiceProfile& profile,
                          const UserEquipment& ue,
                          const ResourceModel& model);

/// Quality the multicast transmission is dimensioned for.
int effectiveMulticastQuality(std::span<const int> memberQualities,
                              const MbmsArea& area,
                              const ResourceModel& model);

ResourceUnits multicastCost(const ServiceProfile& profile,
                            std::span<const int> memberQualities,
                            const MbmsArea& area,
                            const ResourceModel& model);
ResourceUnits multicastCost(const ServiceProfile& profile,
                            const std::vector<const UserEquipment*>& membersInCell,
                            const MbmsArea& area,
                            const ResourceModel& model);

struct CostReport
{
    GroupId group;
    CellId cell;
    ResourceUnits unicastTotal{0};
    ResourceUnits multicastTotal{0};
    std::vector<std::pair<UeId, ResourceUnits>> perUeUnicast;
};

CostReport costReport(const GroupCall& group,
                      CellId cell,
                      const std::vector<const UserEquipment*>& membersInCell,
                      const MbmsArea& area,
                      const ResourceModel& model);

/// Largest number of groups whose multicast reservation fits the MBSFN budget.
int maxMulticastGroups(SyncMode scheme,
                       const ServiceProfile& profile,
                       const ResourceModel& model,
                       int clusterSize);

/**
 * Aggregate goodput in kbps of n concurrent groups, each dimensioned for the cell edge.
 * Up to the saturation point every group gets its full rate. Each group beyond it costs
 * overloadPenalty * appRate of aggregate goodput, floored at zero.
 */
double systemThroughput(int nGroups,
                        SyncMode scheme,
                        const ServiceProfile& profile,
                        const ResourceModel& model,
                        int clusterSize);
double systemThroughput(int nGroups,
                        SyncMode scheme,
                        const ServiceProfile& profile,
                        const ResourceModel& model);

/**
 * Throughput of one group member normalized to the downlink resources allocated to the
 * group, in application bits per resource unit. For unicast the first nMembers entries of
 * cellQualities are served (cycled when nMembers exceeds the list); the multicast bearer is
 * dimensioned over the whole list.
 */
double spectralEfficiency(int nMembers,
                          Transport transport,
                          const ServiceProfile& profile,
                          std::span<const int> cellQualities,
                          const MbmsArea& area,
                          const ResourceModel& model);

/// Smallest n with sum of the first n unicast costs (cycled) strictly above multicastCost.
int crossoverThreshold(std::span<const ResourceUnits> perUeUnicast, ResourceUnits multicastCost);
int crossoverThreshold(const ServiceProfile& profile,
                       std::span<const int> cellQualities,
                       const MbmsArea& area,
                       const ResourceModel& model);

enum class Pool
{
    Unicast,
    Multicast,
};

std::string_view toString(Pool pool);

struct Commitment
{
    int priority{0};
    ResourceUnits units{0};
};

/**
 * Committed resource units per cell, split in a unicast and a multicast pool. Every
 * mutation keeps each pool at or below its capacity.
 */
class ResourceLedger
{
  public:
    void addCell(const Cell& cell);
    bool hasCell(CellId cell) const
    {
        return cells_.contains(cell);
    }

    ResourceUnits capacity(CellId cell, Pool pool) const;
    ResourceUnits committed(CellId cell, Pool pool) const;
    ResourceUnits committedBy(CellId cell, Pool pool, GroupId group) const;
    ResourceUnits available(CellId cell, Pool pool) const
    {
        return capacity(cell, pool) - committed(cell, pool);
    }

    /// Adds units to the group's commitment if they fit. No preemption.
    bool tryReserve(CellId cell, Pool pool, GroupId group, int priority, ResourceUnits units);
    void release(CellId cell, Pool pool, GroupId group, ResourceUnits units);
    /// Drops the group's commitment in one pool and returns the units freed.
    ResourceUnits releaseGroup(CellId cell, Pool pool, GroupId group);

    const std::map<GroupId, Commitment>& residents(CellId cell, Pool pool) const;

    ResourceUnits totalCommitted() const;

  private:
    struct PoolState
    {
        ResourceUnits capacity{0};
        ResourceUnits used{0};
        std::map<GroupId, Commitment> residents;
    };

    PoolState& pool(CellId cell, Pool p);
    const PoolState& pool(CellId cell, Pool p) const;

    std::map<CellId, std::array<PoolState, 2>> cells_;
};

struct Admitted
{
    std::vector<GroupId> preempted;
};

enum class RejectReason
{
    InsufficientResources,
};

struct Rejected
{
    RejectReason reason{RejectReason::InsufficientResources};
};

using AdmissionResult = std::variant<Admitted, Rejected>;

/**
 * Commits demand units for the group in the transport's pool of the cell. When the pool is
 * short, residents with strictly lower priority are released, lowest priority first and
 * older group id first among equals, until the demand fits. The ledger is left untouched
 * on rejection. Preempted groups only lose their commitment in this pool; releasing their
 * other resources is up to the caller.
 */
AdmissionResult admit(const GroupCall& group,
                      const Cell& cell,
                      Transport transport,
                      ResourceUnits demand,
                      ResourceLedger& load);

} // namespace pmrsim

#endif // PMRSIM_RADIO_H
