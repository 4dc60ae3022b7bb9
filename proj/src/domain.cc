/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/domain.h"

#include <fmt/format.h>

#include <algorithm>
#include <utility>

namespace pmrsim
{

std::string Tmgi::str() const
{
    return fmt::format("tmgi-{:06d}", value);
}

std::string_view toString(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::EmptyGroup:
        return "EmptyGroup";
    case ErrorCode::GroupTooLarge:
        return "GroupTooLarge";
    case ErrorCode::UnknownUe:
        return "UnknownUe";
    case ErrorCode::UnknownGroup:
        return "UnknownGroup";
    case ErrorCode::UnknownCell:
        return "UnknownCell";
    case ErrorCode::QualityOutOfRange:
        return "QualityOutOfRange";
    case ErrorCode::NoMembers:
        return "NoMembers";
    case ErrorCode::AdmissionFailed:
        return "AdmissionFailed";
    case ErrorCode::NoPreestablishedBearer:
        return "NoPreestablishedBearer";
    case ErrorCode::NotMulticastReceiver:
        return "NotMulticastReceiver";
    case ErrorCode::FloorTaken:
        return "FloorTaken";
    case ErrorCode::IllegalTransition:
        return "IllegalTransition";
    case ErrorCode::AreaUnconfigured:
        return "AreaUnconfigured";
    case ErrorCode::CausalityViolation:
        return "CausalityViolation";
    case ErrorCode::ValidationError:
        return "ValidationError";
    case ErrorCode::UnknownTemplate:
        return "UnknownTemplate";
    case ErrorCode::ConfigError:
        return "ConfigError";
    case ErrorCode::IoError:
        return "IoError";
    }
    return "?";
}

std::string_view toString(ServiceKind kind)
{
    return kind == ServiceKind::Voice ? "voice" : "video";
}

std::string_view toString(RxMode mode)
{
    switch (mode)
    {
    case RxMode::None:
        return "none";
    case RxMode::UnicastRx:
        return "unicast";
    case RxMode::MulticastRx:
        return "multicast";
    }
    return "?";
}

std::string_view toString(SyncMode mode)
{
    return mode == SyncMode::SingleCell ? "SC" : "SFN";
}

std::string_view toString(TransportMode mode)
{
    switch (mode)
    {
    case TransportMode::NoTransport:
        return "NoTransport";
    case TransportMode::UnicastOnly:
        return "UnicastOnly";
    case TransportMode::MulticastActive:
        return "MulticastActive";
    case TransportMode::Mixed:
        return "Mixed";
    }
    return "?";
}

std::string_view toString(FindingStatus status)
{
    switch (status)
    {
    case FindingStatus::Pass:
        return "pass";
    case FindingStatus::Fail:
        return "fail";
    case FindingStatus::NotMeasured:
        return "not-measured";
    }
    return "?";
}

ServiceProfile ServiceProfile::voice()
{
    return {ServiceKind::Voice, 16, 1};
}

ServiceProfile ServiceProfile::video()
{
    return {ServiceKind::Video, 256, 2};
}

RxMode UserEquipment::modeFor(GroupId group) const
{
    auto it = rxMode.find(group);
    return it == rxMode.end() ? RxMode::None : it->second;
}

int unitsForBandwidth(int bandwidthMhz)
{
    switch (bandwidthMhz)
    {
    case 1:
        return 6;
    case 3:
        return 15;
    default:
        return 5 * bandwidthMhz;
    }
}

void MbmsArea::validate() const
{
    if (cells.empty())
    {
        throw Error(ErrorCode::ValidationError, fmt::format("area {} has no cells", id.str()));
    }
    if (sfnClusterSize < 1)
    {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("area {} cluster size must be >= 1", id.str()));
    }
    if (syncMode == SyncMode::SingleCell && sfnClusterSize != 1)
    {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("area {} is single-cell but has cluster size {}",
                                id.str(),
                                sfnClusterSize));
    }
}

void TransportState::refreshMode()
{
    if (multicastBearer)
    {
        mode = unicastBearers.empty() ? TransportMode::MulticastActive : TransportMode::Mixed;
    }
    else
    {
        mode = unicastBearers.empty() ? TransportMode::NoTransport : TransportMode::UnicastOnly;
    }
}

bool TransportState::invariantsHold() const
{
    switch (mode)
    {
    case TransportMode::NoTransport:
        return !multicastBearer && unicastBearers.empty();
    case TransportMode::UnicastOnly:
        return !multicastBearer && !unicastBearers.empty();
    case TransportMode::MulticastActive:
        return multicastBearer.has_value() && unicastBearers.empty();
    case TransportMode::Mixed:
        return multicastBearer.has_value() && !unicastBearers.empty();
    }
    return false;
}

void Network::addCell(Cell cell)
{
    if (cell.mbsfnSubframes < 0 || cell.mbsfnSubframes > kMaxMbsfnSubframes)
    {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("cell {}: mbsfn_subframes {} outside [0, {}]",
                                cell.id.str(),
                                cell.mbsfnSubframes,
                                kMaxMbsfnSubframes));
    }
    cells_[cell.id] = std::move(cell);
}

void Network::addArea(MbmsArea area)
{
    area.validate();
    for (CellId c : area.cells)
    {
        auto it = cells_.find(c);
        if (it == cells_.end())
        {
            throw Error(ErrorCode::UnknownCell,
                        fmt::format("area {} references unknown cell {}", area.id.str(), c.str()));
        }
        it->second.mbmsAreas.insert(area.id);
    }
    areas_[area.id] = std::move(area);
}

void Network::registerUe(UserEquipment ue)
{
    if (!cells_.contains(ue.servingCell))
    {
        throw Error(ErrorCode::UnknownCell,
                    fmt::format("{} served by unknown cell {}", ue.id.str(), ue.servingCell.str()));
    }
    ues_[ue.id] = std::move(ue);
}

const UserEquipment& Network::ue(UeId id) const
{
    auto it = ues_.find(id);
    if (it == ues_.end())
    {
        throw Error(ErrorCode::UnknownUe, fmt::format("unknown UE {}", id.str()));
    }
    return it->second;
}

UserEquipment& Network::ue(UeId id)
{
    return const_cast<UserEquipment&>(std::as_const(*this).ue(id));
}

const Cell& Network::cell(CellId id) const
{
    auto it = cells_.find(id);
    if (it == cells_.end())
    {
        throw Error(ErrorCode::UnknownCell, fmt::format("unknown cell {}", id.str()));
    }
    return it->second;
}

const MbmsArea& Network::area(AreaId id) const
{
    auto it = areas_.find(id);
    if (it == areas_.end())
    {
        throw Error(ErrorCode::AreaUnconfigured, fmt::format("unknown MBMS area {}", id.str()));
    }
    return it->second;
}

GroupCall GroupRegistry::createGroup(const Network& network,
                                     const std::set<UeId>& members,
                                     const ServiceProfile& profile,
                                     int priority)
{
    if (members.empty())
    {
        throw Error(ErrorCode::EmptyGroup, "a group needs at least one member");
    }
    if (members.size() > maxGroupSize_)
    {
        throw Error(ErrorCode::GroupTooLarge,
                    fmt::format("{} members exceeds the {} member limit",
                                members.size(),
                                maxGroupSize_));
    }
    for (UeId ue : members)
    {
        if (!network.hasUe(ue))
        {
            throw Error(ErrorCode::UnknownUe, fmt::format("unknown UE {}", ue.str()));
        }
    }

    GroupCall group;
    group.id = GroupId{nextGroup_++};
    group.tmgi = Tmgi{nextTmgi_++};
    group.members = members;
    group.profile = profile;
    group.priority = priority;
    activeTmgis_.insert(group.tmgi);
    return group;
}

void GroupRegistry::release(const GroupCall& group)
{
    activeTmgis_.erase(group.tmgi);
}

GroupCall joinGroup(GroupCall group, UeId ue, const Network& network, std::size_t maxGroupSize)
{
    if (!network.hasUe(ue))
    {
        throw Error(ErrorCode::UnknownUe, fmt::format("unknown UE {}", ue.str()));
    }
    if (group.members.contains(ue))
    {
        return group;
    }
    if (group.members.size() >= maxGroupSize)
    {
        throw Error(ErrorCode::GroupTooLarge,
                    fmt::format("group {} already has {} members", group.id.str(), maxGroupSize));
    }
    group.members.insert(ue);
    return group;
}

bool RequirementReport::passed() const
{
    return std::none_of(findings.begin(), findings.end(), [](const RequirementFinding& f) {
        return f.status == FindingStatus::Fail;
    });
}

namespace
{

RequirementFinding atMost(std::string row, double threshold, std::optional<double> measured)
{
    RequirementFinding f{std::move(row), "<=", threshold, measured, FindingStatus::NotMeasured};
    if (measured)
    {
        f.status = *measured <= threshold ? FindingStatus::Pass : FindingStatus::Fail;
    }
    return f;
}

RequirementFinding atLeast(std::string row, double threshold, std::optional<double> measured)
{
    RequirementFinding f{std::move(row), ">=", threshold, measured, FindingStatus::NotMeasured};
    if (measured)
    {
        f.status = *measured >= threshold ? FindingStatus::Pass : FindingStatus::Fail;
    }
    return f;
}

template <typename T>
std::optional<double> asDouble(const std::optional<T>& v)
{
    return v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
}

} // namespace

RequirementReport checkRequirements(const ScenarioSummary& summary, const RequirementMatrix& matrix)
{
    RequirementReport report;
    report.findings.push_back(
        atMost("max_setup_ms", static_cast<double>(matrix.maxSetupMs), asDouble(summary.setupP100Ms)));
    report.findings.push_back(
        atLeast("min_voice_groups", matrix.minVoiceGroups, asDouble(summary.admittedGroups)));
    report.findings.push_back(
        atLeast("min_area_users", matrix.minAreaUsers, asDouble(summary.areaUsers)));
    report.findings.push_back(
        atMost("max_group_size", matrix.maxGroupSize, asDouble(summary.maxGroupSize)));
    report.findings.push_back(atLeast("required_bandwidth_mhz",
                                      matrix.requiredBandwidthMhz,
                                      asDouble(summary.bandwidthMhz)));
    return report;
}

} // namespace pmrsim
