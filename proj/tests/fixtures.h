/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_TESTS_FIXTURES_H
#define PMRSIM_TESTS_FIXTURES_H

#include "pmrsim/gcse.h"
#include "pmrsim/sim.h"

#include <vector>

namespace pmrsim::testing
{

inline Cell makeCell(std::uint32_t id, int bandwidthMhz = 10, int mbsfn = kMaxMbsfnSubframes)
{
    Cell c;
    c.id = CellId{id};
    c.bandwidthMhz = bandwidthMhz;
    c.capacityUnits = unitsForBandwidth(bandwidthMhz);
    c.mbsfnSubframes = mbsfn;
    return c;
}

inline MbmsArea makeArea(std::uint32_t id, std::vector<std::uint32_t> cells, SyncMode mode, int cluster)
{
    MbmsArea a;
    a.id = AreaId{id};
    for (auto c : cells)
    {
        a.cells.insert(CellId{c});
    }
    a.syncMode = mode;
    a.sfnClusterSize = cluster;
    return a;
}

inline UserEquipment makeUe(std::uint32_t id, std::uint32_t cell, int quality)
{
    UserEquipment u;
    u.id = UeId{id};
    u.servingCell = CellId{cell};
    u.channelQuality = quality;
    return u;
}

/// cells 1..nCells in one area; UEs round-robin over the area cells with the given qualities.
inline Network makeNetwork(int nCells, SyncMode mode, const std::vector<int>& qualities, int bandwidthMhz = 10)
{
    Network net;
    std::vector<std::uint32_t> ids;
    for (int c = 1; c <= nCells; ++c)
    {
        net.addCell(makeCell(static_cast<std::uint32_t>(c), bandwidthMhz));
        ids.push_back(static_cast<std::uint32_t>(c));
    }
    net.addArea(makeArea(1, ids, mode, mode == SyncMode::Sfn ? nCells : 1));
    for (std::size_t i = 0; i < qualities.size(); ++i)
    {
        net.registerUe(makeUe(static_cast<std::uint32_t>(i + 1),
                              static_cast<std::uint32_t>(i % static_cast<std::size_t>(nCells) + 1),
                              qualities[i]));
    }
    return net;
}

inline std::set<UeId> ueRange(std::uint32_t first, std::uint32_t last)
{
    std::set<UeId> out;
    for (auto i = first; i <= last; ++i)
    {
        out.insert(UeId{i});
    }
    return out;
}

} // namespace pmrsim::testing

#endif // PMRSIM_TESTS_FIXTURES_H
