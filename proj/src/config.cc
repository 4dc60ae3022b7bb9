/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#include "pmrsim/config.h"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace pmrsim
{

namespace detail
{
// Generated from configs/*.yaml at build time.
const std::vector<std::pair<std::string_view, std::string_view>>& builtinTemplates();
} // namespace detail

std::string ConfigIssue::str() const
{
    std::string where = source;
    if (line > 0)
    {
        where += fmt::format(":{}", line);
    }
    if (field.empty())
    {
        return fmt::format("{}: {}", where, message);
    }
    return fmt::format("{}: {}: {}", where, field, message);
}

namespace
{

std::string joinIssues(const std::vector<ConfigIssue>& issues)
{
    std::string out;
    for (const ConfigIssue& i : issues)
    {
        if (!out.empty())
        {
            out += '\n';
        }
        out += i.str();
    }
    return out;
}

} // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(ErrorCode::ConfigError, joinIssues(issues)),
      issues_(std::move(issues))
{
}

namespace
{

template <typename T>
constexpr const char* typeName()
{
    if constexpr (std::is_same_v<T, bool>)
    {
        return "a boolean";
    }
    else if constexpr (std::is_integral_v<T>)
    {
        return "an integer";
    }
    else if constexpr (std::is_floating_point_v<T>)
    {
        return "a number";
    }
    else
    {
        return "a string";
    }
}

std::string child(const std::string& path, std::string_view key)
{
    return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

std::string indexed(const std::string& path, std::size_t i)
{
    return fmt::format("{}[{}]", path, i);
}

/// Collects issues while reading a YAML tree into a Scenario.
class Reader
{
  public:
    Reader(std::string source, std::vector<std::string> overridden)
        : source_(std::move(source)),
          overridden_(std::move(overridden))
    {
    }

    void issue(const YAML::Node& at, const std::string& field, std::string message)
    {
        ConfigIssue i;
        i.source = source_;
        i.field = field;
        i.message = std::move(message);
        if (fromOverride(field))
        {
            i.source = "--set";
        }
        else if (at.IsDefined() && at.Mark().line >= 0)
        {
            i.line = at.Mark().line + 1;
        }
        issues_.push_back(std::move(i));
    }

    template <typename T>
    std::optional<T> get(const YAML::Node& parent, std::string_view key, const std::string& path)
    {
        if (!parent.IsMap())
        {
            return std::nullopt;
        }
        const YAML::Node n = parent[std::string(key)];
        if (!n.IsDefined() || n.IsNull())
        {
            return std::nullopt;
        }
        const std::string field = child(path, key);
        if (!n.IsScalar())
        {
            issue(n, field, fmt::format("expected {}", typeName<T>()));
            return std::nullopt;
        }
        try
        {
            return n.as<T>();
        }
        catch (const YAML::Exception&)
        {
            issue(n, field, fmt::format("expected {}, got '{}'", typeName<T>(), n.Scalar()));
            return std::nullopt;
        }
    }

    template <typename T>
    T get(const YAML::Node& parent, std::string_view key, const std::string& path, T fallback)
    {
        return get<T>(parent, key, path).value_or(fallback);
    }

    template <typename T>
    std::optional<std::vector<T>> list(const YAML::Node& parent, std::string_view key, const std::string& path)
    {
        if (!parent.IsMap())
        {
            return std::nullopt;
        }
        const YAML::Node n = parent[std::string(key)];
        if (!n.IsDefined() || n.IsNull())
        {
            return std::nullopt;
        }
        const std::string field = child(path, key);
        if (!n.IsSequence())
        {
            issue(n, field, fmt::format("expected a list of {}", typeName<T>()));
            return std::nullopt;
        }
        std::vector<T> out;
        for (std::size_t i = 0; i < n.size(); ++i)
        {
            try
            {
                out.push_back(n[i].as<T>());
            }
            catch (const YAML::Exception&)
            {
                issue(n[i], indexed(field, i), fmt::format("expected {}", typeName<T>()));
                return std::nullopt;
            }
        }
        return out;
    }

    /// Picks one of the allowed words; unknown words are reported and the fallback kept.
    std::string choice(const YAML::Node& parent,
                       std::string_view key,
                       const std::string& path,
                       std::initializer_list<std::string_view> allowed,
                       std::string fallback)
    {
        auto v = get<std::string>(parent, key, path);
        if (!v)
        {
            return fallback;
        }
        if (std::find(allowed.begin(), allowed.end(), *v) == allowed.end())
        {
            std::string opts;
            for (std::string_view a : allowed)
            {
                opts += opts.empty() ? "" : ", ";
                opts += a;
            }
            issue(parent[std::string(key)], child(path, key), fmt::format("'{}' is not one of {}", *v, opts));
            return fallback;
        }
        return *v;
    }

    /// Reports keys of a mapping that are not in the schema.
    bool section(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> keys)
    {
        if (!n.IsDefined() || n.IsNull())
        {
            return false;
        }
        if (!n.IsMap())
        {
            issue(n, path, "expected a mapping");
            return false;
        }
        for (const auto& kv : n)
        {
            const std::string k = kv.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), k) == keys.end())
            {
                issue(kv.first, child(path, k), "unknown key");
            }
        }
        return true;
    }

    std::vector<ConfigIssue>& issues()
    {
        return issues_;
    }

    const std::string& source() const
    {
        return source_;
    }

  private:
    bool fromOverride(const std::string& field) const
    {
        for (const std::string& o : overridden_)
        {
            if (field == o || field.starts_with(o + ".") || field.starts_with(o + "["))
            {
                return true;
            }
        }
        return false;
    }

    std::string source_;
    std::vector<std::string> overridden_;
    std::vector<ConfigIssue> issues_;
};

/// Dotted override path in the bracket form the issues use: groups.0.size -> groups[0].size.
std::string fieldForPath(const std::vector<std::string>& segments)
{
    std::string out;
    for (const std::string& s : segments)
    {
        const bool index = !s.empty() && std::all_of(s.begin(), s.end(), ::isdigit);
        if (index)
        {
            out += fmt::format("[{}]", s);
        }
        else
        {
            out += out.empty() ? s : "." + s;
        }
    }
    return out;
}

std::vector<std::string> splitPath(std::string_view path)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t dot = path.find('.', start);
        out.emplace_back(path.substr(start, dot == std::string_view::npos ? dot : dot - start));
        if (dot == std::string_view::npos)
        {
            break;
        }
        start = dot + 1;
    }
    return out;
}

/// Applies one key=value override to the tree; returns the overridden field or an issue.
std::optional<std::string> applyOverride(YAML::Node root, const std::string& spec, std::vector<ConfigIssue>& issues)
{
    auto fail = [&](std::string field, std::string msg) {
        issues.push_back({"--set", 0, std::move(field), std::move(msg)});
        return std::nullopt;
    };
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
    {
        return fail("", fmt::format("override '{}' is not of the form key=value", spec));
    }
    const std::vector<std::string> segments = splitPath(std::string_view(spec).substr(0, eq));
    const std::string field = fieldForPath(segments);
    YAML::Node value;
    try
    {
        value = YAML::Load(spec.substr(eq + 1));
    }
    catch (const YAML::Exception& e)
    {
        return fail(field, fmt::format("value does not parse: {}", e.msg));
    }

    YAML::Node cur = root;
    for (std::size_t i = 0; i < segments.size(); ++i)
    {
        const std::string& seg = segments[i];
        if (seg.empty())
        {
            return fail(field, "empty path segment");
        }
        const bool last = i + 1 == segments.size();
        const bool index = std::all_of(seg.begin(), seg.end(), ::isdigit);
        if (cur.IsSequence())
        {
            if (!index || std::stoul(seg) >= cur.size())
            {
                return fail(field, fmt::format("'{}' is not an index of a list of {}", seg, cur.size()));
            }
            const std::size_t idx = std::stoul(seg);
            if (last)
            {
                cur[idx] = value;
                return field;
            }
            YAML::Node next = cur[idx];
            cur.reset(next);
            continue;
        }
        if (!cur.IsMap() && !cur.IsNull())
        {
            return fail(field, fmt::format("'{}' is a scalar and has no field '{}'", fieldForPath({segments.begin(), segments.begin() + static_cast<std::ptrdiff_t>(i)}), seg));
        }
        if (last)
        {
            cur[seg] = value;
            return field;
        }
        if (!cur[seg])
        {
            cur[seg] = YAML::Node(YAML::NodeType::Map);
        }
        YAML::Node next = cur[seg];
        cur.reset(next);
    }
    return field;
}

ServiceProfile profileFor(const std::string& name)
{
    return name == "video" ? ServiceProfile::video() : ServiceProfile::voice();
}

class ScenarioBuilder
{
  public:
    ScenarioBuilder(Reader& r, const YAML::Node& root, std::optional<std::uint64_t> seed)
        : r_(r),
          root_(root),
          seedOverride_(seed)
    {
    }

    Scenario build()
    {
        r_.section(root_,
                   "",
                   {"version", "name", "seed", "duration_ms", "model", "cells", "areas", "ues", "groups",
                    "policy", "bearers", "schedule", "budget", "limits", "arrivals", "mobility", "loss",
                    "talk", "metrics", "experiment"});
        const int version = r_.get<int>(root_, "version", "", 1);
        if (version != 1)
        {
            r_.issue(root_["version"], "version", fmt::format("unsupported version {}, expected 1", version));
        }
        s_.name = r_.get<std::string>(root_, "name", "", "scenario");
        s_.seed = seedOverride_.value_or(r_.get<std::uint64_t>(root_, "seed", "", 0));
        s_.durationMs = r_.get<TimeMs>(root_, "duration_ms", "", 60000);
        if (s_.durationMs <= 0)
        {
            r_.issue(root_["duration_ms"], "duration_ms", "must be positive");
        }

        readLimits();
        readModel();
        readCells();
        readAreas();
        readUes();
        readGroups();
        readPolicy();
        readBearers();
        readSchedule();
        readBudget();
        readArrivals();
        readMobility();
        readLoss();
        readTalk();
        readMetrics();
        readExperiment();
        return s_;
    }

  private:
    void positive(const YAML::Node& parent, std::string_view key, const std::string& path, double v)
    {
        if (v <= 0)
        {
            r_.issue(parent[std::string(key)], child(path, key), "must be positive");
        }
    }

    void readLimits()
    {
        const YAML::Node n = root_["limits"];
        r_.section(n, "limits", {"max_group_size"});
        const int m = r_.get<int>(n, "max_group_size", "limits", static_cast<int>(kDefaultMaxGroupSize));
        if (m <= 0)
        {
            r_.issue(n["max_group_size"], "limits.max_group_size", "must be positive");
        }
        s_.maxGroupSize = static_cast<std::size_t>(std::max(m, 1));
    }

    void readModel()
    {
        const YAML::Node n = root_["model"];
        const std::string p = "model";
        r_.section(n,
                   p,
                   {"bandwidth_mhz", "mbsfn_subframes", "frame_ms", "eff_table", "sfn_gain_steps_per_doubling",
                    "cell_edge_quality", "overload_penalty", "sfn_reference_cluster"});
        const int bw = r_.get<int>(n, "bandwidth_mhz", p, 10);
        if (bw <= 0)
        {
            r_.issue(n["bandwidth_mhz"], child(p, "bandwidth_mhz"), "must be positive");
        }
        ResourceModel m = ResourceModel::defaults(std::max(bw, 1));
        m.mbsfnSubframes = mbsfn(n, p, m.mbsfnSubframes);
        m.frameMs = r_.get<TimeMs>(n, "frame_ms", p, m.frameMs);
        positive(n, "frame_ms", p, static_cast<double>(m.frameMs));
        if (auto t = r_.list<int>(n, "eff_table", p))
        {
            m.effTable = *t;
        }
        m.sfnGainStepsPerDoubling = r_.get<double>(n, "sfn_gain_steps_per_doubling", p, m.sfnGainStepsPerDoubling);
        m.cellEdgeQuality = r_.get<int>(n, "cell_edge_quality", p, m.cellEdgeQuality);
        m.overloadPenalty = r_.get<double>(n, "overload_penalty", p, m.overloadPenalty);
        m.sfnReferenceCluster = r_.get<int>(n, "sfn_reference_cluster", p, m.sfnReferenceCluster);
        try
        {
            m.validate();
        }
        catch (const Error& e)
        {
            r_.issue(n, p, e.what());
        }
        s_.model = m;
    }

    int mbsfn(const YAML::Node& n, const std::string& path, int fallback)
    {
        const int v = r_.get<int>(n, "mbsfn_subframes", path, fallback);
        if (v < 0 || v > kMaxMbsfnSubframes)
        {
            r_.issue(n["mbsfn_subframes"],
                     child(path, "mbsfn_subframes"),
                     fmt::format("{} exceeds the ceiling of {} MBSFN subframes per {}-subframe frame",
                                 v,
                                 kMaxMbsfnSubframes,
                                 kSubframesPerFrame));
            return fallback;
        }
        return v;
    }

    void readCells()
    {
        const YAML::Node n = root_["cells"];
        if (!n.IsDefined() || !n.IsSequence() || n.size() == 0)
        {
            r_.issue(n.IsDefined() ? n : root_, "cells", "expected a non-empty list of cells");
            return;
        }
        for (std::size_t i = 0; i < n.size(); ++i)
        {
            const YAML::Node c = n[i];
            const std::string p = indexed("cells", i);
            if (!r_.section(c, p, {"id", "bandwidth_mhz", "mbsfn_subframes", "neighbors"}))
            {
                continue;
            }
            Cell cell;
            const auto id = r_.get<int>(c, "id", p);
            if (!id || *id <= 0)
            {
                r_.issue(c, child(p, "id"), "required positive integer");
                continue;
            }
            cell.id = CellId{static_cast<std::uint32_t>(*id)};
            if (cellIds_.contains(cell.id))
            {
                r_.issue(c["id"], child(p, "id"), fmt::format("duplicate cell id {}", *id));
                continue;
            }
            cell.bandwidthMhz = r_.get<int>(c, "bandwidth_mhz", p, s_.model.bandwidthMhz);
            if (cell.bandwidthMhz <= 0)
            {
                r_.issue(c["bandwidth_mhz"], child(p, "bandwidth_mhz"), "must be positive");
                cell.bandwidthMhz = s_.model.bandwidthMhz;
            }
            cell.capacityUnits = unitsForBandwidth(cell.bandwidthMhz);
            cell.mbsfnSubframes = mbsfn(c, p, s_.model.mbsfnSubframes);
            cellIds_.insert(cell.id);
            if (auto nb = r_.list<int>(c, "neighbors", p))
            {
                neighborSpecs_.emplace_back(cell.id, p, *nb);
            }
            s_.cells.push_back(cell);
        }
        for (const auto& [cell, p, ids] : neighborSpecs_)
        {
            std::vector<CellId> out;
            for (std::size_t k = 0; k < ids.size(); ++k)
            {
                const CellId nb{static_cast<std::uint32_t>(ids[k])};
                if (ids[k] <= 0 || !cellIds_.contains(nb))
                {
                    r_.issue(n, indexed(child(p, "neighbors"), k), fmt::format("unknown cell {}", ids[k]));
                    continue;
                }
                out.push_back(nb);
            }
            s_.mobility.neighbors[cell] = out;
        }
    }

    void readAreas()
    {
        const YAML::Node n = root_["areas"];
        if (!n.IsDefined() || n.IsNull())
        {
            return;
        }
        if (!n.IsSequence())
        {
            r_.issue(n, "areas", "expected a list of areas");
            return;
        }
        for (std::size_t i = 0; i < n.size(); ++i)
        {
            const YAML::Node a = n[i];
            const std::string p = indexed("areas", i);
            if (!r_.section(a, p, {"id", "cells", "sync", "cluster_size"}))
            {
                continue;
            }
            MbmsArea area;
            const auto id = r_.get<int>(a, "id", p);
            if (!id || *id <= 0)
            {
                r_.issue(a, child(p, "id"), "required positive integer");
                continue;
            }
            area.id = AreaId{static_cast<std::uint32_t>(*id)};
            if (areaIds_.contains(area.id))
            {
                r_.issue(a["id"], child(p, "id"), fmt::format("duplicate area id {}", *id));
                continue;
            }
            const auto cells = r_.list<int>(a, "cells", p);
            if (!cells || cells->empty())
            {
                r_.issue(a, child(p, "cells"), "required non-empty list of cell ids");
                continue;
            }
            bool ok = true;
            for (std::size_t k = 0; k < cells->size(); ++k)
            {
                const CellId c{static_cast<std::uint32_t>((*cells)[k])};
                if ((*cells)[k] <= 0 || !cellIds_.contains(c))
                {
                    r_.issue(a["cells"][k], indexed(child(p, "cells"), k), fmt::format("unknown cell {}", (*cells)[k]));
                    ok = false;
                }
                area.cells.insert(c);
            }
            const std::string sync = r_.choice(a, "sync", p, {"sc", "sfn"}, "sc");
            area.syncMode = sync == "sfn" ? SyncMode::Sfn : SyncMode::SingleCell;
            area.sfnClusterSize = r_.get<int>(a,
                                              "cluster_size",
                                              p,
                                              area.syncMode == SyncMode::Sfn ? static_cast<int>(area.cells.size()) : 1);
            try
            {
                area.validate();
            }
            catch (const Error& e)
            {
                r_.issue(a, p, e.what());
                ok = false;
            }
            if (ok)
            {
                areaIds_.insert(area.id);
                s_.areas.push_back(area);
            }
        }
    }

    void readUes()
    {
        const YAML::Node n = root_["ues"];
        const std::string p = "ues";
        if (!r_.section(n, p, {"count", "quality", "placement", "cells", "list"}))
        {
            return;
        }
        const int qMax = s_.model.qMax();
        std::mt19937_64 gen = makeStream(s_.seed, RngStream::Generation);

        if (n["list"])
        {
            const YAML::Node list = n["list"];
            if (!list.IsSequence())
            {
                r_.issue(list, child(p, "list"), "expected a list of UEs");
                return;
            }
            for (std::size_t i = 0; i < list.size(); ++i)
            {
                const YAML::Node u = list[i];
                const std::string up = indexed(child(p, "list"), i);
                if (!r_.section(u, up, {"id", "cell", "quality"}))
                {
                    continue;
                }
                const auto id = r_.get<int>(u, "id", up);
                const auto cell = r_.get<int>(u, "cell", up);
                const int q = r_.get<int>(u, "quality", up, qMax);
                if (!id || *id <= 0)
                {
                    r_.issue(u, child(up, "id"), "required positive integer");
                    continue;
                }
                if (!cell || !cellIds_.contains(CellId{static_cast<std::uint32_t>(*cell)}))
                {
                    r_.issue(u, child(up, "cell"), "required id of a configured cell");
                    continue;
                }
                if (q < 0 || q > qMax)
                {
                    r_.issue(u["quality"], child(up, "quality"), fmt::format("{} outside [0, {}]", q, qMax));
                    continue;
                }
                UserEquipment ue;
                ue.id = UeId{static_cast<std::uint32_t>(*id)};
                if (!ueIds_.insert(ue.id).second)
                {
                    r_.issue(u["id"], child(up, "id"), fmt::format("duplicate UE id {}", *id));
                    continue;
                }
                ue.servingCell = CellId{static_cast<std::uint32_t>(*cell)};
                ue.channelQuality = q;
                s_.ues.push_back(ue);
            }
            return;
        }

        const int count = r_.get<int>(n, "count", p, 0);
        if (count < 0)
        {
            r_.issue(n["count"], child(p, "count"), "must be >= 0");
            return;
        }
        int qLo = qMax;
        int qHi = qMax;
        const YAML::Node qn = n["quality"];
        if (qn.IsDefined() && qn.IsSequence())
        {
            const auto range = r_.list<int>(n, "quality", p);
            if (!range || range->size() != 2)
            {
                r_.issue(qn, child(p, "quality"), "expected [min, max]");
            }
            else
            {
                qLo = (*range)[0];
                qHi = (*range)[1];
            }
        }
        else if (auto q = r_.get<int>(n, "quality", p))
        {
            qLo = qHi = *q;
        }
        if (qLo < 0 || qHi > qMax || qLo > qHi)
        {
            r_.issue(qn, child(p, "quality"), fmt::format("range [{}, {}] outside [0, {}]", qLo, qHi, qMax));
            qLo = qHi = qMax;
        }
        const std::string placement = r_.choice(n, "placement", p, {"round_robin", "random"}, "round_robin");

        std::vector<CellId> cells;
        if (auto only = r_.list<int>(n, "cells", p))
        {
            for (std::size_t k = 0; k < only->size(); ++k)
            {
                const CellId c{static_cast<std::uint32_t>((*only)[k])};
                if (!cellIds_.contains(c))
                {
                    r_.issue(n["cells"][k], indexed(child(p, "cells"), k), fmt::format("unknown cell {}", (*only)[k]));
                    continue;
                }
                cells.push_back(c);
            }
        }
        else
        {
            cells.assign(cellIds_.begin(), cellIds_.end());
        }
        if (cells.empty())
        {
            if (count > 0)
            {
                r_.issue(n, p, "no cell to place UEs in");
            }
            return;
        }
        std::uniform_int_distribution<int> quality(qLo, qHi);
        std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
        for (int i = 0; i < count; ++i)
        {
            UserEquipment ue;
            ue.id = UeId{static_cast<std::uint32_t>(i + 1)};
            ue.channelQuality = quality(gen);
            ue.servingCell = placement == "random" ? cells[pick(gen)] : cells[static_cast<std::size_t>(i) % cells.size()];
            ueIds_.insert(ue.id);
            s_.ues.push_back(ue);
        }
    }

    void readGroups()
    {
        const YAML::Node n = root_["groups"];
        if (!n.IsDefined() || n.IsNull())
        {
            return;
        }
        if (!n.IsSequence())
        {
            r_.issue(n, "groups", "expected a list of group specs");
            return;
        }
        const std::vector<UeId> pool(ueIds_.begin(), ueIds_.end());
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < n.size(); ++i)
        {
            const YAML::Node g = n[i];
            const std::string p = indexed("groups", i);
            if (!r_.section(g, p, {"count", "size", "members", "profile", "priority", "area"}))
            {
                continue;
            }
            GroupSpec spec;
            spec.profile = profileFor(r_.choice(g, "profile", p, {"voice", "video"}, "voice"));
            spec.priority = r_.get<int>(g, "priority", p, 1);
            if (auto area = r_.get<int>(g, "area", p))
            {
                const AreaId a{static_cast<std::uint32_t>(*area)};
                if (!areaIds_.contains(a))
                {
                    r_.issue(g["area"], child(p, "area"), fmt::format("unknown area {}", *area));
                }
                spec.area = a;
            }

            if (g["members"])
            {
                const auto members = r_.list<int>(g, "members", p);
                if (!members)
                {
                    continue;
                }
                for (std::size_t k = 0; k < members->size(); ++k)
                {
                    const UeId u{static_cast<std::uint32_t>((*members)[k])};
                    if (!ueIds_.contains(u))
                    {
                        r_.issue(g["members"][k], indexed(child(p, "members"), k), fmt::format("unknown UE {}", (*members)[k]));
                    }
                    spec.members.insert(u);
                }
                if (spec.members.empty())
                {
                    r_.issue(g["members"], child(p, "members"), "a group needs at least one member");
                    continue;
                }
                if (spec.members.size() > s_.maxGroupSize)
                {
                    r_.issue(g["members"],
                             child(p, "members"),
                             fmt::format("{} members exceed the {}-member group limit", spec.members.size(), s_.maxGroupSize));
                    continue;
                }
                s_.groups.push_back(spec);
                continue;
            }

            const int count = r_.get<int>(g, "count", p, 1);
            const auto size = r_.get<int>(g, "size", p);
            if (count < 0)
            {
                r_.issue(g["count"], child(p, "count"), "must be >= 0");
                continue;
            }
            if (!size)
            {
                r_.issue(g, child(p, "size"), "required unless members are listed");
                continue;
            }
            if (*size <= 0)
            {
                r_.issue(g["size"], child(p, "size"), "a group needs at least one member");
                continue;
            }
            if (static_cast<std::size_t>(*size) > s_.maxGroupSize)
            {
                r_.issue(g["size"],
                         child(p, "size"),
                         fmt::format("{} exceeds the {}-member group limit", *size, s_.maxGroupSize));
                continue;
            }
            if (static_cast<std::size_t>(*size) > pool.size())
            {
                r_.issue(g["size"], child(p, "size"), fmt::format("{} exceeds the {} configured UEs", *size, pool.size()));
                continue;
            }
            // Members are consecutive UE ids, wrapping around the UE list.
            for (int k = 0; k < count; ++k)
            {
                GroupSpec one = spec;
                for (int m = 0; m < *size; ++m)
                {
                    one.members.insert(pool[cursor % pool.size()]);
                    ++cursor;
                }
                s_.groups.push_back(std::move(one));
            }
        }
    }

    void readPolicy()
    {
        const YAML::Node n = root_["policy"];
        const std::string p = "policy";
        r_.section(n, p, {"kind", "loss_threshold", "loss_window_ms", "hysteresis", "uli_source", "uli_interval_ms"});
        Policy& pol = s_.policy;
        pol.kind = r_.choice(n, "kind", p, {"static", "dynamic"}, "static") == "dynamic" ? PolicyKind::DynamicActivation
                                                                                        : PolicyKind::StaticActivation;
        pol.lossThreshold = r_.get<double>(n, "loss_threshold", p, pol.lossThreshold);
        if (!(pol.lossThreshold > 0.0 && pol.lossThreshold < 1.0))
        {
            r_.issue(n["loss_threshold"], child(p, "loss_threshold"), "must be in (0, 1)");
        }
        pol.lossWindowMs = r_.get<TimeMs>(n, "loss_window_ms", p, pol.lossWindowMs);
        positive(n, "loss_window_ms", p, static_cast<double>(pol.lossWindowMs));
        pol.switchHysteresis = r_.get<int>(n, "hysteresis", p, pol.switchHysteresis);
        if (pol.switchHysteresis < 0)
        {
            r_.issue(n["hysteresis"], child(p, "hysteresis"), "must be >= 0");
        }
        pol.uliSource = r_.choice(n, "uli_source", p, {"pgw", "ue"}, "pgw") == "ue" ? UliSource::UeReported : UliSource::PgwUli;
        pol.uliIntervalMs = r_.get<TimeMs>(n, "uli_interval_ms", p, pol.uliIntervalMs);
        positive(n, "uli_interval_ms", p, static_cast<double>(pol.uliIntervalMs));
    }

    void readBearers()
    {
        const YAML::Node n = root_["bearers"];
        const std::string p = "bearers";
        r_.section(n, p, {"mbms", "unicast"});
        s_.preEstablishedMbms = r_.choice(n, "mbms", p, {"pre_established", "on_demand"}, "pre_established") == "pre_established";
        s_.preEstablishedUnicast =
            r_.choice(n, "unicast", p, {"pre_established", "on_demand"}, "pre_established") == "pre_established";
    }

    void readSchedule()
    {
        const YAML::Node n = root_["schedule"];
        const std::string p = "schedule";
        r_.section(n, p, {"mcch_period_ms", "mcch_phase_ms"});
        s_.schedule.modificationPeriodMs = r_.get<TimeMs>(n, "mcch_period_ms", p, s_.schedule.modificationPeriodMs);
        positive(n, "mcch_period_ms", p, static_cast<double>(s_.schedule.modificationPeriodMs));
        s_.schedule.phaseMs = r_.get<TimeMs>(n, "mcch_phase_ms", p, s_.schedule.phaseMs);
    }

    void readBudget()
    {
        const YAML::Node n = root_["budget"];
        const std::string p = "budget";
        r_.section(n,
                   p,
                   {"call_startup_ms", "bearer_establishment_ms", "radio_interface_ms", "network_interface_ms",
                    "request_processing_ms", "requirement_ms"});
        LatencyBudget& b = s_.budget;
        if (auto range = r_.list<TimeMs>(n, "call_startup_ms", p))
        {
            if (range->size() != 2)
            {
                r_.issue(n["call_startup_ms"], child(p, "call_startup_ms"), "expected [min, max]");
            }
            else
            {
                b.callStartupMinMs = (*range)[0];
                b.callStartupMaxMs = (*range)[1];
            }
        }
        b.bearerEstablishmentMs = r_.get<TimeMs>(n, "bearer_establishment_ms", p, b.bearerEstablishmentMs);
        b.radioIfMs = r_.get<TimeMs>(n, "radio_interface_ms", p, b.radioIfMs);
        b.networkIfMs = r_.get<TimeMs>(n, "network_interface_ms", p, b.networkIfMs);
        b.processingMs = r_.get<TimeMs>(n, "request_processing_ms", p, b.processingMs);
        b.requirementMs = r_.get<TimeMs>(n, "requirement_ms", p, b.requirementMs);
        try
        {
            b.validate();
        }
        catch (const Error& e)
        {
            r_.issue(n, p, e.what());
        }
    }

    void readArrivals()
    {
        const YAML::Node n = root_["arrivals"];
        const std::string p = "arrivals";
        r_.section(n, p, {"mode", "spread_ms", "mean_interarrival_ms", "duration", "mean_duration_ms", "max_calls"});
        ArrivalSpec& a = s_.arrivals;
        a.mode = r_.choice(n, "mode", p, {"once", "poisson"}, "once") == "poisson" ? ArrivalMode::Poisson : ArrivalMode::Once;
        a.spreadMs = r_.get<TimeMs>(n, "spread_ms", p, a.spreadMs);
        if (a.spreadMs < 0)
        {
            r_.issue(n["spread_ms"], child(p, "spread_ms"), "must be >= 0");
        }
        a.meanInterarrivalMs = r_.get<double>(n, "mean_interarrival_ms", p, a.meanInterarrivalMs);
        positive(n, "mean_interarrival_ms", p, a.meanInterarrivalMs);
        const std::string d = r_.choice(n, "duration", p, {"hold", "fixed", "exponential"}, "exponential");
        a.duration = d == "hold" ? DurationMode::Hold : d == "fixed" ? DurationMode::Fixed : DurationMode::Exponential;
        a.meanDurationMs = r_.get<double>(n, "mean_duration_ms", p, a.meanDurationMs);
        positive(n, "mean_duration_ms", p, a.meanDurationMs);
        a.maxCalls = r_.get<long>(n, "max_calls", p, a.maxCalls);
        if (a.maxCalls < 0)
        {
            r_.issue(n["max_calls"], child(p, "max_calls"), "must be >= 0");
        }
    }

    void readMobility()
    {
        const YAML::Node n = root_["mobility"];
        const std::string p = "mobility";
        r_.section(n, p, {"enabled", "mean_dwell_ms"});
        s_.mobility.enabled = r_.get<bool>(n, "enabled", p, false);
        s_.mobility.meanDwellMs = r_.get<double>(n, "mean_dwell_ms", p, s_.mobility.meanDwellMs);
        positive(n, "mean_dwell_ms", p, s_.mobility.meanDwellMs);
    }

    void readLoss()
    {
        const YAML::Node n = root_["loss"];
        const std::string p = "loss";
        r_.section(n, p, {"enabled", "mean_interval_ms", "max_loss"});
        s_.loss.enabled = r_.get<bool>(n, "enabled", p, false);
        s_.loss.meanIntervalMs = r_.get<double>(n, "mean_interval_ms", p, s_.loss.meanIntervalMs);
        positive(n, "mean_interval_ms", p, s_.loss.meanIntervalMs);
        s_.loss.maxLoss = r_.get<double>(n, "max_loss", p, s_.loss.maxLoss);
        if (s_.loss.maxLoss < 0 || s_.loss.maxLoss > 1)
        {
            r_.issue(n["max_loss"], child(p, "max_loss"), "must be in [0, 1]");
        }
    }

    void readTalk()
    {
        const YAML::Node n = root_["talk"];
        const std::string p = "talk";
        r_.section(n, p, {"enabled", "mean_interval_ms", "burst_ms"});
        s_.talk.enabled = r_.get<bool>(n, "enabled", p, false);
        s_.talk.meanIntervalMs = r_.get<double>(n, "mean_interval_ms", p, s_.talk.meanIntervalMs);
        positive(n, "mean_interval_ms", p, s_.talk.meanIntervalMs);
        s_.talk.burstMs = r_.get<TimeMs>(n, "burst_ms", p, s_.talk.burstMs);
        positive(n, "burst_ms", p, static_cast<double>(s_.talk.burstMs));
    }

    void readMetrics()
    {
        const YAML::Node n = root_["metrics"];
        const std::string p = "metrics";
        r_.section(n, p, {"sample_interval_ms", "check_invariants"});
        s_.metrics.sampleIntervalMs = r_.get<TimeMs>(n, "sample_interval_ms", p, s_.metrics.sampleIntervalMs);
        positive(n, "sample_interval_ms", p, static_cast<double>(s_.metrics.sampleIntervalMs));
        s_.metrics.checkInvariants = r_.get<bool>(n, "check_invariants", p, true);
    }

    void readExperiment()
    {
        const YAML::Node n = root_["experiment"];
        const std::string p = "experiment";
        r_.section(n, p, {"fig2_max_groups", "fig2_bandwidths", "fig2_sfn_cluster", "fig4_mcch_periods"});
        ExperimentParams& e = s_.experiment;
        e.fig2MaxGroups = r_.get<int>(n, "fig2_max_groups", p, e.fig2MaxGroups);
        positive(n, "fig2_max_groups", p, e.fig2MaxGroups);
        if (auto bw = r_.list<int>(n, "fig2_bandwidths", p))
        {
            e.fig2Bandwidths = *bw;
        }
        e.fig2SfnCluster = r_.get<int>(n, "fig2_sfn_cluster", p, e.fig2SfnCluster);
        positive(n, "fig2_sfn_cluster", p, e.fig2SfnCluster);
        if (auto periods = r_.list<TimeMs>(n, "fig4_mcch_periods", p))
        {
            e.fig4McchPeriods = *periods;
        }
    }

    Reader& r_;
    YAML::Node root_;
    std::optional<std::uint64_t> seedOverride_;
    Scenario s_;
    std::set<CellId> cellIds_;
    std::set<AreaId> areaIds_;
    std::set<UeId> ueIds_;
    std::vector<std::tuple<CellId, std::string, std::vector<int>>> neighborSpecs_;
};

Scenario parseOrIssues(std::string_view text,
                       std::string_view source,
                       const LoadOptions& options,
                       std::vector<ConfigIssue>& issues)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(std::string(text));
    }
    catch (const YAML::ParserException& e)
    {
        issues.push_back({std::string(source), e.mark.line + 1, "", e.msg});
        return {};
    }
    if (root.IsNull())
    {
        root = YAML::Node(YAML::NodeType::Map);
    }
    if (!root.IsMap())
    {
        issues.push_back({std::string(source), 1, "", "expected a mapping at the top level"});
        return {};
    }

    std::vector<std::string> overridden;
    for (const std::string& o : options.overrides)
    {
        if (auto f = applyOverride(root, o, issues))
        {
            overridden.push_back(*f);
        }
    }

    Reader reader{std::string(source), overridden};
    ScenarioBuilder builder(reader, root, options.seed);
    Scenario s = builder.build();
    issues.insert(issues.end(), reader.issues().begin(), reader.issues().end());
    if (issues.empty())
    {
        try
        {
            s.validate();
        }
        catch (const Error& e)
        {
            issues.push_back({std::string(source), 0, "", e.what()});
        }
    }
    return s;
}

std::string readFile(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorCode::IoError, fmt::format("cannot read {}", path));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

Scenario parseScenario(std::string_view text, std::string_view source, const LoadOptions& options)
{
    std::vector<ConfigIssue> issues;
    Scenario s = parseOrIssues(text, source, options, issues);
    if (!issues.empty())
    {
        throw ConfigError(std::move(issues));
    }
    return s;
}

Scenario loadScenario(const std::string& path, const LoadOptions& options)
{
    return parseScenario(readFile(path), path, options);
}

std::vector<ConfigIssue> validateConfigText(std::string_view text, std::string_view source, const LoadOptions& options)
{
    std::vector<ConfigIssue> issues;
    parseOrIssues(text, source, options, issues);
    return issues;
}

std::vector<ConfigIssue> validateConfig(const std::string& path, const LoadOptions& options)
{
    return validateConfigText(readFile(path), path, options);
}

std::string_view templateText(std::string_view name)
{
    for (const auto& [n, text] : detail::builtinTemplates())
    {
        if (n == name)
        {
            return text;
        }
    }
    throw Error(ErrorCode::UnknownTemplate, fmt::format("unknown template '{}'", name));
}

const std::vector<std::string>& templateNames()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [n, text] : detail::builtinTemplates())
        {
            out.emplace_back(n);
        }
        return out;
    }();
    return names;
}

Scenario loadTemplate(std::string_view name, const LoadOptions& options)
{
    return parseScenario(templateText(name), fmt::format("template:{}", name), options);
}

Scenario generateScenario(std::string_view templateName, std::uint64_t seed)
{
    LoadOptions options;
    options.seed = seed;
    return loadTemplate(templateName, options);
}

} // namespace pmrsim
