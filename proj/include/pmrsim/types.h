/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_TYPES_H
#define PMRSIM_TYPES_H

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pmrsim
{

/// Simulation time base. All latencies handled by the model are integral milliseconds.
using TimeMs = std::int64_t;

/// Abstract radio resource quanta (one unit = one PRB pair). Costs are per 10 ms frame.
using ResourceUnits = std::int64_t;

/**
 * Integer identifier with a tag type so that a UE id cannot be passed where a cell id is
 * expected. The prefix is only used when the id is rendered for logs and CSV output.
 */
template <typename Tag>
struct Id
{
    std::uint32_t value{0};

    constexpr Id() = default;
    constexpr explicit Id(std::uint32_t v)
        : value(v)
    {
    }

    friend constexpr auto operator<=>(Id, Id) = default;

    std::string str() const
    {
        return std::string(Tag::prefix) + std::to_string(value);
    }
};

struct UeTag
{
    static constexpr std::string_view prefix = "ue";
};
struct CellTag
{
    static constexpr std::string_view prefix = "c";
};
struct AreaTag
{
    static constexpr std::string_view prefix = "a";
};
struct GroupTag
{
    static constexpr std::string_view prefix = "g";
};
struct BearerTag
{
    static constexpr std::string_view prefix = "b";
};

using UeId = Id<UeTag>;
using CellId = Id<CellTag>;
using AreaId = Id<AreaTag>;
using GroupId = Id<GroupTag>;
using BearerId = Id<BearerTag>;

/// Temporary Mobile Group Identity of a multicast bearer; rendered as an opaque string.
struct Tmgi
{
    std::uint32_t value{0};

    friend constexpr auto operator<=>(Tmgi, Tmgi) = default;
    std::string str() const;
};

enum class ErrorCode
{
    EmptyGroup,
    GroupTooLarge,
    UnknownUe,
    UnknownGroup,
    UnknownCell,
    QualityOutOfRange,
    NoMembers,
    AdmissionFailed,
    NoPreestablishedBearer,
    NotMulticastReceiver,
    FloorTaken,
    IllegalTransition,
    AreaUnconfigured,
    CausalityViolation,
    ValidationError,
    UnknownTemplate,
    ConfigError,
    IoError,
};

std::string_view toString(ErrorCode code);

/// Base of every error raised by the library. The code is what callers branch on.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what),
          code_(code)
    {
    }

    ErrorCode code() const noexcept
    {
        return code_;
    }

  private:
    ErrorCode code_;
};

} // namespace pmrsim

template <typename Tag>
struct std::hash<pmrsim::Id<Tag>>
{
    std::size_t operator()(pmrsim::Id<Tag> id) const noexcept
    {
        return std::hash<std::uint32_t>{}(id.value);
    }
};

#endif // PMRSIM_TYPES_H
