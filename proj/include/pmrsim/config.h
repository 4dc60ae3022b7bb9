/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_CONFIG_H
#define PMRSIM_CONFIG_H

#include "pmrsim/sim.h"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmrsim
{

/// One problem found in a scenario file.
struct ConfigIssue
{
    std::string source;
    int line{0}; ///< 1-based; 0 when the value came from an override
    std::string field;
    std::string message;

    std::string str() const;
};

/// Raised by the loaders with every issue found, not only the first.
class ConfigError : public Error
{
  public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const
    {
        return issues_;
    }

  private:
    std::vector<ConfigIssue> issues_;
};

struct LoadOptions
{
    std::vector<std::string> overrides; ///< dotted.path=value, applied before validation
    std::optional<std::uint64_t> seed;  ///< replaces the file's seed
};

/// Parses and validates scenario text. Throws ConfigError.
Scenario parseScenario(std::string_view text, std::string_view source, const LoadOptions& options = {});

/// Reads a scenario file. Throws IoError when unreadable, ConfigError when invalid.
Scenario loadScenario(const std::string& path, const LoadOptions& options = {});

/// Structural and referential validation without running. Empty when the file is valid.
std::vector<ConfigIssue> validateConfig(const std::string& path, const LoadOptions& options = {});
std::vector<ConfigIssue> validateConfigText(std::string_view text,
                                            std::string_view source,
                                            const LoadOptions& options = {});

/// Preset scenario text. Throws UnknownTemplate.
std::string_view templateText(std::string_view name);
const std::vector<std::string>& templateNames();
Scenario loadTemplate(std::string_view name, const LoadOptions& options = {});

} // namespace pmrsim

#endif // PMRSIM_CONFIG_H
