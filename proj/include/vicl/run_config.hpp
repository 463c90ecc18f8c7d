// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "vicl/model_gateway.hpp"

namespace vicl {

/// Run configuration file (JSON). Relative paths resolve against the file's
/// directory.
///   {"backends": {...}, "manifest": "...", "run_root": "runs",
///    "templates": "...", "catalog": "...", "workers": 1, "seed": 0,
///    "tiers": {"src:tgt": "top"}}
struct RunConfig {
    BackendSet backends;
    std::optional<std::filesystem::path> manifest;
    std::filesystem::path run_root = "runs";
    std::optional<std::filesystem::path> templates;
    std::optional<std::filesystem::path> catalog;
    std::size_t workers = 1;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> tiers;

    static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);
    /// All-mock backends, no manifest.
    static RunConfig mock();
};

}  // namespace vicl
