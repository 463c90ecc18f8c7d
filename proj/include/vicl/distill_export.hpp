// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vicl/corpus.hpp"
#include "vicl/prompt_engine.hpp"

namespace vicl {

/// One fine-tuning example for the student: the three-image open-ended
/// prompt as input, the teacher's description as completion.
struct TrainingInstance {
    std::string system;
    std::string user_text;  ///< `<image_N>` placeholders followed by the prompt
    std::vector<std::filesystem::path> images;
    std::vector<SlotRole> image_roles;
    std::string assistant;
    std::string pair;
    std::string sample_id;
    std::string record_id;

    nlohmann::json to_json() const;
};

TrainingInstance make_training_instance(const PromptRecord& record, const SampleTriple& triple,
                                        const PromptEngine& engine);

struct ExportSummary {
    struct PairCounts {
        std::size_t written = 0;
        std::size_t excluded_leaky = 0;
    };
    std::map<std::string, PairCounts> pairs;
    std::size_t written = 0;
    std::size_t excluded_leaky = 0;
    std::filesystem::path data_path;
    std::filesystem::path manifest_path;

    nlohmann::json to_json() const;
};

/// Path of the summary manifest written next to a training file.
std::filesystem::path export_manifest_path(const std::filesystem::path& out);

/// Writes one JSON document per retained record to `out` and a summary
/// manifest to export_manifest_path(out). Records that fail the lint are
/// skipped and counted. Images are referenced by path.
ExportSummary export_training_set(std::span<const PromptRecord> retained, std::span<const SampleTriple> triples,
                                  const PromptEngine& engine, const std::filesystem::path& out,
                                  std::size_t cap_per_pair = 2000);

struct TrainingSetReport {
    struct Violation {
        std::size_t line = 0;
        std::string message;
    };
    std::size_t instances = 0;
    std::vector<Violation> violations;

    bool clean() const { return violations.empty(); }
};

TrainingSetReport validate_training_set(const std::filesystem::path& path, const TaskCatalog& catalog);

}  // namespace vicl
