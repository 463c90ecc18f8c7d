// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vicl/error.hpp"

namespace vicl {

enum class TaskCategory { Restoration, Removal, GenerationEnhancement };
enum class PairRelation { IntraCategory, InterCategory };

std::string_view to_string(TaskCategory category);
std::string_view to_string(PairRelation relation);
/// Accepts "intra"/"inter" as well as the full enumerator names.
PairRelation parse_relation(std::string_view text);

struct TaskSpec {
    std::string id;            ///< canonical lowercase slug, e.g. "deraining"
    std::string display_name;  ///< e.g. "Deraining"
    TaskCategory category;
    std::vector<std::string> lexemes;  ///< forbidden name tokens, lowercase
};

/// Ordered composition: the demonstration comes from `source`, the query
/// from `target`.
struct TaskPair {
    std::string source;
    std::string target;
    PairRelation relation = PairRelation::InterCategory;

    /// "source:target"
    std::string key() const { return source + ":" + target; }
    bool operator==(const TaskPair&) const = default;
};

/// The set of low-level vision tasks, loaded from a versioned text file.
/// Immutable after construction.
class TaskCatalog {
public:
    /// The catalog shipped with the library.
    static const TaskCatalog& builtin();
    static TaskCatalog load(const std::filesystem::path& path);
    static TaskCatalog parse(std::string_view text, const std::string& origin = "<catalog>");

    int version() const { return m_version; }

    /// Sorted by category, then slug.
    const std::vector<TaskSpec>& list_tasks() const { return m_tasks; }
    const TaskSpec& task(std::string_view slug) const;
    bool contains(std::string_view slug) const;

    PairRelation classify_pair(std::string_view source, std::string_view target) const;
    TaskPair make_pair(std::string_view source, std::string_view target) const;
    /// Parses "source:target".
    TaskPair parse_pair(std::string_view key) const;

    /// All ordered pairs with source != target, in list_tasks() order.
    std::vector<TaskPair> enumerate_pairs(std::optional<PairRelation> filter = std::nullopt) const;

private:
    int m_version = 0;
    std::vector<TaskSpec> m_tasks;
};

}  // namespace vicl
