// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vicl/prompt_engine.hpp"

namespace vicl {

class ModelClient;

/// A prompt record together with its unit-norm embedding.
struct EmbeddedRecord {
    PromptRecord record;
    std::vector<double> vector;
};

struct ClusterAssignment {
    std::size_t cluster_id = 0;
    std::vector<std::string> members;  ///< record ids, ascending
    std::string representative;        ///< set by select_representatives; the leader until then
    std::string leader;
};

inline constexpr double kDefaultClusterThreshold = 0.90;
inline constexpr std::size_t kDefaultKeepPerPair = 2000;

/// Dot product of two unit vectors.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Greedy leader clustering over records sorted by id: a record joins the
/// first cluster whose leader has cosine >= threshold, otherwise it founds a
/// new cluster. threshold must lie in (0, 1); vectors must be unit-norm.
std::vector<ClusterAssignment> cluster(std::span<const EmbeddedRecord> records, double threshold);

/// One record per cluster: the member with the lowest mean cosine to the
/// other members (ties by id). When there are more clusters than `cap`, the
/// representatives of the largest clusters are kept (ties by id). The result
/// is sorted by id. `clusters` gets its representative fields filled in.
std::vector<PromptRecord> select_representatives(std::vector<ClusterAssignment>& clusters,
                                                 std::span<const EmbeddedRecord> records, std::size_t cap);

struct DedupResult {
    std::vector<PromptRecord> kept;
    std::vector<ClusterAssignment> clusters;
};

/// Embeds `records` (through the embedder when they carry no embedding),
/// clusters them and keeps at most `cap` representatives.
DedupResult deduplicate(std::vector<PromptRecord> records, ModelClient* embedder, double threshold,
                        std::size_t cap);

}  // namespace vicl
