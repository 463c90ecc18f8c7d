// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vicl/image.hpp"
#include "vicl/task_catalog.hpp"

namespace vicl {

enum class ImageRole { Input, Label, Query };
enum class Split { Unsplit, Train, Test };

std::string_view to_string(ImageRole role);
std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct ImageRef {
    std::filesystem::path path;
    ImageRole role = ImageRole::Input;
    std::string task;
    Split split = Split::Unsplit;

    bool operator==(const ImageRef&) const = default;
};

/// One input/label pair of a task, joined through its pair_key.
struct ImagePair {
    std::string task;
    std::string pair_key;
    std::filesystem::path input;
    std::filesystem::path label;
    Split split = Split::Unsplit;
    /// True when the split came from the manifest (an official split).
    bool official_split = false;
};

/// Input/label pairs grouped by task. Pairs of a task are sorted by pair_key.
struct DatasetDescriptor {
    std::filesystem::path manifest;
    std::map<std::string, std::vector<ImagePair>> tasks;

    std::size_t pair_count() const;
    std::size_t count(Split split) const;
    std::size_t count(const std::string& task, Split split) const;
};

struct ManifestOptions {
    /// Fail when a referenced image does not exist.
    bool require_files = true;
};

/// Reads a line-delimited JSON manifest. Each record carries task, role
/// (input|label), pair_key, path, and an optional split (train|test|empty).
/// Relative paths are resolved against the manifest's directory.
DatasetDescriptor load_manifest(const std::filesystem::path& path, const TaskCatalog& catalog,
                                const ManifestOptions& options = {});
void write_manifest(const DatasetDescriptor& descriptor, const std::filesystem::path& path);

/// Assigns Train/Test to every Unsplit pair, task by task: ceil(0.7 n) pairs
/// go to Train. Pairs that already carry a split are left alone.
DatasetDescriptor split_dataset(const DatasetDescriptor& descriptor, std::uint64_t seed);

struct PreprocessOptions {
    /// Random instead of center crop; training-data augmentation only.
    bool random_crop = false;
    std::uint64_t crop_seed = 0;
};

inline constexpr int kDemoResolution = 448;
inline constexpr int kQueryResolution = 224;

/// Aspect-preserving bilinear resize so the short side matches the role's
/// resolution (448 for Input/Label, 224 for Query), then a square crop.
ImageBuffer preprocess(const ImageBuffer& image, ImageRole role, const PreprocessOptions& options = {});

/// Demonstration pair from the source task plus a query from the target task.
struct SampleTriple {
    TaskPair pair;
    ImageRef demo_input;
    ImageRef demo_label;
    ImageRef query_input;
    std::optional<ImageRef> query_label;
    std::string sample_id;
    /// Drawn after every distinct combination was used.
    bool with_replacement = false;
};

struct SamplingOptions {
    /// nullopt accepts any split.
    std::optional<Split> demo_split = Split::Train;
    std::optional<Split> query_split = Split::Test;
    bool include_query_label = true;
};

/// Draws n (demo pair, query) combinations for `pair`, distinct while the
/// pool lasts. Deterministic for a fixed seed.
std::vector<SampleTriple> sample_triples(const DatasetDescriptor& descriptor, const TaskPair& pair,
                                         std::size_t n, std::uint64_t seed,
                                         const SamplingOptions& options = {});

nlohmann::json to_json(const SampleTriple& triple);
SampleTriple triple_from_json(const nlohmann::json& doc, const TaskCatalog& catalog);

/// Writes a small synthetic paired corpus (PNG files and manifest.jsonl) with
/// `pairs_per_task` input/label pairs for every catalog task. Inputs are
/// task-specific degradations of procedurally generated scenes. Returns the
/// manifest path.
std::filesystem::path write_synthetic_corpus(const std::filesystem::path& dir, const TaskCatalog& catalog,
                                             int pairs_per_task, std::uint64_t seed,
                                             int width = 96, int height = 72);

}  // namespace vicl
