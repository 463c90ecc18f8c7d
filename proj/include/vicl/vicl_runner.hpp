// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vicl/corpus.hpp"
#include "vicl/iqa_metrics.hpp"
#include "vicl/model_gateway.hpp"
#include "vicl/prompt_engine.hpp"
#include "vicl/vie_score.hpp"

namespace vicl {

/// Fixed-prompt baseline or the student-prompted pipeline.
enum class RunMode { FixedBaseline, Ours };
std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view text);

struct CandidateResult {
    int attempt = 0;
    /// PNG relative to the run directory; empty when the attempt failed.
    std::string image;
    Psnr psnr;
    double ssim = 0.0;
    std::optional<VieResult> vie;
    std::string vie_error;
    std::string prompt_used;  ///< PromptRecord id, or the template id for the baseline
    /// Empty on success; otherwise "<gateway error kind>: <message>".
    std::string failure;

    bool failed() const { return !failure.empty(); }
    nlohmann::json to_json() const;
    static CandidateResult from_json(const nlohmann::json& j);
};

enum class OutcomeStatus { Succeeded, Failed };

struct SampleOutcome {
    std::string sample_id;
    TaskPair pair;
    RunMode mode = RunMode::Ours;
    OutcomeStatus status = OutcomeStatus::Succeeded;
    std::optional<int> selected;
    std::vector<CandidateResult> candidates;
    std::optional<PromptRecord> implicit_prompt;
    std::string instruction;  ///< text given to the generator
    std::string failure;
    int k = 0;
    double generator_temperature = 0.0;
    std::string metric_resolution;  ///< e.g. "224x224"
    /// Wall-clock milliseconds per phase. Kept out of the outcome store
    /// (written to timings.jsonl) so stores stay reproducible.
    std::map<std::string, double> timings;

    const CandidateResult* selected_candidate() const;
    nlohmann::json to_json() const;
    static SampleOutcome from_json(const nlohmann::json& j, const TaskCatalog& catalog);
};

/// Index of the best non-failed candidate by PSNR; ties go to the lowest
/// attempt index. nullopt when every attempt failed.
std::optional<int> select_best(const std::vector<CandidateResult>& candidates);

struct RunOptions {
    int k = 10;
    RunMode mode = RunMode::Ours;
    /// Stop after the student step and wait for review_prompt().
    bool review = false;
    bool vie_all = false;
    /// Ask the student for a fresh description on every attempt.
    bool resample_prompt = false;
    bool allow_leaky = false;
    std::size_t workers = 1;
    ChannelPolicy channel_policy = ChannelPolicy::LuminanceOnly;
};

/// Result of run_pair.
struct PairRun {
    std::vector<SampleOutcome> outcomes;  ///< in sampling order, including resumed ones
    std::size_t executed = 0;
    std::size_t resumed = 0;
    std::vector<std::string> pending_review;
    bool truncated = false;
    std::string truncation_reason;
};

/// Directory layout of one run:
///   outcomes.jsonl         one SampleOutcome per line, append-only
///   timings.jsonl          wall-clock timings per sample
///   images/<mode>/<sample>/attempt_<i>.png
///   reviews/pending/<sample>.json, reviews/approved/<sample>.json, reviews/audit.jsonl
class RunStore {
public:
    explicit RunStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return m_dir; }
    std::filesystem::path outcomes_path() const { return m_dir / "outcomes.jsonl"; }

    std::vector<SampleOutcome> load_outcomes(const TaskCatalog& catalog) const;
    void append_outcome(const SampleOutcome& outcome);
    void append_marker(const nlohmann::json& marker);
    std::string save_candidate_image(RunMode mode, const std::string& sample_id, int attempt, const ImageBuffer& image);

    std::filesystem::path pending_review_path(const std::string& sample_id) const;
    std::filesystem::path approved_review_path(const std::string& sample_id) const;
    void append_audit(const nlohmann::json& entry);

private:
    void append_line(const std::filesystem::path& file, const std::string& line);

    std::filesystem::path m_dir;
    std::mutex m_mutex;
};

class Runner {
public:
    Runner(const PromptEngine& engine, Gateway& gateway, RunStore& store,
           ImageLoader loader = preprocessing_loader());

    /// Runs one triple end to end. Needs the query label. Returns nullopt
    /// when the sample is parked for review.
    std::optional<SampleOutcome> run_sample(const SampleTriple& triple, const RunOptions& options);

    /// Samples n triples (demonstrations from Train, queries from Test;
    /// unsplit manifests are split with the same seed) and runs the ones not
    /// already in the store.
    PairRun run_pair(const DatasetDescriptor& descriptor, const TaskPair& pair, std::size_t n, std::uint64_t seed,
                     const RunOptions& options);

    /// Approves (no edit) or replaces the student description of a sample
    /// parked for review. The edit is re-linted; a leaky edit is rejected
    /// unless allow_leaky.
    PromptRecord review_prompt(const std::string& sample_id, const std::optional<std::string>& edited_text,
                               bool allow_leaky = false);

private:
    PromptRecord student_prompt(const SampleTriple& triple, int sample_index);
    std::optional<PromptRecord> approved_prompt(const std::string& sample_id) const;

    const PromptEngine* m_engine;
    Gateway* m_gateway;
    RunStore* m_store;
    ImageLoader m_loader;
};

}  // namespace vicl
