// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vicl/corpus.hpp"
#include "vicl/error.hpp"
#include "vicl/model_gateway.hpp"
#include "vicl/prompt_engine.hpp"

namespace vicl {

struct ScoreItem {
    std::string label;
    double value = 0.0;  ///< 0-10 scale
};

struct SubScores {
    std::vector<ScoreItem> sc_items;
    std::vector<ScoreItem> pq_items;
    std::string rationale;
    bool clamped = false;  ///< some raw score was outside [0, 10]
};

/// sc = min(sc items) / 10, pq = min(pq items) / 10, overall = sqrt(sc * pq).
struct VieResult {
    double sc = 0.0;
    double pq = 0.0;
    double overall = 0.0;
    double overall_0_10 = 0.0;
    std::string rationale;

    nlohmann::json to_json() const;
    static VieResult from_json(const nlohmann::json& j);
};

/// Evaluator text that does not end in a usable score block. raw() keeps
/// the full text for audit.
class EvaluatorParseError : public Error {
public:
    EvaluatorParseError(const std::string& what, std::string raw) : Error(what), m_raw(std::move(raw)) {}
    const std::string& raw() const { return m_raw; }

private:
    std::string m_raw;
};

/// Reads the trailing JSON block {"sc": [...], "pq": [...], "rationale": ...}.
/// Entries are numbers or {"label", "score"} objects; out-of-range scores are
/// clamped to [0, 10].
SubScores parse_evaluator_output(std::string_view raw, const std::vector<std::string>& sc_labels = {},
                                 const std::vector<std::string>& pq_labels = {});

/// Reads one phase's list ("sc" or "pq") from a trailing JSON block.
std::vector<ScoreItem> parse_phase_scores(std::string_view raw, std::string_view key,
                                          const std::vector<std::string>& labels, bool& clamped,
                                          std::string& rationale);

VieResult aggregate(const SubScores& sub);

/// Failure of one evaluation phase.
class VieEvaluationError : public Error {
public:
    VieEvaluationError(EvaluationPhase phase, const std::string& what)
        : Error(std::string(to_string(phase)) + " phase: " + what), m_phase(phase) {}
    EvaluationPhase phase() const { return m_phase; }

private:
    EvaluationPhase m_phase;
};

/// Runs the semantic-consistency and perceptual-quality rubrics against an
/// evaluator backend and aggregates them.
class VieScorer {
public:
    VieScorer(const PromptEngine& engine, ModelClient& evaluator, ImageLoader loader = preprocessing_loader());

    /// Rubric bundles, bound and ready to send. The SC bundle shows the
    /// demonstration pair, the query and the synthesized image; the PQ bundle
    /// shows the synthesized image only.
    PromptBundle sc_request(const ImageBuffer& generated, const SampleTriple& triple,
                            const std::string& instruction) const;
    PromptBundle pq_request(const ImageBuffer& generated) const;

    /// Issues both requests concurrently and aggregates.
    VieResult evaluate_output(const ImageBuffer& generated, const SampleTriple& triple,
                              const std::string& instruction) const;

private:
    const PromptEngine* m_engine;
    ModelClient* m_evaluator;
    ImageLoader m_loader;
};

}  // namespace vicl
