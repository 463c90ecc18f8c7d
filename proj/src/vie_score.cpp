// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/vie_score.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <functional>
#include <future>

#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;

json VieResult::to_json() const {
    return {{"sc", sc}, {"pq", pq}, {"overall", overall}, {"overall_0_10", overall_0_10}, {"rationale", rationale}};
}

VieResult VieResult::from_json(const json& j) {
    return {j.at("sc").get<double>(), j.at("pq").get<double>(), j.at("overall").get<double>(),
            j.at("overall_0_10").get<double>(), j.value("rationale", std::string{})};
}

namespace {

/// The last JSON object in `raw` that is followed only by whitespace or code
/// fence backticks and satisfies `accept`.
std::optional<json> trailing_block(std::string_view raw, const std::function<bool(const json&)>& accept) {
    std::size_t end = raw.size();
    while (end > 0 && (std::isspace(static_cast<unsigned char>(raw[end - 1])) || raw[end - 1] == '`')) --end;
    if (end == 0 || raw[end - 1] != '}') return std::nullopt;
    for (std::size_t pos = raw.rfind('{', end - 1); pos != std::string_view::npos;
         pos = pos == 0 ? std::string_view::npos : raw.rfind('{', pos - 1)) {
        json block = json::parse(raw.substr(pos, end - pos), nullptr, false);
        if (!block.is_discarded() && block.is_object() && accept(block)) return block;
        if (pos == 0) break;
    }
    return std::nullopt;
}

std::vector<ScoreItem> read_items(const json& list, std::string_view key, const std::vector<std::string>& labels,
                                  bool& clamped, std::string_view raw) {
    if (!list.is_array() || list.empty())
        throw EvaluatorParseError("evaluator gave no '" + std::string(key) + "' scores", std::string(raw));
    std::vector<ScoreItem> items;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const json& entry = list[i];
        std::string label = i < labels.size() ? labels[i] : std::string(key) + "_" + std::to_string(i + 1);
        const json* value = &entry;
        if (entry.is_object()) {
            if (entry.contains("label") && entry["label"].is_string()) label = entry["label"];
            if (!entry.contains("score"))
                throw EvaluatorParseError("score entry without 'score'", std::string(raw));
            value = &entry["score"];
        }
        if (!value->is_number())
            throw EvaluatorParseError("non-numeric " + std::string(key) + " score: " + value->dump(), std::string(raw));
        double v = value->get<double>();
        if (!std::isfinite(v))
            throw EvaluatorParseError("non-finite " + std::string(key) + " score", std::string(raw));
        if (v < 0.0 || v > 10.0) {
            clamped = true;
            v = std::clamp(v, 0.0, 10.0);
        }
        items.push_back({std::move(label), v});
    }
    return items;
}

}  // namespace

std::vector<ScoreItem> parse_phase_scores(std::string_view raw, std::string_view key,
                                          const std::vector<std::string>& labels, bool& clamped,
                                          std::string& rationale) {
    const std::string k(key);
    auto block = trailing_block(raw, [&](const json& b) { return b.contains(k); });
    if (!block) throw EvaluatorParseError("evaluator output has no trailing {\"" + k + "\": [...]} block", std::string(raw));
    if (block->contains("rationale") && (*block)["rationale"].is_string()) rationale = (*block)["rationale"];
    else rationale = util::trim(raw.substr(0, raw.rfind('{')));
    return read_items((*block)[k], key, labels, clamped, raw);
}

SubScores parse_evaluator_output(std::string_view raw, const std::vector<std::string>& sc_labels,
                                 const std::vector<std::string>& pq_labels) {
    auto block = trailing_block(raw, [](const json& b) { return b.contains("sc") && b.contains("pq"); });
    if (!block)
        throw EvaluatorParseError("evaluator output has no trailing {\"sc\": [...], \"pq\": [...]} block",
                                  std::string(raw));
    SubScores sub;
    sub.sc_items = read_items((*block)["sc"], "sc", sc_labels, sub.clamped, raw);
    sub.pq_items = read_items((*block)["pq"], "pq", pq_labels, sub.clamped, raw);
    if (block->contains("rationale") && (*block)["rationale"].is_string()) sub.rationale = (*block)["rationale"];
    return sub;
}

VieResult aggregate(const SubScores& sub) {
    if (sub.sc_items.empty() || sub.pq_items.empty())
        throw std::invalid_argument("aggregate: both score lists need at least one item");
    auto min_of = [](const std::vector<ScoreItem>& items) {
        return std::min_element(items.begin(), items.end(),
                                [](const ScoreItem& a, const ScoreItem& b) { return a.value < b.value; })
            ->value;
    };
    VieResult r;
    r.sc = min_of(sub.sc_items) / 10.0;
    r.pq = min_of(sub.pq_items) / 10.0;
    r.overall = std::sqrt(r.sc * r.pq);
    r.overall_0_10 = 10.0 * r.overall;
    r.rationale = sub.rationale;
    return r;
}

// ---------------------------------------------------------------- scorer

VieScorer::VieScorer(const PromptEngine& engine, ModelClient& evaluator, ImageLoader loader)
    : m_engine(&engine), m_evaluator(&evaluator), m_loader(std::move(loader)) {}

namespace {

std::string rubric_text(const PromptTemplate& t, const std::string& instruction) {
    std::string text = t.section("instruction");
    if (auto pos = text.find("{instruction}"); pos != std::string::npos) text.replace(pos, 13, instruction);
    text += "\n\nQuestions:";
    int i = 0;
    for (const auto& [label, question] : t.items()) text += "\n" + std::to_string(++i) + ". [" + label + "] " + question;
    return text;
}

std::vector<std::string> labels_of(const PromptTemplate& t) {
    std::vector<std::string> out;
    for (const auto& [label, _] : t.items()) out.push_back(label);
    return out;
}

}  // namespace

PromptBundle VieScorer::sc_request(const ImageBuffer& generated, const SampleTriple& triple,
                                   const std::string& instruction) const {
    const auto& t = m_engine->templates().vie_sc;
    PromptBundle b;
    b.kind = PromptKind::Deployment;
    b.template_id = t.id();
    b.image_slots = {SlotRole::DemoInput, SlotRole::DemoLabel, SlotRole::QueryInput, SlotRole::Synthesized};
    MultimodalMessage user{MessageRole::User,
                           {ImagePart{SlotRole::DemoInput, triple.demo_input.path, nullptr},
                            ImagePart{SlotRole::DemoLabel, triple.demo_label.path, nullptr},
                            ImagePart{SlotRole::QueryInput, triple.query_input.path, nullptr},
                            ImagePart{SlotRole::Synthesized, {}, std::make_shared<const ImageBuffer>(generated)},
                            TextPart{rubric_text(t, instruction)}}};
    b.messages = {MultimodalMessage{MessageRole::System, {TextPart{t.section("system")}}}, std::move(user)};
    return bind_images(std::move(b), m_loader);
}

PromptBundle VieScorer::pq_request(const ImageBuffer& generated) const {
    const auto& t = m_engine->templates().vie_pq;
    PromptBundle b;
    b.kind = PromptKind::Deployment;
    b.template_id = t.id();
    b.image_slots = {SlotRole::Synthesized};
    MultimodalMessage user{MessageRole::User,
                           {ImagePart{SlotRole::Synthesized, {}, std::make_shared<const ImageBuffer>(generated)},
                            TextPart{rubric_text(t, "")}}};
    b.messages = {MultimodalMessage{MessageRole::System, {TextPart{t.section("system")}}}, std::move(user)};
    return b;
}

VieResult VieScorer::evaluate_output(const ImageBuffer& generated, const SampleTriple& triple,
                                     const std::string& instruction) const {
    const auto& templates = m_engine->templates();
    auto run_phase = [&](EvaluationPhase phase, PromptBundle bundle, std::vector<std::string> labels,
                         std::string_view key, bool& clamped, std::string& rationale) {
        try {
            const auto response = m_evaluator->evaluate(bundle, phase, labels);
            return parse_phase_scores(response.text, key, labels, clamped, rationale);
        } catch (const Error& e) {
            throw VieEvaluationError(phase, e.what());
        }
    };

    SubScores sub;
    bool sc_clamped = false, pq_clamped = false;
    std::string sc_rationale, pq_rationale;
    PromptBundle sc_bundle = sc_request(generated, triple, instruction);
    PromptBundle pq_bundle = pq_request(generated);
    auto pq_future = std::async(std::launch::async, [&] {
        return run_phase(EvaluationPhase::PerceptualQuality, std::move(pq_bundle), labels_of(templates.vie_pq), "pq",
                         pq_clamped, pq_rationale);
    });
    std::exception_ptr sc_error;
    try {
        sub.sc_items = run_phase(EvaluationPhase::SemanticConsistency, std::move(sc_bundle),
                                 labels_of(templates.vie_sc), "sc", sc_clamped, sc_rationale);
    } catch (...) {
        sc_error = std::current_exception();
    }
    sub.pq_items = pq_future.get();  // joins before any rethrow
    if (sc_error) std::rethrow_exception(sc_error);

    sub.clamped = sc_clamped || pq_clamped;
    sub.rationale = "SC: " + sc_rationale + "\nPQ: " + pq_rationale;
    return aggregate(sub);
}

}  // namespace vicl
