// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vicl/corpus.hpp"
#include "vicl/error.hpp"
#include "vicl/image.hpp"
#include "vicl/task_catalog.hpp"

namespace vicl {

enum class MessageRole { System, User, Assistant };
enum class PromptKind { FixedBaseline, TeacherElicitation, StudentOpenEnded, Deployment };
/// What an image slot holds. Synthesized is the generated image shown to
/// the evaluator.
enum class SlotRole { DemoInput, DemoLabel, QueryInput, QueryLabel, Synthesized };

std::string_view to_string(MessageRole role);
std::string_view to_string(PromptKind kind);
std::string_view to_string(SlotRole slot);
MessageRole parse_message_role(std::string_view text);
PromptKind parse_prompt_kind(std::string_view text);
SlotRole parse_slot_role(std::string_view text);

struct TextPart {
    std::string text;
    bool operator==(const TextPart&) const = default;
};

/// An image referenced by slot. `path` names the source file when there is
/// one; `pixels` holds the bound (preprocessed) image sent to a backend.
struct ImagePart {
    SlotRole slot;
    std::filesystem::path path;
    std::shared_ptr<const ImageBuffer> pixels;
    /// Base64 PNG of `pixels`, filled by bind_images so repeated requests
    /// do not re-encode. Not part of equality.
    std::shared_ptr<const std::string> encoded = nullptr;

    bool operator==(const ImagePart& other) const;
};

using MessagePart = std::variant<TextPart, ImagePart>;

struct MultimodalMessage {
    MessageRole role = MessageRole::User;
    std::vector<MessagePart> parts;

    /// Concatenated text parts.
    std::string text() const;
    std::vector<const ImagePart*> images() const;
    /// Text with one `<image_N>` placeholder line per image, in part order.
    std::string placeholder_text() const;

    bool operator==(const MultimodalMessage&) const = default;
};

struct PromptBundle {
    PromptKind kind = PromptKind::FixedBaseline;
    std::string template_id;
    std::vector<MultimodalMessage> messages;
    /// Image slots in the order the images appear.
    std::vector<SlotRole> image_slots;

    bool fully_bound() const;
    /// Text of the user turn.
    std::string instruction() const;

    bool operator==(const PromptBundle&) const = default;
};

/// Wire form: messages with a parts array of {type:"text"} and
/// {type:"image", slot, path, data: base64 PNG}. Unbound images carry no data.
nlohmann::json to_wire(const PromptBundle& bundle);
PromptBundle bundle_from_wire(const nlohmann::json& wire);

/// Loads every image slot of the bundle through `loader`.
using ImageLoader = std::function<std::shared_ptr<const ImageBuffer>(const ImagePart&)>;
PromptBundle bind_images(PromptBundle bundle, const ImageLoader& loader);
/// Loads the file and applies the role's preprocessing (demonstration
/// images at 448, query images at 224).
ImageLoader preprocessing_loader();

enum class LintStatus { Clean, Leaky, Empty };
std::string_view to_string(LintStatus status);

struct LintMatch {
    std::string lexeme;
    std::string task;
    std::size_t offset = 0;  ///< byte offset in the linted text

    bool operator==(const LintMatch&) const = default;
};

struct LintResult {
    LintStatus status = LintStatus::Empty;
    std::vector<LintMatch> matches;  ///< sorted by offset

    bool clean() const { return status == LintStatus::Clean; }
    /// Distinct matched lexemes in first-match order.
    std::vector<std::string> lexemes() const;
    bool operator==(const LintResult&) const = default;
};

/// Case-insensitive scan of `text` for any lexeme of the pair's two tasks.
/// A lexeme matches at a word start; '-' and '_' in the text count as spaces.
LintResult lint_implicitness(std::string_view text, const TaskPair& pair, const TaskCatalog& catalog);
/// Same scan against every task in the catalog.
LintResult lint_against_all(std::string_view text, const TaskCatalog& catalog);

enum class PromptGenerator { Teacher, Student, Human };
std::string_view to_string(PromptGenerator generator);

/// An implicit description with its provenance. The lint result always
/// reflects the current text.
class PromptRecord {
public:
    PromptRecord(std::string id, std::string text, TaskPair pair, std::string source_sample,
                 PromptGenerator generator, const TaskCatalog& catalog);

    const std::string& id() const { return m_id; }
    const std::string& text() const { return m_text; }
    const TaskPair& pair() const { return m_pair; }
    const std::string& source_sample() const { return m_source_sample; }
    PromptGenerator generator() const { return m_generator; }
    const LintResult& lint() const { return m_lint; }

    void set_text(std::string text, const TaskCatalog& catalog);

    std::optional<std::vector<double>> embedding;

    nlohmann::json to_json() const;
    /// The stored lint is ignored and recomputed.
    static PromptRecord from_json(const nlohmann::json& doc, const TaskCatalog& catalog);

private:
    std::string m_id;
    std::string m_text;
    TaskPair m_pair;
    std::string m_source_sample;
    PromptGenerator m_generator;
    LintResult m_lint;
};

/// Raised when a description that fails the implicitness lint is used where
/// a clean one is required.
class LeakyPromptError : public Error {
public:
    explicit LeakyPromptError(LintResult lint);
    const LintResult& lint() const { return m_lint; }

private:
    LintResult m_lint;
};

/// Named sections of a template file. A section starts with a `[name]` line;
/// lines starting with '#' before the first section are comments.
class PromptTemplate {
public:
    static PromptTemplate parse(std::string_view text, std::string id);

    const std::string& id() const { return m_id; }
    bool has(std::string_view section) const;
    const std::string& section(std::string_view name) const;
    /// Sections named "item:<label>", in file order.
    std::vector<std::pair<std::string, std::string>> items() const;

private:
    std::string m_id;
    std::vector<std::pair<std::string, std::string>> m_sections;
};

/// Template files used by the pipeline: fixed, teacher, student, deployment,
/// vie_sc and vie_pq.
struct TemplateSet {
    PromptTemplate fixed, teacher, student, deployment, vie_sc, vie_pq;

    static TemplateSet builtin();
    /// Reads <dir>/<name>.txt, falling back to the built-in template for any
    /// missing file.
    static TemplateSet load(const std::filesystem::path& dir);
};

/// Builds every prompt of the pipeline. Immutable; safe to share.
class PromptEngine {
public:
    /// Validates the templates: mandatory sections present and the teacher
    /// template free of every catalog lexeme.
    PromptEngine(const TaskCatalog& catalog, TemplateSet templates);

    const TaskCatalog& catalog() const { return *m_catalog; }
    const TemplateSet& templates() const { return m_templates; }

    PromptBundle build_fixed_prompt(const SampleTriple& triple) const;
    PromptBundle build_teacher_prompt(const SampleTriple& triple) const;
    PromptBundle build_student_prompt(const SampleTriple& triple) const;
    PromptBundle build_deployment_prompt(const SampleTriple& triple, const PromptRecord& implicit,
                                         bool allow_leaky = false) const;

    LintResult lint(std::string_view text, const TaskPair& pair) const {
        return lint_implicitness(text, pair, *m_catalog);
    }

private:
    PromptBundle three_image_bundle(PromptKind kind, const PromptTemplate& tmpl, const SampleTriple& triple,
                                    std::string instruction) const;

    const TaskCatalog* m_catalog;
    TemplateSet m_templates;
};

}  // namespace vicl
