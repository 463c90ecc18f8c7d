// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/prompt_engine.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "vicl/embedded_data.hpp"
#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;

std::string_view to_string(MessageRole role) {
    switch (role) {
        case MessageRole::System: return "system";
        case MessageRole::User: return "user";
        case MessageRole::Assistant: return "assistant";
    }
    return "?";
}

std::string_view to_string(PromptKind kind) {
    switch (kind) {
        case PromptKind::FixedBaseline: return "fixed";
        case PromptKind::TeacherElicitation: return "teacher";
        case PromptKind::StudentOpenEnded: return "student";
        case PromptKind::Deployment: return "deployment";
    }
    return "?";
}

std::string_view to_string(SlotRole slot) {
    switch (slot) {
        case SlotRole::DemoInput: return "demo_input";
        case SlotRole::DemoLabel: return "demo_label";
        case SlotRole::QueryInput: return "query_input";
        case SlotRole::QueryLabel: return "query_label";
        case SlotRole::Synthesized: return "synthesized";
    }
    return "?";
}

std::string_view to_string(LintStatus status) {
    switch (status) {
        case LintStatus::Clean: return "clean";
        case LintStatus::Leaky: return "leaky";
        case LintStatus::Empty: return "empty";
    }
    return "?";
}

std::string_view to_string(PromptGenerator generator) {
    switch (generator) {
        case PromptGenerator::Teacher: return "teacher";
        case PromptGenerator::Student: return "student";
        case PromptGenerator::Human: return "human";
    }
    return "?";
}

MessageRole parse_message_role(std::string_view text) {
    for (auto r : {MessageRole::System, MessageRole::User, MessageRole::Assistant})
        if (to_string(r) == text) return r;
    throw std::invalid_argument("unknown message role '" + std::string(text) + "'");
}

PromptKind parse_prompt_kind(std::string_view text) {
    for (auto k : {PromptKind::FixedBaseline, PromptKind::TeacherElicitation, PromptKind::StudentOpenEnded,
                   PromptKind::Deployment})
        if (to_string(k) == text) return k;
    throw std::invalid_argument("unknown prompt kind '" + std::string(text) + "'");
}

SlotRole parse_slot_role(std::string_view text) {
    for (auto s : {SlotRole::DemoInput, SlotRole::DemoLabel, SlotRole::QueryInput, SlotRole::QueryLabel,
                   SlotRole::Synthesized})
        if (to_string(s) == text) return s;
    throw std::invalid_argument("unknown image slot '" + std::string(text) + "'");
}

namespace {

PromptGenerator parse_generator(std::string_view text) {
    for (auto g : {PromptGenerator::Teacher, PromptGenerator::Student, PromptGenerator::Human})
        if (to_string(g) == text) return g;
    throw std::invalid_argument("unknown prompt generator '" + std::string(text) + "'");
}

}  // namespace

bool ImagePart::operator==(const ImagePart& other) const {
    if (slot != other.slot || path != other.path) return false;
    if (!pixels || !other.pixels) return !pixels && !other.pixels;
    return *pixels == *other.pixels;
}

std::string MultimodalMessage::text() const {
    std::string out;
    for (const auto& part : parts)
        if (const auto* t = std::get_if<TextPart>(&part)) out += t->text;
    return out;
}

std::vector<const ImagePart*> MultimodalMessage::images() const {
    std::vector<const ImagePart*> out;
    for (const auto& part : parts)
        if (const auto* img = std::get_if<ImagePart>(&part)) out.push_back(img);
    return out;
}

std::string MultimodalMessage::placeholder_text() const {
    std::string out;
    int n = 0;
    for (const auto& part : parts) {
        if (std::holds_alternative<ImagePart>(part)) {
            out += "<image_" + std::to_string(++n) + ">\n";
        } else {
            out += std::get<TextPart>(part).text;
        }
    }
    return out;
}

bool PromptBundle::fully_bound() const {
    for (const auto& m : messages)
        for (const auto* img : m.images())
            if (!img->pixels) return false;
    return true;
}

std::string PromptBundle::instruction() const {
    for (const auto& m : messages)
        if (m.role == MessageRole::User) return m.text();
    return {};
}

json to_wire(const PromptBundle& bundle) {
    json messages = json::array();
    for (const auto& m : bundle.messages) {
        json parts = json::array();
        for (const auto& part : m.parts) {
            if (const auto* t = std::get_if<TextPart>(&part)) {
                parts.push_back({{"type", "text"}, {"text", t->text}});
            } else {
                const auto& img = std::get<ImagePart>(part);
                json p = {{"type", "image"}, {"slot", to_string(img.slot)}, {"path", img.path.string()}};
                if (img.pixels) p["data"] = img.encoded ? *img.encoded : util::base64_encode(encode_png(*img.pixels));
                parts.push_back(std::move(p));
            }
        }
        messages.push_back({{"role", to_string(m.role)}, {"parts", std::move(parts)}});
    }
    json slots = json::array();
    for (auto s : bundle.image_slots) slots.push_back(to_string(s));
    return {{"kind", to_string(bundle.kind)},
            {"template", bundle.template_id},
            {"image_slots", std::move(slots)},
            {"messages", std::move(messages)}};
}

PromptBundle bundle_from_wire(const json& wire) {
    PromptBundle b;
    b.kind = parse_prompt_kind(wire.at("kind").get<std::string>());
    b.template_id = wire.value("template", std::string{});
    for (const auto& s : wire.at("image_slots")) b.image_slots.push_back(parse_slot_role(s.get<std::string>()));
    for (const auto& m : wire.at("messages")) {
        MultimodalMessage msg;
        msg.role = parse_message_role(m.at("role").get<std::string>());
        for (const auto& p : m.at("parts")) {
            const std::string type = p.at("type");
            if (type == "text") {
                msg.parts.emplace_back(TextPart{p.at("text").get<std::string>()});
            } else if (type == "image") {
                ImagePart img{parse_slot_role(p.at("slot").get<std::string>()), p.value("path", std::string{}), nullptr};
                if (p.contains("data")) {
                    auto data = std::make_shared<const std::string>(p["data"].get<std::string>());
                    img.pixels = std::make_shared<const ImageBuffer>(decode_png(util::base64_decode(*data)));
                    img.encoded = std::move(data);
                }
                msg.parts.emplace_back(std::move(img));
            } else {
                throw Error("unknown message part type '" + type + "'");
            }
        }
        b.messages.push_back(std::move(msg));
    }
    return b;
}

PromptBundle bind_images(PromptBundle bundle, const ImageLoader& loader) {
    for (auto& m : bundle.messages)
        for (auto& part : m.parts)
            if (auto* img = std::get_if<ImagePart>(&part); img && !img->pixels) {
                img->pixels = loader(*img);
                img->encoded = std::make_shared<const std::string>(util::base64_encode(encode_png(*img->pixels)));
            }
    return bundle;
}

ImageLoader preprocessing_loader() {
    return [](const ImagePart& part) {
        const ImageRole role = part.slot == SlotRole::QueryInput || part.slot == SlotRole::QueryLabel
                                   ? ImageRole::Query
                                   : ImageRole::Input;
        return std::make_shared<const ImageBuffer>(preprocess(load_png(part.path), role));
    };
}

// ---------------------------------------------------------------- lint

std::vector<std::string> LintResult::lexemes() const {
    std::vector<std::string> out;
    for (const auto& m : matches)
        if (std::find(out.begin(), out.end(), m.lexeme) == out.end()) out.push_back(m.lexeme);
    return out;
}

namespace {

std::string fold(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c == '-' || c == '_')
            c = ' ';
        else
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

void scan_task(const std::string& folded, const TaskSpec& task, std::vector<LintMatch>& out) {
    for (const auto& lexeme : task.lexemes) {
        const std::string needle = fold(lexeme);
        for (std::size_t pos = folded.find(needle); pos != std::string::npos; pos = folded.find(needle, pos + 1)) {
            const bool word_start = pos == 0 || !std::isalnum(static_cast<unsigned char>(folded[pos - 1]));
            if (word_start) out.push_back({lexeme, task.id, pos});
        }
    }
}

LintResult finish(std::vector<LintMatch> matches) {
    std::sort(matches.begin(), matches.end(), [](const LintMatch& a, const LintMatch& b) {
        return std::tie(a.offset, a.task, a.lexeme) < std::tie(b.offset, b.task, b.lexeme);
    });
    matches.erase(std::unique(matches.begin(), matches.end()), matches.end());
    LintResult r;
    r.status = matches.empty() ? LintStatus::Clean : LintStatus::Leaky;
    r.matches = std::move(matches);
    return r;
}

}  // namespace

LintResult lint_implicitness(std::string_view text, const TaskPair& pair, const TaskCatalog& catalog) {
    if (util::trim(text).empty()) return LintResult{LintStatus::Empty, {}};
    const std::string folded = fold(text);
    std::vector<LintMatch> matches;
    scan_task(folded, catalog.task(pair.source), matches);
    scan_task(folded, catalog.task(pair.target), matches);
    return finish(std::move(matches));
}

LintResult lint_against_all(std::string_view text, const TaskCatalog& catalog) {
    if (util::trim(text).empty()) return LintResult{LintStatus::Empty, {}};
    const std::string folded = fold(text);
    std::vector<LintMatch> matches;
    for (const auto& task : catalog.list_tasks()) scan_task(folded, task, matches);
    return finish(std::move(matches));
}

namespace {

std::string describe(const LintResult& lint) {
    if (lint.status == LintStatus::Empty) return "implicit description is empty";
    std::string out = "implicit description names a task:";
    for (const auto& lex : lint.lexemes()) out += " '" + lex + "'";
    return out;
}

}  // namespace

LeakyPromptError::LeakyPromptError(LintResult lint) : Error(describe(lint)), m_lint(std::move(lint)) {}

// ---------------------------------------------------------------- records

PromptRecord::PromptRecord(std::string id, std::string text, TaskPair pair, std::string source_sample,
                           PromptGenerator generator, const TaskCatalog& catalog)
    : m_id(std::move(id)), m_pair(std::move(pair)), m_source_sample(std::move(source_sample)),
      m_generator(generator) {
    set_text(std::move(text), catalog);
}

void PromptRecord::set_text(std::string text, const TaskCatalog& catalog) {
    m_text = std::move(text);
    m_lint = lint_implicitness(m_text, m_pair, catalog);
}

json PromptRecord::to_json() const {
    json matches = json::array();
    for (const auto& m : m_lint.matches) matches.push_back({{"lexeme", m.lexeme}, {"task", m.task}, {"offset", m.offset}});
    json doc = {{"id", m_id},
                {"text", m_text},
                {"pair", m_pair.key()},
                {"source_sample", m_source_sample},
                {"generator", to_string(m_generator)},
                {"lint", {{"status", to_string(m_lint.status)}, {"matches", std::move(matches)}}}};
    doc["embedding"] = embedding ? json(*embedding) : json(nullptr);
    return doc;
}

PromptRecord PromptRecord::from_json(const json& doc, const TaskCatalog& catalog) {
    PromptRecord r(doc.at("id").get<std::string>(), doc.at("text").get<std::string>(),
                   catalog.parse_pair(doc.at("pair").get<std::string>()), doc.value("source_sample", std::string{}),
                   parse_generator(doc.value("generator", std::string("teacher"))), catalog);
    if (doc.contains("embedding") && !doc["embedding"].is_null())
        r.embedding = doc["embedding"].get<std::vector<double>>();
    return r;
}

// ---------------------------------------------------------------- templates

PromptTemplate PromptTemplate::parse(std::string_view text, std::string id) {
    PromptTemplate t;
    t.m_id = std::move(id);
    std::string* current = nullptr;
    std::size_t line_no = 0;
    for (const auto& raw : util::split(text, '\n')) {
        ++line_no;
        const std::string trimmed = util::trim(raw);
        if (trimmed.size() > 2 && trimmed.front() == '[' && trimmed.back() == ']' &&
            trimmed.find(' ') == std::string::npos) {
            const std::string name = trimmed.substr(1, trimmed.size() - 2);
            if (t.has(name))
                throw ParseError(t.m_id, line_no, "duplicate section [" + name + "]");
            t.m_sections.emplace_back(name, std::string{});
            current = &t.m_sections.back().second;
            continue;
        }
        if (!current) {
            if (trimmed.empty() || trimmed.front() == '#') continue;
            throw ParseError(t.m_id, line_no, "text before the first [section]");
        }
        if (!current->empty()) *current += '\n';
        *current += raw;
    }
    for (auto& [name, body] : t.m_sections) body = util::trim(body);
    return t;
}

bool PromptTemplate::has(std::string_view section) const {
    return std::any_of(m_sections.begin(), m_sections.end(), [&](const auto& s) { return s.first == section; });
}

const std::string& PromptTemplate::section(std::string_view name) const {
    for (const auto& [n, body] : m_sections)
        if (n == name) return body;
    throw Error("template '" + m_id + "' has no [" + std::string(name) + "] section");
}

std::vector<std::pair<std::string, std::string>> PromptTemplate::items() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, body] : m_sections)
        if (name.rfind("item:", 0) == 0) out.emplace_back(name.substr(5), body);
    return out;
}

namespace {

constexpr const char* kTemplateNames[] = {"fixed", "teacher", "student", "deployment", "vie_sc", "vie_pq"};

PromptTemplate builtin_template(const std::string& name) {
    const std::string key = "templates/" + name + ".txt";
    return PromptTemplate::parse(embedded::files().at(key), key);
}

TemplateSet assemble(const std::function<PromptTemplate(const std::string&)>& get) {
    return TemplateSet{get(kTemplateNames[0]), get(kTemplateNames[1]), get(kTemplateNames[2]),
                       get(kTemplateNames[3]), get(kTemplateNames[4]), get(kTemplateNames[5])};
}

void require_sections(const PromptTemplate& t, std::initializer_list<const char*> names) {
    for (const char* n : names)
        if (!t.has(n) || t.section(n).empty())
            throw Error("template '" + t.id() + "' is missing mandatory section [" + n + "]");
}

}  // namespace

TemplateSet TemplateSet::builtin() { return assemble(builtin_template); }

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    return assemble([&](const std::string& name) {
        const auto path = dir / (name + ".txt");
        if (!std::filesystem::exists(path)) return builtin_template(name);
        return PromptTemplate::parse(util::read_file(path), path.string());
    });
}

// ---------------------------------------------------------------- engine

PromptEngine::PromptEngine(const TaskCatalog& catalog, TemplateSet templates)
    : m_catalog(&catalog), m_templates(std::move(templates)) {
    for (const auto* t : {&m_templates.fixed, &m_templates.student, &m_templates.deployment, &m_templates.teacher,
                          &m_templates.vie_sc, &m_templates.vie_pq})
        require_sections(*t, {"system", "instruction"});
    require_sections(m_templates.teacher, {"goal", "degradation", "visual_change", "constraint"});
    if (m_templates.deployment.section("instruction").find("{implicit}") == std::string::npos)
        throw Error("template '" + m_templates.deployment.id() + "' must contain {implicit}");
    for (const auto* t : {&m_templates.vie_sc, &m_templates.vie_pq})
        if (t->items().empty())
            throw Error("rubric template '" + t->id() + "' has no [item:...] sections");

    for (const auto* t : {&m_templates.teacher, &m_templates.student, &m_templates.deployment}) {
        std::string all = t->section("system") + "\n" + t->section("instruction");
        if (t == &m_templates.teacher)
            for (const char* s : {"goal", "degradation", "visual_change", "constraint"}) all += "\n" + t->section(s);
        if (auto lint = lint_against_all(all, catalog); lint.status == LintStatus::Leaky)
            throw Error("template '" + t->id() + "' names a task: '" + lint.matches.front().lexeme + "'");
    }
}

namespace {

ImagePart image_part(SlotRole slot, const ImageRef& ref) { return ImagePart{slot, ref.path, nullptr}; }

MultimodalMessage system_message(const PromptTemplate& t) {
    return MultimodalMessage{MessageRole::System, {TextPart{t.section("system")}}};
}

void require_image(const ImageRef& ref, const char* what) {
    if (ref.path.empty())
        throw std::invalid_argument(std::string("sample triple is missing the ") + what + " image");
}

}  // namespace

PromptBundle PromptEngine::three_image_bundle(PromptKind kind, const PromptTemplate& tmpl, const SampleTriple& triple,
                                              std::string instruction) const {
    require_image(triple.demo_input, "demonstration input");
    require_image(triple.demo_label, "demonstration label");
    require_image(triple.query_input, "query input");
    PromptBundle b;
    b.kind = kind;
    b.template_id = tmpl.id();
    b.image_slots = {SlotRole::DemoInput, SlotRole::DemoLabel, SlotRole::QueryInput};
    MultimodalMessage user{MessageRole::User,
                           {image_part(SlotRole::DemoInput, triple.demo_input),
                            image_part(SlotRole::DemoLabel, triple.demo_label),
                            image_part(SlotRole::QueryInput, triple.query_input), TextPart{std::move(instruction)}}};
    b.messages = {system_message(tmpl), std::move(user)};
    return b;
}

PromptBundle PromptEngine::build_fixed_prompt(const SampleTriple& triple) const {
    return three_image_bundle(PromptKind::FixedBaseline, m_templates.fixed, triple,
                              m_templates.fixed.section("instruction"));
}

PromptBundle PromptEngine::build_student_prompt(const SampleTriple& triple) const {
    return three_image_bundle(PromptKind::StudentOpenEnded, m_templates.student, triple,
                              m_templates.student.section("instruction"));
}

PromptBundle PromptEngine::build_teacher_prompt(const SampleTriple& triple) const {
    if (!triple.query_label)
        throw std::invalid_argument("teacher prompt needs the query label image");
    const auto& t = m_templates.teacher;
    std::string text = t.section("instruction") + "\n(1) " + t.section("goal") + "\n(2) " +
                       t.section("degradation") + "\n(3) " + t.section("visual_change") + "\n\n" +
                       t.section("constraint");
    PromptBundle b = three_image_bundle(PromptKind::TeacherElicitation, t, triple, std::move(text));
    require_image(*triple.query_label, "query label");
    auto& parts = b.messages.back().parts;
    parts.insert(parts.begin() + 3, image_part(SlotRole::QueryLabel, *triple.query_label));
    b.image_slots.push_back(SlotRole::QueryLabel);
    return b;
}

PromptBundle PromptEngine::build_deployment_prompt(const SampleTriple& triple, const PromptRecord& implicit,
                                                   bool allow_leaky) const {
    const LintResult lint = lint_implicitness(implicit.text(), triple.pair, *m_catalog);
    if (lint.status == LintStatus::Empty || (lint.status == LintStatus::Leaky && !allow_leaky))
        throw LeakyPromptError(lint);
    std::string text = m_templates.deployment.section("instruction");
    text.replace(text.find("{implicit}"), 10, implicit.text());
    return three_image_bundle(PromptKind::Deployment, m_templates.deployment, triple, std::move(text));
}

}  // namespace vicl
