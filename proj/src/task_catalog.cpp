// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/task_catalog.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "vicl/embedded_data.hpp"
#include "vicl/error.hpp"
#include "vicl/util.hpp"

namespace vicl {

std::string_view to_string(TaskCategory category) {
    switch (category) {
        case TaskCategory::Restoration: return "restoration";
        case TaskCategory::Removal: return "removal";
        case TaskCategory::GenerationEnhancement: return "generation";
    }
    return "?";
}

std::string_view to_string(PairRelation relation) {
    return relation == PairRelation::IntraCategory ? "intra" : "inter";
}

PairRelation parse_relation(std::string_view text) {
    if (text == "intra" || text == "IntraCategory") return PairRelation::IntraCategory;
    if (text == "inter" || text == "InterCategory") return PairRelation::InterCategory;
    throw std::invalid_argument("unknown pair relation '" + std::string(text) + "'");
}

namespace {

TaskCategory parse_category(std::string_view text, const std::string& origin, std::size_t line) {
    if (text == "restoration") return TaskCategory::Restoration;
    if (text == "removal") return TaskCategory::Removal;
    if (text == "generation" || text == "generation-enhancement") return TaskCategory::GenerationEnhancement;
    throw ParseError(origin, line, "unknown category '" + std::string(text) + "'");
}

bool is_lower(std::string_view s) {
    return std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isupper(c); });
}

}  // namespace

TaskCatalog TaskCatalog::parse(std::string_view text, const std::string& origin) {
    TaskCatalog catalog;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    for (const auto& raw : util::split(text, '\n')) {
        ++line_no;
        const std::string line = util::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.rfind("version", 0) == 0) {
            try {
                catalog.m_version = std::stoi(line.substr(7));
            } catch (const std::exception&) {
                throw ParseError(origin, line_no, "bad version line");
            }
            continue;
        }
        const auto fields = util::split(line, '|');
        if (fields.size() != 4)
            throw ParseError(origin, line_no, "expected 'slug | name | category | lexemes'");
        TaskSpec spec;
        spec.id = util::trim(fields[0]);
        spec.display_name = util::trim(fields[1]);
        spec.category = parse_category(util::trim(fields[2]), origin, line_no);
        for (const auto& lex : util::split(fields[3], ',')) {
            auto t = util::trim(lex);
            if (!t.empty()) spec.lexemes.push_back(std::move(t));
        }
        if (spec.id.empty() || !is_lower(spec.id))
            throw ParseError(origin, line_no, "slug must be non-empty lowercase");
        if (spec.lexemes.empty())
            throw ParseError(origin, line_no, "task '" + spec.id + "' has no lexemes");
        for (const auto& lex : spec.lexemes)
            if (!is_lower(lex))
                throw ParseError(origin, line_no, "lexeme '" + lex + "' is not lowercase");
        if (!seen.insert(spec.id).second)
            throw ParseError(origin, line_no, "duplicate slug '" + spec.id + "'");
        catalog.m_tasks.push_back(std::move(spec));
    }
    if (catalog.m_version <= 0)
        throw ParseError(origin, 0, "missing 'version N' line");
    std::sort(catalog.m_tasks.begin(), catalog.m_tasks.end(), [](const TaskSpec& a, const TaskSpec& b) {
        if (a.category != b.category) return a.category < b.category;
        return a.id < b.id;
    });
    return catalog;
}

TaskCatalog TaskCatalog::load(const std::filesystem::path& path) {
    return parse(util::read_file(path), path.string());
}

const TaskCatalog& TaskCatalog::builtin() {
    static const TaskCatalog catalog = parse(embedded::files().at("catalog.txt"), "catalog.txt");
    return catalog;
}

const TaskSpec& TaskCatalog::task(std::string_view slug) const {
    auto it = std::find_if(m_tasks.begin(), m_tasks.end(), [&](const TaskSpec& t) { return t.id == slug; });
    if (it == m_tasks.end())
        throw CatalogMiss(std::string(slug));
    return *it;
}

bool TaskCatalog::contains(std::string_view slug) const {
    return std::any_of(m_tasks.begin(), m_tasks.end(), [&](const TaskSpec& t) { return t.id == slug; });
}

PairRelation TaskCatalog::classify_pair(std::string_view source, std::string_view target) const {
    return task(source).category == task(target).category ? PairRelation::IntraCategory
                                                          : PairRelation::InterCategory;
}

TaskPair TaskCatalog::make_pair(std::string_view source, std::string_view target) const {
    if (source == target)
        throw std::invalid_argument("a task pair needs two different tasks, got '" + std::string(source) + "' twice");
    return TaskPair{std::string(source), std::string(target), classify_pair(source, target)};
}

TaskPair TaskCatalog::parse_pair(std::string_view key) const {
    const auto colon = key.find(':');
    if (colon == std::string_view::npos)
        throw std::invalid_argument("task pair must be written 'source:target', got '" + std::string(key) + "'");
    return make_pair(key.substr(0, colon), key.substr(colon + 1));
}

std::vector<TaskPair> TaskCatalog::enumerate_pairs(std::optional<PairRelation> filter) const {
    std::vector<TaskPair> pairs;
    for (const auto& a : m_tasks)
        for (const auto& b : m_tasks) {
            if (a.id == b.id) continue;
            auto relation = a.category == b.category ? PairRelation::IntraCategory : PairRelation::InterCategory;
            if (filter && *filter != relation) continue;
            pairs.push_back({a.id, b.id, relation});
        }
    return pairs;
}

}  // namespace vicl
