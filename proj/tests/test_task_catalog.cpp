// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <map>
#include <set>

#include "oracles.hpp"
#include "vicl/reference_tables.hpp"
#include "vicl/task_catalog.hpp"

using namespace vicl;
using vicl::test::kPublishedCategory;


TEST_CASE("builtin catalog has the twelve tasks in three categories") {
    const auto& cat = TaskCatalog::builtin();
    REQUIRE(cat.list_tasks().size() == 12);
    std::map<TaskCategory, int> counts;
    for (const auto& t : cat.list_tasks()) {
        ++counts[t.category];
        REQUIRE(kPublishedCategory.count(t.id));
        CHECK(!t.lexemes.empty());
    }
    CHECK(counts[TaskCategory::Restoration] == 5);
    CHECK(counts[TaskCategory::Removal] == 2);
    CHECK(counts[TaskCategory::GenerationEnhancement] == 5);
}

TEST_CASE("132 ordered pairs, 42 intra and 90 inter") {
    const auto& cat = TaskCatalog::builtin();
    const auto pairs = cat.enumerate_pairs();
    CHECK(pairs.size() == 132);
    std::set<std::string> keys;
    for (const auto& p : pairs) {
        CHECK(p.source != p.target);
        keys.insert(p.key());
        const bool same = kPublishedCategory.at(p.source) == kPublishedCategory.at(p.target);
        CHECK((p.relation == PairRelation::IntraCategory) == same);
    }
    CHECK(keys.size() == 132);
    CHECK(cat.enumerate_pairs(PairRelation::IntraCategory).size() == 42);
    CHECK(cat.enumerate_pairs(PairRelation::InterCategory).size() == 90);
}

TEST_CASE("every reference pair resolves with the published relation") {
    const auto& cat = TaskCatalog::builtin();
    CHECK(reference_rows().size() == 19);
    for (const auto& row : reference_rows()) {
        const TaskPair p = cat.parse_pair(row.key());
        const bool same = kPublishedCategory.at(row.source) == kPublishedCategory.at(row.target);
        CHECK((p.relation == PairRelation::IntraCategory) == same);
    }
    // The captions name one example of each kind.
    CHECK(cat.classify_pair("deblurring", "demoireing") == PairRelation::IntraCategory);
    CHECK(cat.classify_pair("reflection-removal", "dehazing") == PairRelation::InterCategory);
}

TEST_CASE("lookups and errors") {
    const auto& cat = TaskCatalog::builtin();
    CHECK(cat.task("deraining").display_name == "Deraining");
    CHECK_THROWS_AS(cat.task("sharpening"), CatalogMiss);
    CHECK_THROWS_AS(cat.parse_pair("deraining:sharpening"), CatalogMiss);
    CHECK_THROWS_AS(cat.make_pair("deraining", "deraining"), std::invalid_argument);
    CHECK_THROWS_AS(cat.parse_pair("deraining"), std::invalid_argument);
    CHECK(to_string(cat.classify_pair("deraining", "denoising")) == "intra");
    CHECK(parse_relation("inter") == PairRelation::InterCategory);
}

TEST_CASE("catalog parser reports line numbers") {
    CHECK(TaskCatalog::parse("version 2\na | A | removal | aa\nb | B | removal | bb\n").version() == 2);
    try {
        TaskCatalog::parse("version 1\na | A | removal | aa\nb | B | sideways | bb\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(TaskCatalog::parse("a | A | removal | aa\n"), ParseError);
    CHECK_THROWS_AS(TaskCatalog::parse("version 1\na | A | removal | aa\na | A | removal | aa\n"), ParseError);
}
