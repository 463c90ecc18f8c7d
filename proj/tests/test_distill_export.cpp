// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <map>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "support.hpp"
#include "vicl/distill_export.hpp"
#include "vicl/util.hpp"

using namespace vicl;
using nlohmann::json;

namespace {

const TaskCatalog& cat() { return TaskCatalog::builtin(); }

const PromptEngine& engine() {
    static const PromptEngine e(cat(), TemplateSet::builtin());
    return e;
}

SampleTriple triple(const TaskPair& pair, const std::string& sample_id) {
    SampleTriple t;
    t.pair = pair;
    t.demo_input = {"train/" + sample_id + "_in.png", ImageRole::Input, pair.source, Split::Train};
    t.demo_label = {"train/" + sample_id + "_gt.png", ImageRole::Label, pair.source, Split::Train};
    t.query_input = {"test/" + sample_id + "_in.png", ImageRole::Query, pair.target, Split::Test};
    t.query_label = ImageRef{"test/" + sample_id + "_SECRET_gt.png", ImageRole::Label, pair.target, Split::Test};
    t.sample_id = sample_id;
    return t;
}

std::string random_description(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {
        "gently",  "restore", "the",   "fine",   "texture", "across",  "darker", "regions", "while", "keeping",
        "colour",  "balance", "and",   "lift",   "edges",   "so",      "distant", "shapes", "read",  "crisply",
        "without", "halos",   "even",  "tones",  "smooth",  "gradients"};
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(6, 20);
    std::string out;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) out += (i ? " " : "") + words[pick(rng)];
    return out;
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
    std::vector<std::string> out;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("training instance shape") {
    const auto pair = cat().parse_pair("deraining:denoising");
    const auto t = triple(pair, "s1");
    const PromptRecord r("r1", "smooth the speckled areas and keep edges", pair, "s1", PromptGenerator::Teacher, cat());
    const auto inst = make_training_instance(r, t, engine());
    REQUIRE(inst.images.size() == 3);
    CHECK(inst.image_roles == std::vector<SlotRole>{SlotRole::DemoInput, SlotRole::DemoLabel, SlotRole::QueryInput});
    CHECK(inst.images[2] == t.query_input.path);
    CHECK(inst.assistant == r.text());
    CHECK(inst.record_id == "r1");
    CHECK(inst.sample_id == "s1");
    CHECK(inst.pair == pair.key());
    CHECK(inst.user_text.find("<image_1>") != std::string::npos);
    CHECK(inst.to_json().dump().find("SECRET") == std::string::npos);
}

TEST_CASE("export and validate a large generated set") {
    test::TempDir dir("distill");
    std::mt19937_64 rng(21);
    const auto pairs = cat().enumerate_pairs();
    std::vector<SampleTriple> triples;
    std::vector<PromptRecord> records;
    std::size_t leaky = 0;
    for (std::size_t i = 0; records.size() < 1000 + leaky; ++i) {
        const auto& pair = pairs[i % pairs.size()];
        const std::string sample = fmt::format("s{:04d}", i);
        triples.push_back(triple(pair, sample));
        std::string text = random_description(rng);
        if (i % 10 == 3) {
            text += " then apply " + cat().task(pair.target).lexemes.front();  // leaks the target task
            ++leaky;
        }
        records.emplace_back(fmt::format("r{:04d}", i), text, pair, sample, PromptGenerator::Teacher, cat());
    }

    const auto out = dir / "train.jsonl";
    const auto summary = export_training_set(records, triples, engine(), out);
    CHECK(summary.written == 1000);
    CHECK(summary.excluded_leaky == leaky);
    std::size_t per_pair_written = 0, per_pair_leaky = 0;
    for (const auto& [_, c] : summary.pairs) {
        per_pair_written += c.written;
        per_pair_leaky += c.excluded_leaky;
    }
    CHECK(per_pair_written == 1000);
    CHECK(per_pair_leaky == leaky);
    REQUIRE(std::filesystem::exists(export_manifest_path(out)));
    const auto manifest = json::parse(util::read_file(export_manifest_path(out)));
    CHECK(manifest["written"] == 1000);
    CHECK(manifest["excluded_leaky"] == leaky);

    const auto lines = lines_of(out);
    CHECK(lines.size() == 1000);
    for (const auto& line : lines) CHECK(line.find("SECRET") == std::string::npos);

    const auto report = validate_training_set(out, cat());
    CHECK(report.instances == 1000);
    CHECK(report.clean());
}

TEST_CASE("validation reports corrupted lines") {
    test::TempDir dir("distill");
    const auto pair = cat().parse_pair("deblurring:dehazing");
    std::vector<SampleTriple> triples = {triple(pair, "a"), triple(pair, "b")};
    std::vector<PromptRecord> records = {
        PromptRecord("ra", "lift the veil so distant shapes read crisply", pair, "a", PromptGenerator::Teacher, cat()),
        PromptRecord("rb", "even the tones and keep the fine texture", pair, "b", PromptGenerator::Teacher, cat())};
    const auto out = dir / "train.jsonl";
    export_training_set(records, triples, engine(), out);
    auto lines = lines_of(out);
    REQUIRE(lines.size() == 2);

    auto with_label = json::parse(lines[0]);
    with_label["user"]["images"].push_back("test/a_SECRET_gt.png");
    with_label["user"]["image_roles"].push_back("query_label");
    auto leaky_text = json::parse(lines[1]);
    leaky_text["assistant"] = "now apply dehazing to the query";
    auto swapped = json::parse(lines[1]);
    std::swap(swapped["user"]["image_roles"][0], swapped["user"]["image_roles"][1]);
    auto empty = json::parse(lines[1]);
    empty["assistant"] = "  ";

    std::ofstream(out) << lines[0] << "\n"
                       << with_label.dump() << "\n"
                       << "{not json\n"
                       << leaky_text.dump() << "\n"
                       << swapped.dump() << "\n"
                       << empty.dump() << "\n";
    const auto report = validate_training_set(out, cat());
    CHECK(report.instances == 6);
    std::map<std::size_t, std::string> by_line;
    for (const auto& v : report.violations) by_line[v.line] += v.message + "; ";
    CHECK(by_line.size() == 5);
    CHECK(by_line.count(1) == 0);
    CHECK(by_line[2].find("query label") != std::string::npos);
    CHECK(by_line[3].find("unparseable") != std::string::npos);
    CHECK(by_line[4].find("names a task") != std::string::npos);
    CHECK(by_line[5].find("roles out of order") != std::string::npos);
    CHECK(by_line[6].find("empty completion") != std::string::npos);
}

TEST_CASE("export errors") {
    test::TempDir dir("distill");
    const auto pair = cat().parse_pair("deblurring:dehazing");
    std::vector<SampleTriple> triples = {triple(pair, "a")};
    std::vector<PromptRecord> orphan = {
        PromptRecord("r", "keep the fine texture", pair, "missing", PromptGenerator::Teacher, cat())};
    CHECK_THROWS_AS(export_training_set(orphan, triples, engine(), dir / "x.jsonl"), Error);

    std::vector<PromptRecord> many = {
        PromptRecord("r1", "keep the fine texture", pair, "a", PromptGenerator::Teacher, cat()),
        PromptRecord("r2", "lift the shadows", pair, "a", PromptGenerator::Teacher, cat())};
    CHECK_THROWS_AS(export_training_set(many, triples, engine(), dir / "y.jsonl", 1), Error);
    CHECK_THROWS_AS(validate_training_set(dir / "absent.jsonl", cat()), Error);
}
