// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <set>

#include "support.hpp"
#include "vicl/corpus.hpp"

using namespace vicl;
namespace fs = std::filesystem;

namespace {

const TaskCatalog& cat() { return TaskCatalog::builtin(); }

ImagePair bare_pair(const std::string& task, const std::string& key, Split split = Split::Unsplit) {
    ImagePair p;
    p.task = task;
    p.pair_key = key;
    p.split = split;
    return p;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    for (const auto& l : lines) out << l << '\n';
}

std::size_t parse_line(const fs::path& manifest) {
    try {
        load_manifest(manifest, cat());
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_CASE("synthetic corpus loads with every task") {
    test::TempDir dir("corpus");
    const auto manifest = write_synthetic_corpus(dir.path(), cat(), 4, 11);
    const auto desc = load_manifest(manifest, cat());
    CHECK(desc.tasks.size() == 12);
    CHECK(desc.pair_count() == 48);
    CHECK(desc.count(Split::Unsplit) == 48);
    for (const auto& [task, pairs] : desc.tasks)
        for (const auto& p : pairs) {
            CHECK(fs::exists(p.input));
            CHECK(fs::exists(p.label));
        }
}

TEST_CASE("70/30 split rounds the train share up, per task, deterministically") {
    test::TempDir dir("corpus");
    const auto desc = load_manifest(write_synthetic_corpus(dir.path(), cat(), 5, 3), cat());
    const auto a = split_dataset(desc, 42);
    const auto b = split_dataset(desc, 42);
    for (const auto& [task, _] : desc.tasks) {
        CHECK(a.count(task, Split::Train) == 4);  // ceil(3.5)
        CHECK(a.count(task, Split::Test) == 1);
        for (std::size_t i = 0; i < a.tasks.at(task).size(); ++i)
            CHECK(a.tasks.at(task)[i].split == b.tasks.at(task)[i].split);
    }
    bool differs = false;
    const auto c = split_dataset(desc, 43);
    for (const auto& [task, pairs] : desc.tasks)
        for (std::size_t i = 0; i < pairs.size(); ++i) differs |= a.tasks.at(task)[i].split != c.tasks.at(task)[i].split;
    CHECK(differs);
}

TEST_CASE("split sizes over a range of pool sizes") {
    for (std::size_t n = 2; n <= 20; ++n) {
        DatasetDescriptor d;
        for (std::size_t i = 0; i < n; ++i) d.tasks["deraining"].push_back(bare_pair("deraining", std::to_string(i)));
        const auto s = split_dataset(d, 1);
        const std::size_t train = static_cast<std::size_t>(std::ceil(0.7 * static_cast<double>(n) - 1e-9));
        CHECK(s.count("deraining", Split::Train) == train);
        CHECK(s.count("deraining", Split::Test) == n - train);
    }
    DatasetDescriptor one;
    one.tasks["deraining"].push_back(bare_pair("deraining", "0"));
    CHECK_THROWS_AS(split_dataset(one, 1), Error);
}

TEST_CASE("official splits are kept") {
    test::TempDir dir("corpus");
    save_png(ImageBuffer(8, 8), dir / "a.png");
    write_lines(dir / "m.jsonl",
                {R"({"task":"deraining","role":"input","pair_key":"k1","path":"a.png","split":"test"})",
                 R"({"task":"deraining","role":"label","pair_key":"k1","path":"a.png","split":"test"})",
                 R"({"task":"deraining","role":"input","pair_key":"k2","path":"a.png","split":"train"})",
                 R"({"task":"deraining","role":"label","pair_key":"k2","path":"a.png","split":"train"})"});
    const auto d = split_dataset(load_manifest(dir / "m.jsonl", cat()), 9);
    CHECK(d.count("deraining", Split::Test) == 1);
    CHECK(d.count("deraining", Split::Train) == 1);
}

TEST_CASE("manifest errors carry line numbers") {
    test::TempDir dir("corpus");
    save_png(ImageBuffer(8, 8), dir / "a.png");
    const std::string in = R"({"task":"deraining","role":"input","pair_key":"k","path":"a.png"})";
    const std::string gt = R"({"task":"deraining","role":"label","pair_key":"k","path":"a.png"})";

    write_lines(dir / "bad.jsonl", {in, gt, "{not json"});
    CHECK(parse_line(dir / "bad.jsonl") == 3);

    write_lines(dir / "missing.jsonl", {in, R"({"task":"deraining","role":"label","pair_key":"k","path":"nope.png"})"});
    CHECK(parse_line(dir / "missing.jsonl") == 2);

    write_lines(dir / "dangling.jsonl", {in});
    CHECK(parse_line(dir / "dangling.jsonl") == 1);

    write_lines(dir / "field.jsonl", {gt, R"({"task":"deraining","pair_key":"k","path":"a.png"})"});
    CHECK(parse_line(dir / "field.jsonl") == 2);

    write_lines(dir / "task.jsonl", {R"({"task":"sharpening","role":"input","pair_key":"k","path":"a.png"})"});
    CHECK_THROWS_AS(load_manifest(dir / "task.jsonl", cat()), CatalogMiss);
}

TEST_CASE("manifest write and reload") {
    test::TempDir dir("corpus");
    const auto desc = split_dataset(load_manifest(write_synthetic_corpus(dir.path(), cat(), 3, 1), cat()), 5);
    write_manifest(desc, dir / "split.jsonl");
    const auto back = load_manifest(dir / "split.jsonl", cat());
    CHECK(back.count(Split::Train) == desc.count(Split::Train));
    for (const auto& [task, pairs] : desc.tasks)
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            CHECK(back.tasks.at(task)[i].split == pairs[i].split);
            CHECK(fs::equivalent(back.tasks.at(task)[i].input, pairs[i].input));
        }
}

TEST_CASE("sampling draws demonstrations from train and queries from test") {
    test::TempDir dir("corpus");
    const auto desc = split_dataset(load_manifest(write_synthetic_corpus(dir.path(), cat(), 10, 2), cat()), 7);
    const TaskPair pair = cat().parse_pair("deraining:denoising");
    const auto triples = sample_triples(desc, pair, 12, 99);
    REQUIRE(triples.size() == 12);
    std::set<std::string> ids;
    for (const auto& t : triples) {
        CHECK(t.demo_input.task == "deraining");
        CHECK(t.query_input.task == "denoising");
        CHECK(t.demo_input.split == Split::Train);
        CHECK(t.query_input.split == Split::Test);
        REQUIRE(t.query_label);
        CHECK_FALSE(t.with_replacement);
        ids.insert(t.sample_id);
    }
    CHECK(ids.size() == 12);

    const auto again = sample_triples(desc, pair, 12, 99);
    for (std::size_t i = 0; i < 12; ++i) CHECK(again[i].sample_id == triples[i].sample_id);

    // 7 train demos x 3 test queries = 21 combinations.
    const auto many = sample_triples(desc, pair, 25, 99);
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < many.size(); ++i) {
        CHECK(many[i].with_replacement == (i >= 21));
        distinct.insert(many[i].sample_id);
    }
    CHECK(distinct.size() == 25);

    SamplingOptions no_label;
    no_label.include_query_label = false;
    CHECK_FALSE(sample_triples(desc, pair, 1, 1, no_label)[0].query_label);
}

TEST_CASE("sampling needs non-empty pools") {
    DatasetDescriptor d;
    d.tasks["deraining"].push_back(bare_pair("deraining", "0", Split::Train));
    CHECK_THROWS_AS(sample_triples(d, cat().parse_pair("deraining:denoising"), 1, 0), Error);
}

TEST_CASE("triples round-trip through JSON") {
    test::TempDir dir("corpus");
    const auto desc = split_dataset(load_manifest(write_synthetic_corpus(dir.path(), cat(), 4, 2), cat()), 7);
    for (const auto& t : sample_triples(desc, cat().parse_pair("inpainting:colorization"), 3, 1)) {
        const auto back = triple_from_json(to_json(t), cat());
        CHECK(back.sample_id == t.sample_id);
        CHECK(back.pair == t.pair);
        CHECK(back.demo_input == t.demo_input);
        CHECK(back.query_label == t.query_label);
    }
}

TEST_CASE("preprocessing scales the short side and crops the center") {
    std::mt19937_64 rng(1);
    const ImageBuffer img = test::random_image(96, 72, rng);
    const auto demo = preprocess(img, ImageRole::Input);
    CHECK(demo.width() == 448);
    CHECK(demo.height() == 448);
    const auto query = preprocess(img, ImageRole::Query);
    CHECK(query.width() == 224);
    CHECK(query.height() == 224);
    PreprocessOptions random;
    random.random_crop = true;
    random.crop_seed = 3;
    CHECK(preprocess(img, ImageRole::Query, random) == preprocess(img, ImageRole::Query, random));
    CHECK_THROWS(preprocess(ImageBuffer(), ImageRole::Query));
}
