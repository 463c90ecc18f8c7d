// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "support.hpp"
#include "vicl/util.hpp"

using vicl::test::quoted;
using vicl::test::run_command;
namespace fs = std::filesystem;

namespace {

std::string cli() { return quoted(VICL_CLI_PATH); }

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char ch : text) n += ch == '\n';
    return n;
}

}  // namespace

TEST_CASE("catalog listing") {
    const auto pairs = run_command(cli() + " catalog pairs");
    CHECK(pairs.exit_code == 0);
    CHECK(count_lines(pairs.output) == 132);
    const auto intra = run_command(cli() + " catalog pairs --relation intra");
    CHECK(count_lines(intra.output) == 42);
    const auto tasks = run_command(cli() + " catalog list");
    CHECK(tasks.exit_code == 0);
    CHECK(count_lines(tasks.output) == 12);
}

TEST_CASE("lint exit codes") {
    const auto clean = run_command(cli() + " prompt lint --pair deblurring:dehazing --text 'lift the grey veil'");
    CHECK(clean.exit_code == 0);
    const auto leaky = run_command(cli() + " prompt lint --pair deblurring:dehazing --text 'apply dehazing'");
    CHECK(leaky.exit_code == 2);
    CHECK(leaky.output.find("dehaz") != std::string::npos);
    const auto all = run_command(cli() + " prompt lint --text 'then inpaint the hole'");
    CHECK(all.exit_code == 2);
}

TEST_CASE("usage errors") {
    CHECK(run_command(cli()).exit_code != 0);
    CHECK(run_command(cli() + " run pair --n 1").exit_code != 0);  // --pair is required
    const auto bad_pair = run_command(cli() + " catalog pairs --relation sideways");
    CHECK(bad_pair.exit_code == 1);
    CHECK(bad_pair.output.find("error:") != std::string::npos);
}

TEST_CASE("config rejects inline keys") {
    vicl::test::TempDir dir("cli");
    std::ofstream(dir / "config.json") << R"({"backends": {"teacher": {"endpoint": "mock://", "api_key": "sk-1"}}})";
    const auto r = run_command(cli() + " --config " + quoted(dir / "config.json") + " catalog list");
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("api_key") != std::string::npos);
}

TEST_CASE("synthesize, run, resume and report") {
    vicl::test::TempDir dir("cli");
    const auto synth = run_command(cli() + " corpus synth --out " + quoted(dir / "corpus") + " --pairs-per-task 4");
    REQUIRE(synth.exit_code == 0);
    REQUIRE(fs::exists(dir / "corpus" / "manifest.jsonl"));
    std::ofstream(dir / "config.json") << R"({"manifest": "corpus/manifest.jsonl", "run_root": "runs"})";
    const std::string base = cli() + " --config " + quoted(dir / "config.json");

    const auto validate = run_command(base + " corpus validate");
    CHECK(validate.exit_code == 0);

    const auto run = run_command(base + " run pair --pair deblurring:dehazing --n 2 --k 2 --run-id smoke");
    REQUIRE(run.exit_code == 0);
    CHECK(run.output.find("outcomes=2 executed=2 resumed=0 failed=0 lint_leaks=0") != std::string::npos);
    const auto again = run_command(base + " run pair --pair deblurring:dehazing --n 2 --k 2 --run-id smoke");
    CHECK(again.output.find("executed=0 resumed=2") != std::string::npos);
    const auto fixed =
        run_command(base + " run pair --pair deblurring:dehazing --n 2 --k 2 --run-id smoke --fixed-prompt");
    CHECK(fixed.exit_code == 0);

    const auto md = run_command(base + " report --run-id smoke");
    CHECK(md.exit_code == 0);
    CHECK(md.output.find("| Deblurring → Dehazing |") != std::string::npos);
    CHECK(fs::exists(dir / "runs" / "smoke" / "report.md"));
    const auto csv = run_command(base + " report --run-id smoke --format csv");
    CHECK(csv.exit_code == 0);
    CHECK(vicl::util::read_file(dir / "runs" / "smoke" / "report.csv").rfind("pair,source,target", 0) == 0);

    CHECK(run_command(base + " report --run-id nothing").exit_code == 1);
    CHECK(run_command(base + " report --run-id ../escape").exit_code == 1);
}

TEST_CASE("review through the command line") {
    vicl::test::TempDir dir("cli");
    REQUIRE(run_command(cli() + " corpus synth --out " + quoted(dir / "corpus") + " --pairs-per-task 4").exit_code ==
            0);
    std::ofstream(dir / "config.json") << R"({"manifest": "corpus/manifest.jsonl"})";
    const std::string base = cli() + " --config " + quoted(dir / "config.json");
    const auto parked = run_command(base + " run pair --pair deblurring:dehazing --n 1 --k 1 --review");
    REQUIRE(parked.exit_code == 0);
    const auto pos = parked.output.find("pending review: ");
    REQUIRE(pos != std::string::npos);
    const std::string sample = parked.output.substr(pos + 16, parked.output.find('\n', pos) - pos - 16);

    const auto leaky = run_command(base + " run review --sample " + sample + " --edit 'apply dehazing'");
    CHECK(leaky.exit_code == 2);
    CHECK(leaky.output.find("rejected") != std::string::npos);
    const auto ok = run_command(base + " run review --sample " + sample + " --edit 'lift the grey veil'");
    CHECK(ok.exit_code == 0);
    const auto done = run_command(base + " run pair --pair deblurring:dehazing --n 1 --k 1 --review");
    CHECK(done.output.find("outcomes=1") != std::string::npos);
    CHECK(fs::exists(dir / "runs" / "default" / "reviews" / "audit.jsonl"));
}
