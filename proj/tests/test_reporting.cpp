// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "report_fixture.hpp"
#include "support.hpp"
#include "vicl/reporting.hpp"

using namespace vicl;

namespace {

const TaskCatalog& cat() { return TaskCatalog::builtin(); }

std::vector<test::PublishedRow> published() {
    return test::load_published_rows(std::string(VICL_FIXTURE_DIR) + "/published_rows.tex");
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream in(line);
    for (std::string part; std::getline(in, part, sep);) out.push_back(util::trim(part));
    return out;
}

/// Cells of the markdown row that starts with `name`, without the leading
/// empty field.
std::vector<std::string> markdown_row(const std::string& markdown, const std::string& name) {
    std::stringstream in(markdown);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("| " + name + " |", 0) == 0) {
            auto cells = split(line, '|');
            cells.erase(cells.begin());
            return cells;
        }
    return {};
}

std::string name_of(const std::string& source, const std::string& target) {
    return cat().task(source).display_name + " → " + cat().task(target).display_name;
}

}  // namespace

TEST_CASE("published rows agree with the built-in reference table") {
    const auto rows = published();
    REQUIRE(rows.size() == 19);
    const auto& ref = reference_rows();
    REQUIRE(ref.size() == 19);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CAPTURE(i);
        CHECK(ref[i].source == rows[i].source);
        CHECK(ref[i].target == rows[i].target);
        CHECK(std::string(ref[i].tier()) == rows[i].tier);
        CHECK(ref[i].fixed.psnr == rows[i].fixed[0]);
        CHECK(ref[i].fixed.ssim == rows[i].fixed[1]);
        CHECK(ref[i].fixed.vie == rows[i].fixed[2]);
        CHECK(ref[i].ours.psnr == rows[i].ours[0]);
        CHECK(ref[i].ours.ssim == rows[i].ours[1]);
        CHECK(ref[i].ours.vie == rows[i].ours[2]);
        CHECK(find_reference_row(ref[i].key()) == &ref[i]);
    }
    CHECK(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.tier == "top"; }) == 9);
    CHECK(find_reference_row("denoising:deblurring") == nullptr);
}

TEST_CASE("aggregate means") {
    const auto pair = cat().parse_pair("deblurring:dehazing");
    std::vector<SampleOutcome> outcomes = {
        test::scored_outcome(pair, RunMode::Ours, "a", 10, 0.2, 5),
        test::scored_outcome(pair, RunMode::Ours, "b", 12, 0.4, 6),
        test::scored_outcome(pair, RunMode::Ours, "c", 14, 0.6, 7),
        test::scored_outcome(pair, RunMode::FixedBaseline, "a", 99, 0.9, 9),
    };
    const auto r = aggregate_run(outcomes, pair, RunMode::Ours);
    CHECK(r.n == 3);
    CHECK(r.mean_psnr.db() == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(r.mean_ssim == doctest::Approx(0.4));
    CHECK(*r.mean_vie_0_10 == doctest::Approx(6.0));
    CHECK(r.vie_count == 3);

    // Infinite PSNR is counted, not averaged.
    outcomes[1].candidates[0].psnr = Psnr::infinite();
    const auto with_inf = aggregate_run(outcomes, pair, RunMode::Ours);
    CHECK(with_inf.inf_count == 1);
    CHECK(with_inf.mean_psnr.db() == doctest::Approx(12.0));
    CHECK(with_inf.n == 3);

    // Failures are counted and skipped.
    outcomes[2].status = OutcomeStatus::Failed;
    outcomes[2].selected.reset();
    const auto with_failure = aggregate_run(outcomes, pair, RunMode::Ours);
    CHECK(with_failure.failures == 1);
    CHECK(with_failure.n == 2);
    CHECK(with_failure.mean_psnr.db() == doctest::Approx(10.0));

    CHECK_THROWS_AS(aggregate_run(outcomes, cat().parse_pair("dehazing:denoising"), RunMode::Ours), Error);
}

TEST_CASE("aggregation against a brute-force oracle") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> psnr(5, 40), unit(0, 1);
    const auto pair = cat().parse_pair("inpainting:colorization");
    for (int round = 0; round < 50; ++round) {
        std::vector<SampleOutcome> outcomes;
        for (int i = 0; i < 30; ++i) {
            auto o = test::scored_outcome(pair, i % 3 ? RunMode::Ours : RunMode::FixedBaseline, fmt::format("s{}", i),
                                          psnr(rng), unit(rng), 10 * unit(rng));
            const double roll = unit(rng);
            if (roll < 0.1) o.candidates[0].psnr = Psnr::infinite();
            else if (roll < 0.2) {
                o.status = OutcomeStatus::Failed;
                o.selected.reset();
            } else if (roll < 0.3) {
                o.candidates[0].vie.reset();
            }
            outcomes.push_back(o);
        }
        std::size_t n = 0, inf = 0, failures = 0, vies = 0;
        long double psnr_sum = 0, ssim_sum = 0, vie_sum = 0;
        std::size_t finite = 0;
        for (const auto& o : outcomes) {
            if (o.mode != RunMode::Ours) continue;
            if (o.status == OutcomeStatus::Failed) {
                ++failures;
                continue;
            }
            ++n;
            const auto& c = o.candidates[0];
            if (c.psnr.is_infinite()) ++inf;
            else {
                psnr_sum += c.psnr.db();
                ++finite;
            }
            ssim_sum += c.ssim;
            if (c.vie) {
                vie_sum += c.vie->overall_0_10;
                ++vies;
            }
        }
        if (n == 0) continue;
        const auto r = aggregate_run(outcomes, pair, RunMode::Ours);
        CHECK(r.n == n);
        CHECK(r.inf_count == inf);
        CHECK(r.failures == failures);
        CHECK(r.vie_count == vies);
        if (finite) CHECK(std::abs(r.mean_psnr.db() - static_cast<double>(psnr_sum / finite)) < 1e-9);
        CHECK(std::abs(r.mean_ssim - static_cast<double>(ssim_sum / n)) < 1e-12);
        if (vies) CHECK(std::abs(*r.mean_vie_0_10 - static_cast<double>(vie_sum / vies)) < 1e-9);
    }
}

TEST_CASE("all-infinite PSNR aggregates to infinity") {
    const auto pair = cat().parse_pair("deblurring:dehazing");
    auto o = test::scored_outcome(pair, RunMode::Ours, "a", 1, 1, 10);
    o.candidates[0].psnr = Psnr::infinite();
    const auto r = aggregate_run({o}, pair, RunMode::Ours);
    CHECK(r.mean_psnr.is_infinite());
    CHECK(r.inf_count == 1);
}

TEST_CASE("comparison of a store built from the published rows") {
    test::TempDir dir("report");
    RunStore store(dir.path());
    const auto rows = published();
    for (const auto& row : rows) {
        const auto pair = cat().make_pair(row.source, row.target);
        test::append_row_outcomes(store, pair, RunMode::FixedBaseline, {row.fixed[0], row.fixed[1], row.fixed[2]});
        test::append_row_outcomes(store, pair, RunMode::Ours, {row.ours[0], row.ours[1], row.ours[2]});
    }
    const auto cmp = report_store(store, cat());

    // Table order, one line per pair.
    const auto md_lines = split(cmp.markdown, '\n');
    REQUIRE(md_lines.size() == 2 + rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(md_lines[2 + i].rfind("| " + name_of(rows[i].source, rows[i].target) + " |", 0) == 0);

    const auto csv_lines = split(cmp.csv, '\n');
    REQUIRE(csv_lines.size() == 1 + rows.size());
    std::set<std::string> expected_mismatch;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        CAPTURE(row.source);
        CAPTURE(row.target);
        const auto cells = markdown_row(cmp.markdown, name_of(row.source, row.target));
        REQUIRE(cells.size() == 10);
        const int precision[] = {2, 3, 2};
        int ours_marks = 0;
        for (int m = 0; m < 3; ++m) {
            const std::string f = fmt::format("{:.{}f}", row.fixed[m], precision[m]);
            const std::string o = fmt::format("{:.{}f}", row.ours[m], precision[m]);
            // The highlighted side in the source is the bolded side here.
            CHECK(cells[static_cast<std::size_t>(1 + m)] == (row.fixed_marked[m] ? "**" + f + "**" : f));
            CHECK(cells[static_cast<std::size_t>(4 + m)] == (row.ours_marked[m] ? "**" + o + "**" : o));
            ours_marks += row.ours_marked[m];
        }
        CHECK(cells[7] == "4/4");
        const std::string derived = ours_marks >= 2 ? "top" : "second";
        CHECK(derive_tier({row.fixed[0], row.fixed[1], row.fixed[2]}, {row.ours[0], row.ours[1], row.ours[2]}) ==
              derived);
        CHECK(cells[8] == row.tier);
        if (derived != row.tier) {
            expected_mismatch.insert(row.source + ":" + row.target);
            CHECK(cells[9] == derived + " (mismatch)");
        } else {
            CHECK(cells[9] == derived);
        }

        // CSV carries the same printed values.
        const auto fields = split(csv_lines[1 + i], ',');
        REQUIRE(fields.size() == 21);
        for (int m = 0; m < 3; ++m) {
            CHECK(fields[static_cast<std::size_t>(3 + m)] == fmt::format("{:.{}f}", row.fixed[m], precision[m]));
            CHECK(fields[static_cast<std::size_t>(6 + m)] == fmt::format("{:.{}f}", row.ours[m], precision[m]));
            CHECK(fields[static_cast<std::size_t>(9 + m)] == (row.ours_marked[m] ? "ours" : "fixed"));
        }
        CHECK(fields[20] == (derived != row.tier ? "true" : "false"));
    }
    // Every warning is a tier mismatch, one per expected pair.
    CHECK(cmp.warnings.size() == expected_mismatch.size());
    for (const auto& w : cmp.warnings) CHECK(expected_mismatch.count(w.substr(0, w.find(':', w.find(':') + 1))) == 1);
    CHECK(expected_mismatch.count("dehazing:denoising") == 1);

    const auto headline = markdown_row(cmp.markdown, "Deblurring → Dehazing");
    CHECK(headline[1] == "10.01");
    CHECK(headline[4] == "**10.99**");
    CHECK(headline[2] == "**0.436**");
    CHECK(headline[5] == "0.423");
    CHECK(headline[3] == "6.15");
    CHECK(headline[6] == "**7.55**");
}

TEST_CASE("ties are not bolded and missing modes warn") {
    const auto pair = cat().parse_pair("deblurring:dehazing");
    const auto other = cat().parse_pair("denoising:deblurring");
    std::vector<SampleOutcome> outcomes = {
        test::scored_outcome(pair, RunMode::FixedBaseline, "a", 12.004, 0.5, 7),
        test::scored_outcome(pair, RunMode::Ours, "a", 12.001, 0.6, 7),
        test::scored_outcome(other, RunMode::Ours, "a", 20, 0.7, 8),
    };
    std::vector<RunReport> reports = {aggregate_run(outcomes, pair, RunMode::FixedBaseline),
                                      aggregate_run(outcomes, pair, RunMode::Ours),
                                      aggregate_run(outcomes, other, RunMode::Ours)};
    const auto pairs = report_pairs(outcomes, cat());
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == pair);  // reference pairs lead
    const auto cmp = render_comparison(reports, pairs, cat(), {{"denoising:deblurring", "top"}});
    const auto cells = markdown_row(cmp.markdown, "Deblurring → Dehazing");
    REQUIRE(cells.size() == 10);
    CHECK(cells[1] == "12.00");
    CHECK(cells[4] == "12.00");
    CHECK(cells[5] == "**0.600**");
    CHECK(cells[3] == "7.00");
    CHECK(cells[6] == "7.00");
    CHECK(cells[8] == "top");
    CHECK(cells[9] == "second (mismatch)");  // one win out of three

    const auto lonely = markdown_row(cmp.markdown, "Denoising → Deblurring");
    REQUIRE(lonely.size() == 10);
    CHECK(lonely[1].empty());
    CHECK(lonely[4] == "20.00");
    CHECK(lonely[7] == "-/1");
    CHECK(lonely[8] == "top");
    REQUIRE(cmp.warnings.size() == 2);
    CHECK(cmp.warnings[0].find("differs from derived tier") != std::string::npos);
    CHECK(cmp.warnings[1].find("no fixed-prompt results") != std::string::npos);
}
