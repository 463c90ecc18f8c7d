// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/reporting.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace vicl {

using nlohmann::json;

json RunReport::to_json() const {
    return {{"pair", pair.key()},
            {"mode", to_string(mode)},
            {"n", n},
            {"mean_psnr", mean_psnr.to_json()},
            {"inf_count", inf_count},
            {"mean_ssim", mean_ssim},
            {"mean_vie_0_10", mean_vie_0_10 ? json(*mean_vie_0_10) : json(nullptr)},
            {"vie_count", vie_count},
            {"failures", failures}};
}

RunReport aggregate_run(const std::vector<SampleOutcome>& outcomes, const TaskPair& pair, RunMode mode) {
    RunReport report;
    report.pair = pair;
    report.mode = mode;
    double psnr_sum = 0.0;
    std::size_t finite = 0;
    double ssim_sum = 0.0;
    double vie_sum = 0.0;
    for (const auto& o : outcomes) {
        if (o.mode != mode || o.pair.key() != pair.key()) continue;
        const CandidateResult* c = o.selected_candidate();
        if (o.status != OutcomeStatus::Succeeded || !c) {
            ++report.failures;
            continue;
        }
        ++report.n;
        if (c->psnr.is_infinite()) {
            ++report.inf_count;
        } else {
            psnr_sum += c->psnr.db();
            ++finite;
        }
        ssim_sum += c->ssim;
        if (c->vie) {
            vie_sum += c->vie->overall_0_10;
            ++report.vie_count;
        }
    }
    if (report.n == 0)
        throw Error(fmt::format("no successful samples for {} in mode {}", pair.key(), to_string(mode)));
    report.mean_psnr = finite ? Psnr::finite(psnr_sum / static_cast<double>(finite)) : Psnr::infinite();
    report.mean_ssim = ssim_sum / static_cast<double>(report.n);
    if (report.vie_count) report.mean_vie_0_10 = vie_sum / static_cast<double>(report.vie_count);
    return report;
}

RunReport aggregate_run(const RunStore& store, const TaskCatalog& catalog, const TaskPair& pair, RunMode mode) {
    return aggregate_run(store.load_outcomes(catalog), pair, mode);
}

namespace {

std::string fmt_psnr(const Psnr& p) { return p.is_infinite() ? "inf" : fmt::format("{:.2f}", p.db()); }

// Printed value back as a number so comparisons happen at display precision.
double printed(const std::string& s) {
    return s == "inf" ? std::numeric_limits<double>::infinity() : std::stod(s);
}

struct Cell {
    std::string fixed;
    std::string ours;
    int better = 0;  ///< -1 fixed, +1 ours, 0 tie or missing
};

Cell make_cell(std::string fixed, std::string ours) {
    Cell c{std::move(fixed), std::move(ours), 0};
    if (!c.fixed.empty() && !c.ours.empty()) {
        const double f = printed(c.fixed);
        const double o = printed(c.ours);
        c.better = o > f ? 1 : (f > o ? -1 : 0);
    }
    return c;
}

std::string_view better_label(int better) { return better > 0 ? "ours" : (better < 0 ? "fixed" : "tie"); }

std::string bold(const std::string& value, bool on) {
    if (value.empty()) return "";
    return on ? "**" + value + "**" : value;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

std::string derive_tier(const MetricTriple& fixed, const MetricTriple& ours) {
    const Cell cells[] = {
        make_cell(fmt::format("{:.2f}", fixed.psnr), fmt::format("{:.2f}", ours.psnr)),
        make_cell(fmt::format("{:.3f}", fixed.ssim), fmt::format("{:.3f}", ours.ssim)),
        make_cell(fmt::format("{:.2f}", fixed.vie), fmt::format("{:.2f}", ours.vie)),
    };
    int wins = 0;
    for (const auto& c : cells) wins += c.better > 0;
    return wins >= 2 ? "top" : "second";
}

Comparison render_comparison(const std::vector<RunReport>& reports, const std::vector<TaskPair>& pairs,
                             const TaskCatalog& catalog, const std::map<std::string, std::string>& tiers) {
    Comparison out;
    out.markdown =
        "| Pair | Fixed PSNR | Fixed SSIM | Fixed VIE | Ours PSNR | Ours SSIM | Ours VIE | n (fixed/ours) | Tier | "
        "Derived tier |\n"
        "|---|---:|---:|---:|---:|---:|---:|---:|---|---|\n";
    out.csv =
        "pair,source,target,fixed_psnr,fixed_ssim,fixed_vie,ours_psnr,ours_ssim,ours_vie,psnr_better,ssim_better,"
        "vie_better,n_fixed,n_ours,inf_fixed,inf_ours,failures_fixed,failures_ours,tier,derived_tier,tier_mismatch\n";

    for (const auto& pair : pairs) {
        const RunReport* fixed = nullptr;
        const RunReport* ours = nullptr;
        for (const auto& r : reports) {
            if (r.pair.key() != pair.key()) continue;
            (r.mode == RunMode::FixedBaseline ? fixed : ours) = &r;
        }
        if (!fixed) out.warnings.push_back(fmt::format("{}: no fixed-prompt results", pair.key()));
        if (!ours) out.warnings.push_back(fmt::format("{}: no student-prompt results", pair.key()));

        auto psnr_of = [](const RunReport* r) { return r ? fmt_psnr(r->mean_psnr) : std::string(); };
        auto ssim_of = [](const RunReport* r) { return r ? fmt::format("{:.3f}", r->mean_ssim) : std::string(); };
        auto vie_of = [](const RunReport* r) {
            return r && r->mean_vie_0_10 ? fmt::format("{:.2f}", *r->mean_vie_0_10) : std::string();
        };
        const Cell cells[] = {make_cell(psnr_of(fixed), psnr_of(ours)), make_cell(ssim_of(fixed), ssim_of(ours)),
                              make_cell(vie_of(fixed), vie_of(ours))};

        std::string derived;
        if (fixed && ours) {
            int wins = 0;
            for (const auto& c : cells) wins += c.better > 0;
            derived = wins >= 2 ? "top" : "second";
        }
        std::string tier;
        if (auto it = tiers.find(pair.key()); it != tiers.end())
            tier = it->second;
        else if (const ReferenceRow* ref = find_reference_row(pair.key()))
            tier = std::string(ref->tier());
        const bool mismatch = !tier.empty() && !derived.empty() && tier != derived;
        if (mismatch)
            out.warnings.push_back(
                fmt::format("{}: configured tier '{}' differs from derived tier '{}'", pair.key(), tier, derived));

        const std::string name = catalog.task(pair.source).display_name + " → " +
                                 catalog.task(pair.target).display_name;
        auto count = [](const RunReport* r) { return r ? std::to_string(r->n) : std::string("-"); };
        out.markdown += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {}/{} | {} | {}{} |\n", name,
                                    bold(cells[0].fixed, cells[0].better < 0), bold(cells[1].fixed, cells[1].better < 0),
                                    bold(cells[2].fixed, cells[2].better < 0), bold(cells[0].ours, cells[0].better > 0),
                                    bold(cells[1].ours, cells[1].better > 0), bold(cells[2].ours, cells[2].better > 0),
                                    count(fixed), count(ours), tier, derived, mismatch ? " (mismatch)" : "");

        auto num = [](const RunReport* r, auto field) { return r ? std::to_string(field(*r)) : std::string(); };
        const bool both = fixed && ours;
        out.csv += fmt::format(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(name), pair.source,
            pair.target, cells[0].fixed, cells[1].fixed, cells[2].fixed, cells[0].ours, cells[1].ours, cells[2].ours,
            both ? better_label(cells[0].better) : "", both ? better_label(cells[1].better) : "",
            both ? better_label(cells[2].better) : "", num(fixed, [](const RunReport& r) { return r.n; }),
            num(ours, [](const RunReport& r) { return r.n; }),
            num(fixed, [](const RunReport& r) { return r.inf_count; }),
            num(ours, [](const RunReport& r) { return r.inf_count; }),
            num(fixed, [](const RunReport& r) { return r.failures; }),
            num(ours, [](const RunReport& r) { return r.failures; }), tier, derived, mismatch ? "true" : "false");
    }
    return out;
}

std::vector<TaskPair> report_pairs(const std::vector<SampleOutcome>& outcomes, const TaskCatalog& catalog) {
    std::set<std::string> keys;
    for (const auto& o : outcomes) keys.insert(o.pair.key());
    std::vector<TaskPair> pairs;
    for (const auto& row : reference_rows())
        if (keys.erase(row.key())) pairs.push_back(catalog.parse_pair(row.key()));
    for (const auto& key : keys) pairs.push_back(catalog.parse_pair(key));
    return pairs;
}

Comparison report_store(const RunStore& store, const TaskCatalog& catalog,
                        const std::map<std::string, std::string>& tiers) {
    const auto outcomes = store.load_outcomes(catalog);
    const auto pairs = report_pairs(outcomes, catalog);
    std::vector<RunReport> reports;
    std::vector<std::string> warnings;
    for (const auto& pair : pairs)
        for (RunMode mode : {RunMode::FixedBaseline, RunMode::Ours}) {
            const bool any = std::any_of(outcomes.begin(), outcomes.end(), [&](const SampleOutcome& o) {
                return o.mode == mode && o.pair.key() == pair.key();
            });
            if (!any) continue;
            try {
                reports.push_back(aggregate_run(outcomes, pair, mode));
            } catch (const Error& e) {
                warnings.push_back(e.what());
            }
        }
    Comparison c = render_comparison(reports, pairs, catalog, tiers);
    warnings.insert(warnings.end(), c.warnings.begin(), c.warnings.end());
    c.warnings = std::move(warnings);
    return c;
}

}  // namespace vicl
