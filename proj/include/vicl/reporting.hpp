// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vicl/iqa_metrics.hpp"
#include "vicl/reference_tables.hpp"
#include "vicl/vicl_runner.hpp"

namespace vicl {

/// Means over the selected candidates of the successful samples of one
/// (pair, mode). Infinite PSNR is left out of mean_psnr and counted in
/// inf_count; mean_psnr is infinite only when every sample is.
struct RunReport {
    TaskPair pair;
    RunMode mode = RunMode::Ours;
    std::size_t n = 0;
    Psnr mean_psnr;
    std::size_t inf_count = 0;
    double mean_ssim = 0.0;
    std::optional<double> mean_vie_0_10;  ///< over samples that carry a VIE score
    std::size_t vie_count = 0;
    std::size_t failures = 0;

    nlohmann::json to_json() const;
};

RunReport aggregate_run(const std::vector<SampleOutcome>& outcomes, const TaskPair& pair, RunMode mode);
RunReport aggregate_run(const RunStore& store, const TaskCatalog& catalog, const TaskPair& pair, RunMode mode);

/// "top" when the student prompt beats the fixed prompt on at least two of
/// PSNR, SSIM and VIE, compared at display precision; "second" otherwise.
std::string derive_tier(const MetricTriple& fixed, const MetricTriple& ours);

struct Comparison {
    std::string markdown;
    std::string csv;
    std::vector<std::string> warnings;
};

/// One row per pair. Cells are printed with PSNR and VIE at 2 decimals and
/// SSIM at 3; the larger printed value of each cell pair is bolded, ties are
/// not. `tiers` maps pair keys to a configured tier label; pairs missing from
/// it fall back to the reference tables.
Comparison render_comparison(const std::vector<RunReport>& reports, const std::vector<TaskPair>& pairs,
                             const TaskCatalog& catalog, const std::map<std::string, std::string>& tiers = {});

/// Pairs present in an outcome list: reference-table pairs first in table
/// order, the rest by key.
std::vector<TaskPair> report_pairs(const std::vector<SampleOutcome>& outcomes, const TaskCatalog& catalog);

/// Aggregates every (pair, mode) in the store. Pairs with no successful
/// sample in a mode are skipped with a warning.
Comparison report_store(const RunStore& store, const TaskCatalog& catalog,
                        const std::map<std::string, std::string>& tiers = {});

}  // namespace vicl
