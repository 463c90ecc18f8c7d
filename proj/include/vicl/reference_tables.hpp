// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vicl {

struct MetricTriple {
    double psnr = 0.0;
    double ssim = 0.0;
    double vie = 0.0;
};

/// A published per-pair comparison row (fixed prompt vs student prompt).
struct ReferenceRow {
    int table;  ///< 3 = top tier, 4 = second tier
    std::string source;
    std::string target;
    MetricTriple fixed;
    MetricTriple ours;

    std::string key() const { return source + ":" + target; }
    std::string_view tier() const { return table == 3 ? "top" : "second"; }
};

/// The nineteen published rows, in table order.
const std::vector<ReferenceRow>& reference_rows();
const ReferenceRow* find_reference_row(std::string_view pair_key);

}  // namespace vicl
