// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/reference_tables.hpp"

namespace vicl {

const std::vector<ReferenceRow>& reference_rows() {
    static const std::vector<ReferenceRow> rows = {
        {3, "deblurring", "dehazing", {10.01, 0.436, 6.15}, {10.99, 0.423, 7.55}},
        {3, "deblurring", "deraining", {18.57, 0.466, 6.13}, {18.10, 0.469, 7.75}},
        {3, "deblurring", "demoireing", {15.17, 0.641, 6.86}, {17.86, 0.665, 7.50}},
        {3, "harmonization", "light-enhancement", {14.51, 0.561, 8.53}, {16.47, 0.586, 8.50}},
        {3, "inpainting", "light-enhancement", {13.76, 0.522, 8.31}, {16.58, 0.601, 9.13}},
        {3, "denoising", "light-enhancement", {15.29, 0.560, 7.48}, {15.49, 0.547, 8.25}},
        {3, "light-enhancement", "deraining", {16.74, 0.434, 6.36}, {16.58, 0.447, 7.67}},
        {3, "light-enhancement", "shadow-removal", {15.59, 0.339, 7.17}, {17.43, 0.335, 7.90}},
        {3, "reflection-removal", "dehazing", {10.49, 0.476, 5.76}, {11.05, 0.415, 7.34}},
        {4, "dehazing", "denoising", {15.21, 0.625, 7.62}, {13.42, 0.831, 8.00}},
        {4, "dehazing", "deraining", {18.27, 0.493, 6.78}, {16.39, 0.431, 7.79}},
        {4, "colorization", "style-transfer", {12.47, 0.437, 8.48}, {12.42, 0.418, 8.78}},
        {4, "harmonization", "style-transfer", {12.95, 0.471, 8.13}, {12.51, 0.440, 8.85}},
        {4, "inpainting", "colorization", {20.40, 0.775, 7.22}, {19.04, 0.704, 7.74}},
        {4, "inpainting", "style-transfer", {13.53, 0.475, 7.56}, {12.64, 0.430, 7.86}},
        {4, "light-enhancement", "colorization", {19.20, 0.697, 5.68}, {17.72, 0.646, 7.16}},
        {4, "style-transfer", "light-enhancement", {15.97, 0.563, 8.77}, {15.91, 0.523, 8.89}},
        {4, "deraining", "style-transfer", {13.41, 0.461, 8.32}, {12.50, 0.433, 8.73}},
        {4, "shadow-removal", "deraining", {18.69, 0.484, 5.14}, {17.82, 0.468, 6.57}},
    };
    return rows;
}

const ReferenceRow* find_reference_row(std::string_view pair_key) {
    for (const auto& row : reference_rows())
        if (row.key() == pair_key) return &row;
    return nullptr;
}

}  // namespace vicl
