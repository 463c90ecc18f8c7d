// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations shared by the unit tests and the
// acceptance suite. Nothing here calls into the library's metric code.

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "vicl/image.hpp"

namespace vicl::test {

// Category membership as published, independent of the shipped catalog file.
inline const std::map<std::string, std::string> kPublishedCategory = {
    {"deblurring", "restoration"},       {"dehazing", "restoration"},     {"demoireing", "restoration"},
    {"denoising", "restoration"},        {"deraining", "restoration"},    {"reflection-removal", "removal"},
    {"shadow-removal", "removal"},       {"colorization", "generation"},  {"harmonization", "generation"},
    {"inpainting", "generation"},        {"light-enhancement", "generation"}, {"style-transfer", "generation"},
};

inline double oracle_psnr(const ImageBuffer& a, const ImageBuffer& b) {
    double sum = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                const double d = double(a.at(x, y, c)) - double(b.at(x, y, c));
                sum += d * d;
            }
    const double mse = sum / (a.width() * a.height() * 3.0);
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Direct 2D-window SSIM: every valid 11x11 window, weighted moments computed
// about the window mean.
inline double oracle_ssim_plane(const std::vector<double>& a, const std::vector<double>& b, int w, int h) {
    double weights[11][11];
    double total = 0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            weights[i][j] = std::exp(-((i - 5.0) * (i - 5.0) + (j - 5.0) * (j - 5.0)) / (2 * 1.5 * 1.5));
            total += weights[i][j];
        }
    const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
    double sum = 0;
    int windows = 0;
    for (int y = 0; y + 11 <= h; ++y)
        for (int x = 0; x + 11 <= w; ++x) {
            double ma = 0, mb = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double wt = weights[i][j] / total;
                    ma += wt * a[(y + i) * w + x + j];
                    mb += wt * b[(y + i) * w + x + j];
                }
            double va = 0, vb = 0, cov = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double wt = weights[i][j] / total;
                    const double da = a[(y + i) * w + x + j] - ma, db = b[(y + i) * w + x + j] - mb;
                    va += wt * da * da;
                    vb += wt * db * db;
                    cov += wt * da * db;
                }
            sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++windows;
        }
    return sum / windows;
}

inline std::vector<double> plane(const ImageBuffer& img, int c) {
    std::vector<double> out;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out.push_back(c < 0 ? 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2)
                                : double(img.at(x, y, c)));
    return out;
}

}  // namespace vicl::test
