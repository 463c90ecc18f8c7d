// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <limits>
#include <string>

#include <json.hpp>

#include "vicl/image.hpp"

namespace vicl {

/// PSNR in decibels. Identical images give an infinite value, which orders
/// above every finite one and serializes as "inf".
class Psnr {
public:
    constexpr Psnr() = default;
    static constexpr Psnr finite(double db) { return Psnr(db); }
    static constexpr Psnr infinite() { return Psnr(std::numeric_limits<double>::infinity()); }

    constexpr bool is_infinite() const { return m_db == std::numeric_limits<double>::infinity(); }
    constexpr double db() const { return m_db; }

    constexpr std::partial_ordering operator<=>(const Psnr&) const = default;
    constexpr bool operator==(const Psnr&) const = default;

    nlohmann::json to_json() const;
    static Psnr from_json(const nlohmann::json& j);

private:
    constexpr explicit Psnr(double db) : m_db(db) {}
    double m_db = 0.0;
};

enum class ChannelPolicy { LuminanceOnly, MeanOverRGB };
std::string_view to_string(ChannelPolicy policy);

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
    ChannelPolicy channels = ChannelPolicy::LuminanceOnly;
};

/// 10 log10(255^2 / MSE) over all pixels and channels of the u8 view.
Psnr psnr(const ImageBuffer& reference, const ImageBuffer& candidate);

/// Mean local SSIM: Gaussian window (11x11, sigma 1.5) applied as a valid
/// convolution, C1 = (0.01 * 255)^2, C2 = (0.03 * 255)^2. LuminanceOnly uses
/// BT.601 luma; MeanOverRGB averages the per-channel SSIM.
double ssim(const ImageBuffer& reference, const ImageBuffer& candidate, const SsimParams& params = {});

struct MetricResult {
    Psnr psnr;
    double ssim = 0.0;
    int width = 0;
    int height = 0;
    ChannelPolicy channel_policy = ChannelPolicy::LuminanceOnly;

    nlohmann::json to_json() const;
};

MetricResult score_candidate(const ImageBuffer& reference, const ImageBuffer& candidate,
                             ChannelPolicy policy = ChannelPolicy::LuminanceOnly);

}  // namespace vicl
