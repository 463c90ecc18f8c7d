// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/iqa_metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace vicl {

using nlohmann::json;

json Psnr::to_json() const { return is_infinite() ? json("inf") : json(m_db); }

Psnr Psnr::from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return infinite();
        throw std::invalid_argument("bad PSNR value '" + j.get<std::string>() + "'");
    }
    return finite(j.get<double>());
}

std::string_view to_string(ChannelPolicy policy) {
    return policy == ChannelPolicy::LuminanceOnly ? "luminance" : "mean_rgb";
}

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("image dimensions differ: " + std::to_string(a.width()) + "x" +
                                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()));
    if (a.empty()) throw std::invalid_argument("empty image");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double center = (size - 1) / 2.0;
    double sum = 0;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-((i - center) * (i - center)) / (2 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Valid-mode separable filtering of a w x h plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    const int ow = w - n + 1, oh = h - n + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[i] * plane[static_cast<std::size_t>(y) * w + x + i];
            rows[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

double ssim_plane(const std::vector<double>& a, const std::vector<double>& b, int w, int h, const SsimParams& p) {
    const auto k = gaussian_kernel(p.window, p.sigma);
    const std::size_t n = a.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, w, h, k), mu_b = filter_valid(b, w, h, k);
    const auto e_aa = filter_valid(aa, w, h, k), e_bb = filter_valid(bb, w, h, k), e_ab = filter_valid(ab, w, h, k);
    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
    double total = 0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

std::vector<double> luma(const ImageBuffer& img) {
    std::vector<double> out(static_cast<std::size_t>(img.width()) * img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out[static_cast<std::size_t>(y) * img.width() + x] =
                0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
    return out;
}

std::vector<double> channel(const ImageBuffer& img, int c) {
    std::vector<double> out(static_cast<std::size_t>(img.width()) * img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out[static_cast<std::size_t>(y) * img.width() + x] = img.at(x, y, c);
    return out;
}

}  // namespace

Psnr psnr(const ImageBuffer& reference, const ImageBuffer& candidate) {
    require_same_shape(reference, candidate);
    const auto a = reference.bytes(), b = candidate.bytes();
    // Integer accumulation keeps the MSE exact.
    std::uint64_t sse = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
        sse += static_cast<std::uint64_t>(d * d);
    }
    if (sse == 0) return Psnr::infinite();
    const double mse = static_cast<double>(sse) / static_cast<double>(a.size());
    return Psnr::finite(10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const ImageBuffer& reference, const ImageBuffer& candidate, const SsimParams& params) {
    require_same_shape(reference, candidate);
    if (params.window < 1 || params.window % 2 == 0) throw std::invalid_argument("SSIM window must be odd");
    if (reference.width() < params.window || reference.height() < params.window)
        throw std::invalid_argument("image smaller than the " + std::to_string(params.window) + "x" +
                                    std::to_string(params.window) + " SSIM window");
    const int w = reference.width(), h = reference.height();
    if (params.channels == ChannelPolicy::LuminanceOnly) return ssim_plane(luma(reference), luma(candidate), w, h, params);
    double sum = 0;
    for (int c = 0; c < ImageBuffer::channels; ++c) sum += ssim_plane(channel(reference, c), channel(candidate, c), w, h, params);
    return sum / ImageBuffer::channels;
}

json MetricResult::to_json() const {
    return {{"psnr", psnr.to_json()},
            {"ssim", ssim},
            {"width", width},
            {"height", height},
            {"channel_policy", to_string(channel_policy)},
            {"ssim_window", "gaussian 11x11 sigma=1.5"},
            {"psnr_peak", 255}};
}

MetricResult score_candidate(const ImageBuffer& reference, const ImageBuffer& candidate, ChannelPolicy policy) {
    SsimParams params;
    params.channels = policy;
    return MetricResult{psnr(reference, candidate), ssim(reference, candidate, params), reference.width(),
                        reference.height(), policy};
}

}  // namespace vicl
