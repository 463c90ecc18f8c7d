// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vicl {

/// Interleaved 8-bit RGB image. The unit-interval view of a sample is
/// exactly value / 255.
class ImageBuffer {
public:
    static constexpr int channels = 3;

    ImageBuffer() = default;
    ImageBuffer(int width, int height, std::uint8_t fill = 0);
    ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return m_width; }
    int height() const { return m_height; }
    bool empty() const { return m_width == 0 || m_height == 0; }

    std::uint8_t& at(int x, int y, int c) { return m_data[index(x, y, c)]; }
    std::uint8_t at(int x, int y, int c) const { return m_data[index(x, y, c)]; }
    float unit_at(int x, int y, int c) const { return static_cast<float>(at(x, y, c)) / 255.0f; }

    std::span<const std::uint8_t> bytes() const { return m_data; }
    std::span<std::uint8_t> bytes() { return m_data; }

    /// Unit-interval float view, same layout as bytes().
    std::vector<float> to_unit_floats() const;
    /// Inverse of to_unit_floats(): clamps to [0,1] and rounds half up.
    static ImageBuffer from_unit_floats(int width, int height, std::span<const float> values);

    bool operator==(const ImageBuffer&) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * m_width + x) * channels + c;
    }

    int m_width = 0;
    int m_height = 0;
    std::vector<std::uint8_t> m_data;
};

/// Bilinear resampling with half-pixel centers; the identity when the size is
/// unchanged.
ImageBuffer resize_bilinear(const ImageBuffer& image, int width, int height);
ImageBuffer crop(const ImageBuffer& image, int x0, int y0, int width, int height);

std::vector<std::uint8_t> encode_png(const ImageBuffer& image);
ImageBuffer decode_png(std::span<const std::uint8_t> png);
ImageBuffer load_png(const std::filesystem::path& path);
void save_png(const ImageBuffer& image, const std::filesystem::path& path);

}  // namespace vicl
