// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/image.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cmath>
#include <cstring>
#include <fstream>

#include "vicl/error.hpp"
#include "vicl/util.hpp"

namespace vicl {

ImageBuffer::ImageBuffer(int width, int height, std::uint8_t fill)
    : m_width(width), m_height(height),
      m_data(static_cast<std::size_t>(width) * height * channels, fill) {
    if (width < 0 || height < 0)
        throw std::invalid_argument("negative image dimension");
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : m_width(width), m_height(height), m_data(std::move(data)) {
    if (width < 0 || height < 0)
        throw std::invalid_argument("negative image dimension");
    if (m_data.size() != static_cast<std::size_t>(width) * height * channels)
        throw std::invalid_argument("image data size does not match width*height*3");
}

std::vector<float> ImageBuffer::to_unit_floats() const {
    std::vector<float> out(m_data.size());
    std::transform(m_data.begin(), m_data.end(), out.begin(),
                   [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
    return out;
}

ImageBuffer ImageBuffer::from_unit_floats(int width, int height, std::span<const float> values) {
    std::vector<std::uint8_t> data(values.size());
    std::transform(values.begin(), values.end(), data.begin(), [](float v) {
        const double scaled = std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0;
        return static_cast<std::uint8_t>(std::floor(scaled + 0.5));
    });
    return ImageBuffer(width, height, std::move(data));
}

ImageBuffer resize_bilinear(const ImageBuffer& image, int width, int height) {
    if (image.empty() || width <= 0 || height <= 0)
        throw std::invalid_argument("resize_bilinear: zero-sized image");
    if (width == image.width() && height == image.height())
        return image;

    const double sx = static_cast<double>(image.width()) / width;
    const double sy = static_cast<double>(image.height()) / height;
    ImageBuffer out(width, height);

    struct Tap {
        int i0, i1;
        double w1;
    };
    auto taps = [](int n_out, int n_in, double scale) {
        std::vector<Tap> t(n_out);
        for (int i = 0; i < n_out; ++i) {
            double src = (i + 0.5) * scale - 0.5;
            src = std::clamp(src, 0.0, static_cast<double>(n_in - 1));
            int i0 = static_cast<int>(std::floor(src));
            int i1 = std::min(i0 + 1, n_in - 1);
            t[i] = {i0, i1, src - i0};
        }
        return t;
    };
    const auto xt = taps(width, image.width(), sx);
    const auto yt = taps(height, image.height(), sy);

    for (int y = 0; y < height; ++y) {
        const Tap& ty = yt[y];
        for (int x = 0; x < width; ++x) {
            const Tap& tx = xt[x];
            for (int c = 0; c < ImageBuffer::channels; ++c) {
                const double top = image.at(tx.i0, ty.i0, c) * (1.0 - tx.w1) + image.at(tx.i1, ty.i0, c) * tx.w1;
                const double bottom = image.at(tx.i0, ty.i1, c) * (1.0 - tx.w1) + image.at(tx.i1, ty.i1, c) * tx.w1;
                const double v = top * (1.0 - ty.w1) + bottom * ty.w1;
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

ImageBuffer crop(const ImageBuffer& image, int x0, int y0, int width, int height) {
    if (x0 < 0 || y0 < 0 || width <= 0 || height <= 0 || x0 + width > image.width() ||
        y0 + height > image.height())
        throw std::invalid_argument("crop window outside image");
    ImageBuffer out(width, height);
    const std::size_t row = static_cast<std::size_t>(width) * ImageBuffer::channels;
    for (int y = 0; y < height; ++y) {
        const std::uint8_t* src = &image.bytes()[(static_cast<std::size_t>(y0 + y) * image.width() + x0) * ImageBuffer::channels];
        std::memcpy(&out.bytes()[static_cast<std::size_t>(y) * row], src, row);
    }
    return out;
}

namespace {

struct PngSink {
    std::vector<std::uint8_t>* out;
};

void png_sink_write(png_structp png, png_bytep data, png_size_t size) {
    auto* sink = static_cast<PngSink*>(png_get_io_ptr(png));
    bool failed = false;
    try {
        sink->out->insert(sink->out->end(), data, data + size);
    } catch (...) {
        failed = true;
    }
    if (failed) png_error(png, "out of memory");
}

void png_sink_flush(png_structp) {}

// libpng reports errors by longjmp, so this frame holds no objects with
// destructors. Returns false on failure.
bool write_png(png_structp png, png_infop info, PngSink* sink, png_uint_32 width, png_uint_32 height,
               png_bytepp rows) {
    if (setjmp(png_jmpbuf(png))) return false;
    png_set_write_fn(png, sink, png_sink_write, png_sink_flush);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    // Fast settings: candidate and prompt images are written often and read
    // once, so size matters less than latency.
    png_set_compression_level(png, 1);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, nullptr);
    return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
    if (image.empty())
        throw std::invalid_argument("encode_png: empty image");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("PNG encode: cannot create writer");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("PNG encode: cannot create info");
    }
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(image.width()) * image.height() * 2);
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    auto* base = const_cast<std::uint8_t*>(image.bytes().data());
    for (int y = 0; y < image.height(); ++y)
        rows[static_cast<std::size_t>(y)] = base + static_cast<std::size_t>(y) * image.width() * ImageBuffer::channels;
    PngSink sink{&out};
    const bool ok = write_png(png, info, &sink, static_cast<png_uint_32>(image.width()),
                              static_cast<png_uint_32>(image.height()), rows.data());
    png_destroy_write_struct(&png, &info);
    if (!ok) throw Error("PNG encode failed");
    return out;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw Error("not a PNG image");
    png_image desc{};
    desc.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size()))
        throw Error(std::string("PNG decode: ") + desc.message);
    desc.format = PNG_FORMAT_RGB;
    ImageBuffer image(static_cast<int>(desc.width), static_cast<int>(desc.height));
    if (!png_image_finish_read(&desc, nullptr, image.bytes().data(), 0, nullptr)) {
        png_image_free(&desc);
        throw Error(std::string("PNG decode: ") + desc.message);
    }
    return image;
}

ImageBuffer load_png(const std::filesystem::path& path) {
    const std::string raw = util::read_file(path);
    try {
        return decode_png(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void save_png(const ImageBuffer& image, const std::filesystem::path& path) {
    const auto bytes = encode_png(image);
    util::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace vicl
