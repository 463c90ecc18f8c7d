// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vicl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A task slug that is not in the catalog.
class CatalogMiss : public Error {
public:
    explicit CatalogMiss(const std::string& slug)
        : Error("unknown task '" + slug + "'"), m_slug(slug) {}
    const std::string& slug() const { return m_slug; }

private:
    std::string m_slug;
};

/// A malformed line in a line-oriented input file. line() is 1-based; 0 when
/// the problem is not tied to a single line.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          m_line(line) {}
    std::size_t line() const { return m_line; }

private:
    std::size_t m_line;
};

}  // namespace vicl
