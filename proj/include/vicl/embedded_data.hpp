// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>

namespace vicl::embedded {

/// Data files shipped with the library, keyed by path relative to data/
/// (e.g. "catalog.txt", "templates/fixed.txt").
const std::map<std::string, std::string_view>& files();

}  // namespace vicl::embedded
