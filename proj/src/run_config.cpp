// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/run_config.hpp"

#include <set>

#include "vicl/error.hpp"
#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;
namespace fs = std::filesystem;

RunConfig RunConfig::from_json(const json& doc, const fs::path& base_dir) {
    static const std::set<std::string> known = {"backends", "manifest", "run_root", "templates",
                                                "catalog",  "workers",  "seed",     "tiers"};
    if (!doc.is_object()) throw Error("run config must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) throw Error("unknown run config field '" + key + "'");

    auto resolve = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    RunConfig cfg;
    cfg.backends = doc.contains("backends") ? BackendSet::from_json(doc["backends"]) : BackendSet::all_mock();
    if (doc.contains("manifest")) cfg.manifest = resolve(doc["manifest"].get<std::string>());
    if (doc.contains("run_root")) cfg.run_root = resolve(doc["run_root"].get<std::string>());
    else if (!base_dir.empty()) cfg.run_root = base_dir / "runs";
    if (doc.contains("templates")) cfg.templates = resolve(doc["templates"].get<std::string>());
    if (doc.contains("catalog")) cfg.catalog = resolve(doc["catalog"].get<std::string>());
    cfg.workers = doc.value("workers", std::size_t{1});
    if (cfg.workers == 0) throw Error("workers must be >= 1");
    cfg.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("tiers")) cfg.tiers = doc["tiers"].get<std::map<std::string, std::string>>();
    return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(util::read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return from_json(doc, path.parent_path());
}

RunConfig RunConfig::mock() {
    RunConfig cfg;
    cfg.backends = BackendSet::all_mock();
    return cfg;
}

}  // namespace vicl
