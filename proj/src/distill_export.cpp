// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/distill_export.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;
namespace fs = std::filesystem;

json TrainingInstance::to_json() const {
    json images_json = json::array(), roles = json::array();
    for (const auto& p : images) images_json.push_back(p.string());
    for (auto r : image_roles) roles.push_back(to_string(r));
    return {{"system", system},
            {"user", {{"text", user_text}, {"images", images_json}, {"image_roles", roles}}},
            {"assistant", assistant},
            {"pair", pair},
            {"sample_id", sample_id},
            {"record_id", record_id}};
}

TrainingInstance make_training_instance(const PromptRecord& record, const SampleTriple& triple,
                                        const PromptEngine& engine) {
    // The student never sees the query label, whatever the triple carries.
    SampleTriple student_view = triple;
    student_view.query_label.reset();
    const PromptBundle bundle = engine.build_student_prompt(student_view);

    TrainingInstance inst;
    for (const auto& m : bundle.messages) {
        if (m.role == MessageRole::System) inst.system = m.text();
        if (m.role != MessageRole::User) continue;
        inst.user_text = m.placeholder_text();
        for (const auto* img : m.images()) {
            inst.images.push_back(img->path);
            inst.image_roles.push_back(img->slot);
        }
    }
    inst.assistant = record.text();
    inst.pair = record.pair().key();
    inst.sample_id = triple.sample_id;
    inst.record_id = record.id();
    return inst;
}

json ExportSummary::to_json() const {
    json per_pair = json::object();
    for (const auto& [key, c] : pairs) per_pair[key] = {{"written", c.written}, {"excluded_leaky", c.excluded_leaky}};
    return {{"format", "conversational-jsonl"},
            {"objective", "causal-LM cross-entropy on assistant tokens"},
            {"data", data_path.filename().string()},
            {"written", written},
            {"excluded_leaky", excluded_leaky},
            {"pairs", per_pair}};
}

fs::path export_manifest_path(const fs::path& out) {
    fs::path m = out;
    m.replace_extension(".manifest.json");
    return m;
}

ExportSummary export_training_set(std::span<const PromptRecord> retained, std::span<const SampleTriple> triples,
                                  const PromptEngine& engine, const fs::path& out, std::size_t cap_per_pair) {
    std::unordered_map<std::string, const SampleTriple*> by_sample;
    for (const auto& t : triples) by_sample[t.sample_id] = &t;

    ExportSummary summary;
    summary.data_path = out;
    summary.manifest_path = export_manifest_path(out);
    std::ostringstream data;
    for (const auto& record : retained) {
        auto it = by_sample.find(record.source_sample());
        if (it == by_sample.end())
            throw Error("record '" + record.id() + "' refers to unknown sample '" + record.source_sample() + "'");
        auto& counts = summary.pairs[record.pair().key()];
        if (!record.lint().clean()) {
            ++counts.excluded_leaky;
            ++summary.excluded_leaky;
            continue;
        }
        if (counts.written >= cap_per_pair)
            throw Error("more than " + std::to_string(cap_per_pair) + " instances for pair " + record.pair().key());
        data << make_training_instance(record, *it->second, engine).to_json().dump() << '\n';
        ++counts.written;
        ++summary.written;
    }
    util::write_file_atomic(out, data.str());
    util::write_file_atomic(summary.manifest_path, summary.to_json().dump(2) + "\n");
    return summary;
}

TrainingSetReport validate_training_set(const fs::path& path, const TaskCatalog& catalog) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open training set " + path.string());

    TrainingSetReport report;
    static const std::vector<std::string> expected_roles = {"demo_input", "demo_label", "query_input"};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        ++report.instances;
        auto violation = [&](std::string msg) { report.violations.push_back({line_no, std::move(msg)}); };

        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            violation(std::string("unparseable instance: ") + e.what());
            continue;
        }
        if (!doc.is_object() || !doc.contains("user") || !doc["user"].is_object() ||
            !doc["user"].contains("images") || !doc["user"]["images"].is_array()) {
            violation("instance lacks user.images");
            continue;
        }
        const auto& user = doc["user"];
        const auto& images = user["images"];
        std::vector<std::string> roles;
        if (user.contains("image_roles") && user["image_roles"].is_array())
            for (const auto& r : user["image_roles"]) roles.push_back(r.is_string() ? r.get<std::string>() : "?");

        const bool label_role = std::find(roles.begin(), roles.end(), "query_label") != roles.end();
        if (images.size() > 3 || label_role)
            violation("query label leaked into student input");
        else if (images.size() != 3)
            violation("expected 3 images, found " + std::to_string(images.size()));
        else if (roles != expected_roles)
            violation("image roles out of order; expected demo_input, demo_label, query_input");

        const std::string text = user.value("text", std::string{});
        std::size_t placeholders = 0;
        for (std::size_t pos = text.find("<image_"); pos != std::string::npos; pos = text.find("<image_", pos + 1))
            ++placeholders;
        if (placeholders != images.size())
            violation("user text has " + std::to_string(placeholders) + " image placeholders for " +
                      std::to_string(images.size()) + " images");

        const std::string completion = doc.value("assistant", std::string{});
        if (util::trim(completion).empty()) {
            violation("empty completion");
            continue;
        }
        try {
            const TaskPair pair = catalog.parse_pair(doc.value("pair", std::string{}));
            const LintResult lint = lint_implicitness(completion, pair, catalog);
            if (!lint.clean()) {
                std::string lex;
                for (const auto& l : lint.lexemes()) lex += (lex.empty() ? "" : ", ") + l;
                violation("completion names a task: " + lex);
            }
        } catch (const std::exception& e) {
            violation(std::string("bad pair: ") + e.what());
        }
    }
    return report;
}

}  // namespace vicl
