// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "vicl/error.hpp"
#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ImageRole role) {
    switch (role) {
        case ImageRole::Input: return "input";
        case ImageRole::Label: return "label";
        case ImageRole::Query: return "query";
    }
    return "?";
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::Unsplit: return "";
        case Split::Train: return "train";
        case Split::Test: return "test";
    }
    return "?";
}

Split parse_split(std::string_view text) {
    if (text.empty() || text == "unsplit") return Split::Unsplit;
    if (text == "train") return Split::Train;
    if (text == "test") return Split::Test;
    throw std::invalid_argument("unknown split '" + std::string(text) + "'");
}

namespace {

ImageRole parse_role(std::string_view text) {
    if (text == "input") return ImageRole::Input;
    if (text == "label") return ImageRole::Label;
    if (text == "query") return ImageRole::Query;
    throw std::invalid_argument("unknown role '" + std::string(text) + "'");
}

}  // namespace

std::size_t DatasetDescriptor::pair_count() const {
    std::size_t n = 0;
    for (const auto& [_, pairs] : tasks) n += pairs.size();
    return n;
}

std::size_t DatasetDescriptor::count(Split split) const {
    std::size_t n = 0;
    for (const auto& [task, _] : tasks) n += count(task, split);
    return n;
}

std::size_t DatasetDescriptor::count(const std::string& task, Split split) const {
    auto it = tasks.find(task);
    if (it == tasks.end()) return 0;
    return static_cast<std::size_t>(
        std::count_if(it->second.begin(), it->second.end(), [&](const ImagePair& p) { return p.split == split; }));
}

DatasetDescriptor load_manifest(const fs::path& path, const TaskCatalog& catalog, const ManifestOptions& options) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open manifest " + path.string());
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const std::string origin = path.string();

    struct Partial {
        std::optional<fs::path> input, label;
        std::optional<Split> split;
        std::size_t first_line = 0;
    };
    // Keyed by (task, pair_key); std::map keeps output order stable.
    std::map<std::pair<std::string, std::string>, Partial> partial;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(origin, line_no, std::string("malformed record: ") + e.what());
        }
        if (!rec.is_object())
            throw ParseError(origin, line_no, "record is not an object");
        for (const char* field : {"task", "role", "pair_key", "path"})
            if (!rec.contains(field) || !rec[field].is_string())
                throw ParseError(origin, line_no, std::string("missing string field '") + field + "'");

        const std::string task = rec["task"];
        if (!catalog.contains(task))
            throw CatalogMiss(task);

        ImageRole role;
        Split split;
        try {
            role = parse_role(rec["role"].get<std::string>());
            const json& field = rec.contains("split") ? rec["split"] : json(nullptr);
            if (!field.is_null() && !field.is_string())
                throw std::invalid_argument("split must be a string");
            split = field.is_null() ? Split::Unsplit : parse_split(field.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ParseError(origin, line_no, e.what());
        }
        if (role == ImageRole::Query)
            throw ParseError(origin, line_no, "manifest roles are 'input' or 'label'");

        fs::path image = rec["path"].get<std::string>();
        if (image.is_relative()) image = base / image;
        if (options.require_files && !fs::exists(image))
            throw ParseError(origin, line_no, "image not found: " + image.string());

        auto& slot = partial[{task, rec["pair_key"].get<std::string>()}];
        if (slot.first_line == 0) slot.first_line = line_no;
        auto& target = role == ImageRole::Input ? slot.input : slot.label;
        if (target)
            throw ParseError(origin, line_no, "duplicate " + std::string(to_string(role)) + " for pair_key '" +
                                                  rec["pair_key"].get<std::string>() + "'");
        target = image;
        if (slot.split && *slot.split != split)
            throw ParseError(origin, line_no, "input and label disagree on split");
        slot.split = split;
    }

    DatasetDescriptor desc;
    desc.manifest = path;
    for (auto& [key, p] : partial) {
        if (!p.input)
            throw ParseError(origin, p.first_line, "dangling label: pair_key '" + key.second + "' has no input");
        if (!p.label)
            throw ParseError(origin, p.first_line, "dangling input: pair_key '" + key.second + "' has no label");
        const Split split = p.split.value_or(Split::Unsplit);
        desc.tasks[key.first].push_back(
            ImagePair{key.first, key.second, *p.input, *p.label, split, split != Split::Unsplit});
    }
    return desc;
}

void write_manifest(const DatasetDescriptor& descriptor, const fs::path& path) {
    std::ostringstream out;
    for (const auto& [task, pairs] : descriptor.tasks)
        for (const auto& p : pairs)
            for (auto role : {ImageRole::Input, ImageRole::Label}) {
                json rec = {{"task", task},
                            {"role", to_string(role)},
                            {"split", to_string(p.split)},
                            {"pair_key", p.pair_key},
                            {"path", (role == ImageRole::Input ? p.input : p.label).string()}};
                out << rec.dump() << '\n';
            }
    util::write_file_atomic(path, out.str());
}

DatasetDescriptor split_dataset(const DatasetDescriptor& descriptor, std::uint64_t seed) {
    DatasetDescriptor out = descriptor;
    for (auto& [task, pairs] : out.tasks) {
        std::vector<std::size_t> unsplit;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i].split == Split::Unsplit) unsplit.push_back(i);
        if (unsplit.empty()) continue;
        if (unsplit.size() < 2)
            throw Error("cannot split task '" + task + "': fewer than 2 unsplit pairs");

        // Per-task stream so adding a task does not reshuffle the others.
        std::mt19937_64 rng(seed ^ util::fnv1a64(task));
        for (std::size_t i = unsplit.size() - 1; i > 0; --i)
            std::swap(unsplit[i], unsplit[util::uniform_index(rng, i + 1)]);

        const std::size_t n = unsplit.size();
        const std::size_t n_train = (7 * n + 9) / 10;  // ceil(0.7 n)
        for (std::size_t r = 0; r < n; ++r)
            pairs[unsplit[r]].split = r < n_train ? Split::Train : Split::Test;
    }
    return out;
}

ImageBuffer preprocess(const ImageBuffer& image, ImageRole role, const PreprocessOptions& options) {
    if (image.empty())
        throw std::invalid_argument("preprocess: zero-dimension image");
    const int target = role == ImageRole::Query ? kQueryResolution : kDemoResolution;

    const int short_side = std::min(image.width(), image.height());
    auto scaled = [&](int side) {
        return std::max(target, static_cast<int>(std::lround(static_cast<double>(side) * target / short_side)));
    };
    const ImageBuffer resized = resize_bilinear(image, scaled(image.width()), scaled(image.height()));

    int x0 = (resized.width() - target) / 2;
    int y0 = (resized.height() - target) / 2;
    if (options.random_crop) {
        std::mt19937_64 rng(options.crop_seed);
        x0 = static_cast<int>(util::uniform_index(rng, static_cast<std::uint64_t>(resized.width() - target + 1)));
        y0 = static_cast<int>(util::uniform_index(rng, static_cast<std::uint64_t>(resized.height() - target + 1)));
    }
    return crop(resized, x0, y0, target, target);
}

namespace {

bool split_matches(const std::optional<Split>& wanted, Split actual) { return !wanted || *wanted == actual; }

ImageRef make_ref(const fs::path& path, ImageRole role, const ImagePair& p) {
    return ImageRef{path, role, p.task, p.split};
}

}  // namespace

std::vector<SampleTriple> sample_triples(const DatasetDescriptor& descriptor, const TaskPair& pair, std::size_t n,
                                         std::uint64_t seed, const SamplingOptions& options) {
    auto pool = [&](const std::string& task, const std::optional<Split>& split) {
        std::vector<const ImagePair*> out;
        if (auto it = descriptor.tasks.find(task); it != descriptor.tasks.end())
            for (const auto& p : it->second)
                if (split_matches(split, p.split)) out.push_back(&p);
        return out;
    };
    const auto demos = pool(pair.source, options.demo_split);
    const auto queries = pool(pair.target, options.query_split);
    if (demos.empty())
        throw Error("no eligible demonstration pairs for task '" + pair.source + "'");
    if (queries.empty())
        throw Error("no eligible query pairs for task '" + pair.target + "'");

    const std::uint64_t product = static_cast<std::uint64_t>(demos.size()) * queries.size();
    std::mt19937_64 rng(seed ^ util::fnv1a64(pair.key()));

    // Partial Fisher-Yates over the implicit index range [0, product).
    std::unordered_map<std::uint64_t, std::uint64_t> swapped;
    auto value_at = [&](std::uint64_t i) {
        auto it = swapped.find(i);
        return it == swapped.end() ? i : it->second;
    };
    std::vector<std::pair<std::uint64_t, bool>> picks;
    const std::uint64_t distinct = std::min<std::uint64_t>(n, product);
    for (std::uint64_t i = 0; i < distinct; ++i) {
        const std::uint64_t j = i + util::uniform_index(rng, product - i);
        const std::uint64_t vi = value_at(i), vj = value_at(j);
        swapped[i] = vj;
        swapped[j] = vi;
        picks.emplace_back(vj, false);
    }
    for (std::uint64_t i = distinct; i < n; ++i) picks.emplace_back(util::uniform_index(rng, product), true);

    std::vector<SampleTriple> out;
    out.reserve(n);
    for (std::size_t i = 0; i < picks.size(); ++i) {
        const auto [index, replacement] = picks[i];
        const ImagePair& demo = *demos[index / queries.size()];
        const ImagePair& query = *queries[index % queries.size()];
        SampleTriple t;
        t.pair = pair;
        t.demo_input = make_ref(demo.input, ImageRole::Input, demo);
        t.demo_label = make_ref(demo.label, ImageRole::Label, demo);
        t.query_input = make_ref(query.input, ImageRole::Query, query);
        if (options.include_query_label) t.query_label = make_ref(query.label, ImageRole::Label, query);
        t.sample_id = pair.source + "__" + pair.target + "__" + util::sanitize_component(demo.pair_key) + "__" +
                      util::sanitize_component(query.pair_key);
        if (replacement) t.sample_id += "__r" + std::to_string(i);
        t.with_replacement = replacement;
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

json ref_to_json(const ImageRef& r) {
    return {{"path", r.path.string()}, {"role", to_string(r.role)}, {"task", r.task}, {"split", to_string(r.split)}};
}

ImageRef ref_from_json(const json& j) {
    return ImageRef{j.at("path").get<std::string>(), parse_role(j.at("role").get<std::string>()),
                    j.at("task").get<std::string>(), parse_split(j.value("split", std::string{}))};
}

}  // namespace

json to_json(const SampleTriple& t) {
    json j = {{"sample_id", t.sample_id},
              {"pair", t.pair.key()},
              {"demo_input", ref_to_json(t.demo_input)},
              {"demo_label", ref_to_json(t.demo_label)},
              {"query_input", ref_to_json(t.query_input)},
              {"with_replacement", t.with_replacement}};
    j["query_label"] = t.query_label ? ref_to_json(*t.query_label) : json(nullptr);
    return j;
}

SampleTriple triple_from_json(const json& j, const TaskCatalog& catalog) {
    SampleTriple t;
    t.sample_id = j.at("sample_id").get<std::string>();
    t.pair = catalog.parse_pair(j.at("pair").get<std::string>());
    t.demo_input = ref_from_json(j.at("demo_input"));
    t.demo_label = ref_from_json(j.at("demo_label"));
    t.query_input = ref_from_json(j.at("query_input"));
    if (j.contains("query_label") && !j["query_label"].is_null()) t.query_label = ref_from_json(j["query_label"]);
    t.with_replacement = j.value("with_replacement", false);
    return t;
}

namespace {

ImageBuffer synth_scene(int w, int h, std::mt19937_64& rng) {
    ImageBuffer img(w, h);
    const double base[3] = {40 + 150 * util::uniform_unit(rng), 40 + 150 * util::uniform_unit(rng),
                            40 + 150 * util::uniform_unit(rng)};
    const double gx = util::uniform_unit(rng) - 0.5, gy = util::uniform_unit(rng) - 0.5;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double v = base[c] + 80 * (gx * x / w + gy * y / h) * (c + 1) / 2.0;
                img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
    for (int k = 0; k < 4; ++k) {
        const double cx = w * util::uniform_unit(rng), cy = h * util::uniform_unit(rng);
        const double r = 4 + std::min(w, h) * 0.25 * util::uniform_unit(rng);
        const std::uint8_t col[3] = {static_cast<std::uint8_t>(util::uniform_index(rng, 256)),
                                     static_cast<std::uint8_t>(util::uniform_index(rng, 256)),
                                     static_cast<std::uint8_t>(util::uniform_index(rng, 256))};
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
                    for (int c = 0; c < 3; ++c) img.at(x, y, c) = col[c];
    }
    return img;
}

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

ImageBuffer degrade(const ImageBuffer& clean, const std::string& task, std::mt19937_64& rng) {
    const int w = clean.width(), h = clean.height();
    ImageBuffer out = clean;
    auto map_pixels = [&](auto&& fn) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp_u8(fn(x, y, c, clean.at(x, y, c)));
    };
    if (task == "deblurring") {
        map_pixels([&](int x, int y, int c, int) {
            double s = 0;
            for (int d = -3; d <= 3; ++d) s += clean.at(std::clamp(x + d, 0, w - 1), y, c);
            return s / 7.0;
        });
    } else if (task == "dehazing") {
        map_pixels([](int, int, int, int v) { return 0.45 * v + 0.55 * 225; });
    } else if (task == "demoireing") {
        map_pixels([](int x, int y, int c, int v) { return v + 35 * std::sin(0.9 * x + 0.7 * y + c); });
    } else if (task == "deraining") {
        const int offset = static_cast<int>(util::uniform_index(rng, 7));
        map_pixels([&](int x, int y, int, int v) { return (x + 2 * y + offset) % 9 == 0 ? 235.0 : v; });
    } else if (task == "reflection-removal") {
        map_pixels([&](int x, int y, int c, int v) { return 0.7 * v + 0.3 * clean.at(w - 1 - x, h - 1 - y, c); });
    } else if (task == "shadow-removal") {
        map_pixels([&](int x, int y, int, int v) { return x < w / 2 && y > h / 3 ? 0.4 * v : v; });
    } else if (task == "colorization") {
        map_pixels([&](int x, int y, int, int) {
            return 0.299 * clean.at(x, y, 0) + 0.587 * clean.at(x, y, 1) + 0.114 * clean.at(x, y, 2);
        });
    } else if (task == "harmonization") {
        map_pixels([&](int x, int y, int c, int v) {
            const bool inside = x > w / 4 && x < 3 * w / 4 && y > h / 4 && y < 3 * h / 4;
            return inside ? v + (c == 0 ? 40 : -25) : v;
        });
    } else if (task == "inpainting") {
        map_pixels([&](int x, int y, int, int v) {
            return x > w / 3 && x < 2 * w / 3 && y > h / 3 && y < 2 * h / 3 ? 0.0 : v;
        });
    } else if (task == "light-enhancement") {
        map_pixels([](int, int, int, int v) { return 0.22 * v; });
    } else if (task == "style-transfer") {
        map_pixels([](int, int, int c, int v) { return 0.35 * v + (c == 2 ? 30 : 0); });
    } else {  // denoising and any task without a bespoke degradation
        map_pixels([&](int, int, int, int v) { return v + 60.0 * (util::uniform_unit(rng) - 0.5); });
    }
    return out;
}

}  // namespace

fs::path write_synthetic_corpus(const fs::path& dir, const TaskCatalog& catalog, int pairs_per_task,
                                std::uint64_t seed, int width, int height) {
    fs::create_directories(dir);
    std::ostringstream manifest;
    for (const auto& task : catalog.list_tasks()) {
        std::mt19937_64 rng(seed ^ util::fnv1a64(task.id));
        for (int i = 0; i < pairs_per_task; ++i) {
            const ImageBuffer label = synth_scene(width, height, rng);
            const ImageBuffer input = degrade(label, task.id, rng);
            const std::string key = task.id + "-" + std::to_string(i);
            const fs::path in_rel = fs::path(task.id) / (key + "_in.png");
            const fs::path gt_rel = fs::path(task.id) / (key + "_gt.png");
            save_png(input, dir / in_rel);
            save_png(label, dir / gt_rel);
            manifest << json{{"task", task.id}, {"role", "input"}, {"split", ""}, {"pair_key", key}, {"path", in_rel.string()}}.dump() << '\n';
            manifest << json{{"task", task.id}, {"role", "label"}, {"split", ""}, {"pair_key", key}, {"path", gt_rel.string()}}.dump() << '\n';
        }
    }
    const fs::path path = dir / "manifest.jsonl";
    util::write_file_atomic(path, manifest.str());
    return path;
}

}  // namespace vicl
