// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic stand-in for every backend role. It consumes the same JSON
// requests as a hosted provider and answers from hashes of the request, so a
// run against it is reproducible byte for byte.
//
// mock_options understood:
//   refuse_all: bool               generator refuses every request
//   refuse_samples: [int]          generator refuses these sample indices
//   dimension: int                 embedding size (default 384)
//   noise: number                  generator noise amplitude in u8 steps (default 24)
//   text: string                   fixed completion for teacher/student

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "vicl/model_gateway.hpp"
#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;

namespace {

constexpr std::array kDemoObservations = {
    "the demonstration input shows thin, directional streaks crossing the scene",
    "the demonstration input looks washed out, with a milky veil that flattens distant contrast",
    "edges in the demonstration input are smeared along one direction",
    "the demonstration input carries rippled, wavy interference bands over flat surfaces",
    "fine-grained random speckle covers the flat regions of the demonstration input",
    "the demonstration input is dim and its shadows swallow most of the detail",
    "a patch of the demonstration input is blank and has to be filled from its surroundings",
    "the demonstration input has drained, grey tones with almost no chroma",
};

constexpr std::array kDemoChanges = {
    "the demonstration output restores crisp structure while keeping the global color consistent",
    "the demonstration output recovers clean, even surfaces without smoothing away fine texture",
    "the demonstration output lifts local contrast and keeps hues stable",
    "the demonstration output rebuilds the affected area so it blends with its neighbourhood",
};

constexpr std::array kQueryObservations = {
    "the query image shows spatially uniform, fine-grained perturbations that reduce local contrast",
    "the query image is dark overall, with compressed mid-tones",
    "the query image has a foreground region whose color and brightness do not match the rest of the scene",
    "the query image contains faint overlapping ghost structures from a second scene",
    "the query image has sharp-edged dark regions where direct light is blocked",
    "the query image shows a hazy, low-saturation look over distant objects",
    "the query image has a night-time appearance with a strong blue cast",
    "the query image has soft, doubled edges that hide small details",
};

constexpr std::array kActions = {
    "attenuate the random perturbations with structure-aware smoothing",
    "raise exposure gradually while protecting highlights",
    "match the color statistics of the odd region to its surroundings",
    "separate and suppress the faint overlaid structures",
    "even out the illumination inside the dark regions",
    "restore depth contrast and saturation in the far field",
    "re-render the scene with daylight tones and neutral white balance",
    "recover sharp edges without adding ringing",
};

constexpr std::array kConstraints = {
    "keep edges and high-frequency texture intact",
    "avoid introducing color casts",
    "preserve the spatial layout and object identity",
    "do not over-smooth fine structure",
};

std::uint64_t word(const std::string& digest, int i) {
    return std::stoull(digest.substr(static_cast<std::size_t>(i) * 8 % 56, 8), nullptr, 16);
}

/// Digest of everything that identifies a chat/image request.
std::string request_digest(const json& request) {
    std::string material = request.value("template", std::string{}) + "|" + request.value("role", std::string{}) +
                           "|" + std::to_string(request.value("sample_index", 0));
    for (const auto& m : request.value("messages", json::array()))
        for (const auto& p : m.value("parts", json::array())) {
            if (p.value("type", "") == "image")
                material += "|img:" + util::sha256_hex(p.value("data", std::string{}));
            else
                material += "|txt:" + util::sha256_hex(p.value("text", std::string{}));
        }
    return util::sha256_hex(material);
}

std::string compose_description(const std::string& d) {
    auto pick = [&](const auto& bank, int i) { return std::string(bank[word(d, i) % bank.size()]); };
    std::string text = "In the example pair, " + pick(kDemoObservations, 0) + "; " + pick(kDemoChanges, 1) + ". ";
    text += "Now consider the third image: " + pick(kQueryObservations, 2) + ". ";
    text += "To adapt the shown transformation, (1) " + pick(kActions, 3) + ", (2) " + pick(kActions, 4) +
            ", and (3) " + pick(kConstraints, 5) + ".";
    return text;
}

const json* find_image(const json& request, const std::string& slot) {
    if (!request.contains("messages")) return nullptr;
    for (const auto& m : request["messages"]) {
        if (!m.contains("parts")) continue;
        for (const auto& p : m["parts"])
            if (p.value("type", "") == "image" && p.value("slot", "") == slot && p.contains("data")) return &p;
    }
    return nullptr;
}

TransportResponse ok(const json& body) { return {200, body.dump()}; }

TransportResponse bad_request(const std::string& why) { return {400, json{{"error", {{"message", why}}}}.dump()}; }

class MockTransport final : public Transport {
public:
    TransportResponse post(const json& request, const BackendConfig& config) override {
        const std::string op = request.value("operation", "");
        const json& opts = config.mock_options;
        if (op == "chat") {
            if (opts.contains("text")) return ok({{"text", opts["text"]}});
            return ok({{"text", compose_description(request_digest(request))}});
        }
        if (op == "image") return image(request, opts);
        if (op == "embed") {
            const std::size_t dim = opts.value("dimension", std::size_t{384});
            json out = json::array();
            for (const auto& t : request.at("inputs")) out.push_back(trigram_counts(t.get<std::string>(), dim));
            return ok({{"embeddings", out}});
        }
        if (op == "evaluate") return evaluate(request);
        return bad_request("unknown operation '" + op + "'");
    }

private:
    static TransportResponse image(const json& request, const json& opts) {
        const int sample = request.value("sample_index", 0);
        if (opts.value("refuse_all", false)) return ok({{"refusal", "mock generator refused the request"}});
        if (opts.contains("refuse_samples")) {
            const auto refused = opts["refuse_samples"].get<std::vector<int>>();
            if (std::find(refused.begin(), refused.end(), sample) != refused.end())
                return ok({{"refusal", "mock generator refused sample " + std::to_string(sample)}});
        }
        const json* query = find_image(request, "query_input");
        if (!query) return bad_request("image request without a query_input image");
        ImageBuffer img = decode_png(util::base64_decode(query->at("data").get<std::string>()));

        // Amplitude and pattern differ per draw; temperature 0 collapses the
        // draws onto one image.
        const double temperature = request.value("temperature", 0.0);
        json keyed = request;
        if (temperature == 0) keyed["sample_index"] = 0;
        const std::string digest = request_digest(keyed);
        std::mt19937_64 rng(word(digest, 0) ^ (word(digest, 1) << 32));
        const double base = opts.value("noise", 24.0);
        const double amplitude = temperature > 0 ? base * (0.25 + 1.5 * util::uniform_unit(rng)) : base;
        for (auto& v : img.bytes()) {
            const double noisy = v + amplitude * (util::uniform_unit(rng) - 0.5);
            v = static_cast<std::uint8_t>(std::clamp(std::floor(noisy + 0.5), 0.0, 255.0));
        }
        return ok({{"image", util::base64_encode(encode_png(img))}});
    }

    static TransportResponse evaluate(const json& request) {
        const std::string digest = request_digest(request);
        const std::string phase = request.value("phase", "sc");
        const auto items = request.value("rubric_items", std::vector<std::string>{"overall"});
        json scores = json::array();
        for (std::size_t i = 0; i < items.size(); ++i)
            scores.push_back(static_cast<int>(5 + word(digest, static_cast<int>(i)) % 6));
        const std::string rationale = phase == "sc" ? "The edit follows the instruction and stays consistent with the query."
                                                    : "The image looks natural with few visible artifacts.";
        json block = {{phase, scores}, {"rationale", rationale}};
        return ok({{"text", "Reasoning: " + rationale + "\n" + block.dump()}});
    }
};

}  // namespace

std::shared_ptr<Transport> make_mock_transport() { return std::make_shared<MockTransport>(); }

}  // namespace vicl
