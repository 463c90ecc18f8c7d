// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/model_gateway.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <cmath>
#include <thread>

#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;

std::string_view to_string(BackendRole role) {
    switch (role) {
        case BackendRole::Teacher: return "teacher";
        case BackendRole::Student: return "student";
        case BackendRole::Generator: return "generator";
        case BackendRole::Evaluator: return "evaluator";
        case BackendRole::Embedder: return "embedder";
    }
    return "?";
}

BackendRole parse_backend_role(std::string_view text) {
    for (auto r : {BackendRole::Teacher, BackendRole::Student, BackendRole::Generator, BackendRole::Evaluator,
                   BackendRole::Embedder})
        if (to_string(r) == text) return r;
    throw std::invalid_argument("unknown backend role '" + std::string(text) + "'");
}

std::string_view to_string(GatewayError::Kind kind) {
    using K = GatewayError::Kind;
    switch (kind) {
        case K::Timeout: return "timeout";
        case K::Provider: return "provider";
        case K::Auth: return "auth";
        case K::Validation: return "validation";
        case K::EmptyCompletion: return "empty_completion";
        case K::Decode: return "decode";
        case K::Refusal: return "refusal";
        case K::DimensionMismatch: return "dimension_mismatch";
        case K::RoleMismatch: return "role_mismatch";
        case K::BudgetExhausted: return "budget_exhausted";
    }
    return "?";
}

std::string_view to_string(EvaluationPhase phase) {
    return phase == EvaluationPhase::SemanticConsistency ? "sc" : "pq";
}

GatewayError::GatewayError(Kind kind, std::string message, int status, int attempts)
    : Error(std::string(to_string(kind)) + ": " + message), m_kind(kind), m_status(status), m_attempts(attempts) {}

void BackendConfig::validate() const {
    if (!(timeout_s > 0)) throw std::invalid_argument(std::string(to_string(role)) + ": timeout must be > 0");
    if (max_retries < 0) throw std::invalid_argument(std::string(to_string(role)) + ": max_retries must be >= 0");
    if (temperature < 0) throw std::invalid_argument(std::string(to_string(role)) + ": temperature must be >= 0");
    if (max_in_flight == 0) throw std::invalid_argument(std::string(to_string(role)) + ": max_in_flight must be >= 1");
    if (endpoint.empty()) throw std::invalid_argument(std::string(to_string(role)) + ": endpoint is empty");
}

BackendConfig backend_config_from_json(BackendRole role, const json& doc) {
    static const std::set<std::string> known = {"endpoint",  "model_name",  "auth_env",         "timeout_s",
                                                "max_retries", "backoff_ms", "temperature",     "max_output_tokens",
                                                "max_in_flight", "call_budget", "mock_options"};
    for (const auto& [key, _] : doc.items()) {
        if (key == "api_key" || key == "key" || key == "token")
            throw std::invalid_argument("field '" + key + "': API keys must come from the environment; use auth_env");
        if (!known.count(key)) throw std::invalid_argument("unknown backend field '" + key + "'");
    }
    BackendConfig c;
    c.role = role;
    c.endpoint = doc.value("endpoint", c.endpoint);
    c.model_name = doc.value("model_name", c.model_name);
    c.auth_env = doc.value("auth_env", c.auth_env);
    c.timeout_s = doc.value("timeout_s", c.timeout_s);
    c.max_retries = doc.value("max_retries", c.max_retries);
    c.backoff_ms = doc.value("backoff_ms", c.backoff_ms);
    c.temperature = doc.value("temperature", c.temperature);
    c.max_output_tokens = doc.value("max_output_tokens", c.max_output_tokens);
    c.max_in_flight = doc.value("max_in_flight", c.max_in_flight);
    if (doc.contains("call_budget") && !doc["call_budget"].is_null()) c.call_budget = doc["call_budget"].get<std::size_t>();
    if (doc.contains("mock_options")) c.mock_options = doc["mock_options"];
    c.validate();
    return c;
}

json to_json(const BackendConfig& c) {
    json j = {{"endpoint", c.endpoint},       {"model_name", c.model_name},
              {"auth_env", c.auth_env},       {"timeout_s", c.timeout_s},
              {"max_retries", c.max_retries}, {"backoff_ms", c.backoff_ms},
              {"temperature", c.temperature}, {"max_output_tokens", c.max_output_tokens},
              {"max_in_flight", c.max_in_flight}, {"mock_options", c.mock_options}};
    j["call_budget"] = c.call_budget ? json(*c.call_budget) : json(nullptr);
    return j;
}

const BackendConfig& BackendSet::at(BackendRole role) const {
    auto it = configs.find(role);
    if (it == configs.end())
        throw std::invalid_argument("no backend configured for role '" + std::string(to_string(role)) + "'");
    return it->second;
}

BackendSet BackendSet::from_json(const json& doc) {
    BackendSet set;
    for (const auto& [key, value] : doc.items()) {
        const BackendRole role = parse_backend_role(key);
        set.configs.emplace(role, backend_config_from_json(role, value));
    }
    return set;
}

BackendSet BackendSet::all_mock(double generator_temperature) {
    BackendSet set;
    for (auto r : {BackendRole::Teacher, BackendRole::Student, BackendRole::Generator, BackendRole::Evaluator,
                   BackendRole::Embedder}) {
        BackendConfig c;
        c.role = r;
        c.model_name = "mock-" + std::string(to_string(r));
        c.backoff_ms = 1;
        if (r == BackendRole::Generator) c.temperature = generator_temperature;
        set.configs.emplace(r, c);
    }
    return set;
}

std::shared_ptr<Transport> transport_for(const BackendConfig& config) {
    if (config.endpoint.rfind("mock://", 0) == 0) return make_mock_transport();
    if (config.endpoint.rfind("http://", 0) == 0 || config.endpoint.rfind("https://", 0) == 0)
        return make_http_transport();
    throw std::invalid_argument("unsupported endpoint '" + config.endpoint + "'");
}

// ---------------------------------------------------------------- client

ModelClient::ModelClient(BackendConfig config, std::shared_ptr<Transport> transport)
    : m_config(std::move(config)), m_transport(std::move(transport)) {
    m_config.validate();
}

std::size_t ModelClient::peak_in_flight() const {
    std::lock_guard lock(m_gate_mutex);
    return m_peak;
}

void ModelClient::require_role(std::initializer_list<BackendRole> roles, const char* op) const {
    if (std::find(roles.begin(), roles.end(), m_config.role) == roles.end())
        throw GatewayError(GatewayError::Kind::RoleMismatch,
                           std::string(op) + " is not available on a " + std::string(to_string(m_config.role)) +
                               " backend");
}

void ModelClient::charge_budget() {
    const std::size_t n = ++m_calls;
    if (m_config.call_budget && n > *m_config.call_budget) {
        --m_calls;
        throw GatewayError(GatewayError::Kind::BudgetExhausted,
                           "call budget of " + std::to_string(*m_config.call_budget) + " reached for " +
                               std::string(to_string(m_config.role)));
    }
}

namespace {

bool is_transient(int status) { return status == 429 || status >= 500; }

std::string excerpt(const std::string& body) { return body.size() > 300 ? body.substr(0, 300) + "..." : body; }

}  // namespace

json ModelClient::send(const json& request, GenerationResponse& meta) {
    {
        std::unique_lock lock(m_gate_mutex);
        m_gate_cv.wait(lock, [&] { return m_in_flight < m_config.max_in_flight; });
        ++m_in_flight;
        m_peak = std::max(m_peak, m_in_flight);
    }
    struct Release {
        ModelClient* self;
        ~Release() {
            {
                std::lock_guard lock(self->m_gate_mutex);
                --self->m_in_flight;
            }
            self->m_gate_cv.notify_one();
        }
    } release{this};

    const auto start = std::chrono::steady_clock::now();
    const int max_attempts = m_config.max_retries + 1;
    for (int attempt = 1;; ++attempt) {
        std::optional<GatewayError> failure;
        try {
            TransportResponse resp = m_transport->post(request, m_config);
            if (resp.status >= 200 && resp.status < 300) {
                json body;
                try {
                    body = json::parse(resp.body);
                } catch (const json::parse_error&) {
                    throw GatewayError(GatewayError::Kind::Decode, "response is not JSON: " + excerpt(resp.body),
                                       resp.status, attempt);
                }
                meta.attempt = attempt;
                meta.latency_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                return body;
            }
            if (resp.status == 401 || resp.status == 403)
                throw GatewayError(GatewayError::Kind::Auth, "status " + std::to_string(resp.status) + ": " +
                                   excerpt(resp.body), resp.status, attempt);
            const auto kind = is_transient(resp.status) || resp.status < 400 ? GatewayError::Kind::Provider
                                                                              : GatewayError::Kind::Validation;
            failure.emplace(kind, "status " + std::to_string(resp.status) + ": " + excerpt(resp.body), resp.status,
                            attempt);
            if (!is_transient(resp.status)) throw *failure;
        } catch (const TransportTimeout& e) {
            failure.emplace(GatewayError::Kind::Timeout, e.what(), 0, attempt);
        }
        if (attempt >= max_attempts) throw *failure;
        const int delay = m_config.backoff_ms * (1 << std::min(attempt - 1, 10));
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
}

json ModelClient::request_payload(const PromptBundle& bundle, const std::string& operation, int sample_index) const {
    json wire = to_wire(bundle);
    return {{"model", m_config.model_name},
            {"operation", operation},
            {"role", to_string(m_config.role)},
            {"temperature", m_config.temperature},
            {"max_output_tokens", m_config.max_output_tokens},
            {"sample_index", sample_index},
            {"prompt_kind", wire["kind"]},
            {"template", wire["template"]},
            {"image_slots", wire["image_slots"]},
            {"messages", wire["messages"]}};
}

namespace {

void require_bound(const PromptBundle& bundle) {
    if (!bundle.fully_bound())
        throw GatewayError(GatewayError::Kind::Validation, "prompt bundle has unbound image slots");
}

std::string refusal_of(const json& body) {
    if (body.contains("refusal") && body["refusal"].is_string()) return body["refusal"].get<std::string>();
    return {};
}

}  // namespace

GenerationResponse ModelClient::complete_text(const PromptBundle& bundle, int sample_index) {
    require_role({BackendRole::Teacher, BackendRole::Student}, "complete_text");
    require_bound(bundle);
    charge_budget();
    GenerationResponse out;
    json body = send(request_payload(bundle, "chat", sample_index), out);
    if (auto r = refusal_of(body); !r.empty())
        throw GatewayError(GatewayError::Kind::Refusal, r, 200, out.attempt);
    out.kind = GenerationResponse::Kind::Text;
    out.text = body.value("text", std::string{});
    out.raw = std::move(body);
    if (util::trim(out.text).empty())
        throw GatewayError(GatewayError::Kind::EmptyCompletion, "backend returned no text", 200, out.attempt);
    return out;
}

GenerationResponse ModelClient::generate_image(const PromptBundle& bundle, int sample_index) {
    require_role({BackendRole::Generator}, "generate_image");
    require_bound(bundle);
    charge_budget();
    GenerationResponse out;
    json body = send(request_payload(bundle, "image", sample_index), out);
    if (auto r = refusal_of(body); !r.empty())
        throw GatewayError(GatewayError::Kind::Refusal, r, 200, out.attempt);
    if (!body.contains("image") || !body["image"].is_string())
        throw GatewayError(GatewayError::Kind::Decode, "response carries no image", 200, out.attempt);
    try {
        const auto png = util::base64_decode(body["image"].get<std::string>());
        out.image = decode_png(png);
        body["image"] = "sha256:" + util::sha256_hex(png);
    } catch (const Error& e) {
        throw GatewayError(GatewayError::Kind::Decode, e.what(), 200, out.attempt);
    }
    out.text = body.value("text", std::string{});
    out.kind = out.text.empty() ? GenerationResponse::Kind::Image : GenerationResponse::Kind::TextAndImage;
    out.raw = std::move(body);
    return out;
}

std::vector<std::vector<double>> ModelClient::embed_text(std::span<const std::string> texts) {
    require_role({BackendRole::Embedder}, "embed_text");
    if (texts.empty()) throw std::invalid_argument("embed_text: no texts");
    charge_budget();
    json request = {{"model", m_config.model_name},
                    {"operation", "embed"},
                    {"role", to_string(m_config.role)},
                    {"inputs", std::vector<std::string>(texts.begin(), texts.end())}};
    GenerationResponse meta;
    json body = send(request, meta);
    if (!body.contains("embeddings") || !body["embeddings"].is_array() || body["embeddings"].size() != texts.size())
        throw GatewayError(GatewayError::Kind::Decode, "expected one embedding per input", 200, meta.attempt);

    std::vector<std::vector<double>> out;
    for (const auto& v : body["embeddings"]) {
        auto vec = v.get<std::vector<double>>();
        if (!out.empty() && vec.size() != out.front().size())
            throw GatewayError(GatewayError::Kind::DimensionMismatch,
                               "embedding dimensions differ within one batch (" + std::to_string(out.front().size()) +
                                   " vs " + std::to_string(vec.size()) + ")");
        double norm = 0;
        for (double x : vec) norm += x * x;
        norm = std::sqrt(norm);
        if (!(norm > 0)) throw GatewayError(GatewayError::Kind::Decode, "zero embedding vector");
        for (double& x : vec) x /= norm;
        out.push_back(std::move(vec));
    }
    std::lock_guard lock(m_gate_mutex);
    if (m_embedding_dim == 0) m_embedding_dim = out.front().size();
    if (out.front().size() != m_embedding_dim)
        throw GatewayError(GatewayError::Kind::DimensionMismatch,
                           "embedding dimension changed from " + std::to_string(m_embedding_dim) + " to " +
                               std::to_string(out.front().size()));
    return out;
}

GenerationResponse ModelClient::evaluate(const PromptBundle& rubric, EvaluationPhase phase,
                                         const std::vector<std::string>& rubric_items) {
    require_role({BackendRole::Evaluator}, "evaluate");
    require_bound(rubric);
    std::size_t images = 0;
    bool synthesized_present = false;
    for (const auto& m : rubric.messages)
        for (const auto* img : m.images()) {
            ++images;
            synthesized_present |= img->slot == SlotRole::Synthesized;
        }
    if (!synthesized_present)
        throw GatewayError(GatewayError::Kind::Validation, "evaluation request has no synthesized image");
    if (phase == EvaluationPhase::PerceptualQuality && images != 1)
        throw GatewayError(GatewayError::Kind::Validation,
                           "perceptual-quality request must carry only the synthesized image");
    charge_budget();
    GenerationResponse out;
    json request = request_payload(rubric, "evaluate", 0);
    request["phase"] = to_string(phase);
    request["rubric_items"] = rubric_items;
    json body = send(request, out);
    if (auto r = refusal_of(body); !r.empty())
        throw GatewayError(GatewayError::Kind::Refusal, r, 200, out.attempt);
    out.kind = GenerationResponse::Kind::Text;
    out.text = body.value("text", std::string{});
    out.raw = std::move(body);
    if (util::trim(out.text).empty())
        throw GatewayError(GatewayError::Kind::EmptyCompletion, "evaluator returned no text", 200, out.attempt);
    return out;
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(const BackendSet& backends) {
    for (const auto& [role, config] : backends.configs) m_clients.emplace(role, std::make_unique<ModelClient>(config));
}

Gateway::Gateway(const BackendSet& backends, std::shared_ptr<Transport> transport) {
    for (const auto& [role, config] : backends.configs)
        m_clients.emplace(role, std::make_unique<ModelClient>(config, transport));
}

ModelClient& Gateway::client(BackendRole role) {
    auto it = m_clients.find(role);
    if (it == m_clients.end())
        throw std::invalid_argument("no backend configured for role '" + std::string(to_string(role)) + "'");
    return *it->second;
}

std::vector<double> trigram_counts(std::string_view text, std::size_t dimension) {
    if (dimension == 0) throw std::invalid_argument("trigram_counts: zero dimension");
    const std::string padded = "  " + std::string(text) + "  ";
    std::vector<double> counts(dimension, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
        counts[util::fnv1a64(std::string_view(padded).substr(i, 3)) % dimension] += 1.0;
    return counts;
}

}  // namespace vicl
