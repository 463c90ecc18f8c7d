// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vicl/error.hpp"
#include "vicl/image.hpp"
#include "vicl/prompt_engine.hpp"

namespace vicl {

enum class BackendRole { Teacher, Student, Generator, Evaluator, Embedder };
std::string_view to_string(BackendRole role);
BackendRole parse_backend_role(std::string_view text);

struct BackendConfig {
    BackendRole role = BackendRole::Teacher;
    /// http(s)://host[:port]/path, or mock:// for the deterministic mock.
    std::string endpoint = "mock://";
    std::string model_name = "mock";
    /// Name of the environment variable holding the API key. Keys never
    /// appear in configuration files.
    std::string auth_env;
    double timeout_s = 60.0;
    int max_retries = 3;
    int backoff_ms = 250;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::size_t max_in_flight = 4;
    /// Maximum number of logical calls (retries excluded); unlimited if unset.
    std::optional<std::size_t> call_budget;
    /// Behaviour switches for the mock backend.
    nlohmann::json mock_options = nlohmann::json::object();

    void validate() const;
};

BackendConfig backend_config_from_json(BackendRole role, const nlohmann::json& doc);
nlohmann::json to_json(const BackendConfig& config);

/// One configuration per role.
struct BackendSet {
    std::map<BackendRole, BackendConfig> configs;

    const BackendConfig& at(BackendRole role) const;
    static BackendSet from_json(const nlohmann::json& doc);
    /// Every role served by the mock backend.
    static BackendSet all_mock(double generator_temperature = 0.7);
};

class GatewayError : public Error {
public:
    enum class Kind {
        Timeout,
        Provider,  ///< non-success status outside the other categories
        Auth,
        Validation,
        EmptyCompletion,
        Decode,
        Refusal,
        DimensionMismatch,
        RoleMismatch,
        BudgetExhausted,
    };

    GatewayError(Kind kind, std::string message, int status = 0, int attempts = 0);
    Kind kind() const { return m_kind; }
    int status() const { return m_status; }
    int attempts() const { return m_attempts; }

private:
    Kind m_kind;
    int m_status;
    int m_attempts;
};

std::string_view to_string(GatewayError::Kind kind);

/// Raised by transports when a request does not complete in time or the
/// connection fails; always treated as transient.
class TransportTimeout : public Error {
public:
    using Error::Error;
};

struct TransportResponse {
    int status = 200;
    std::string body;
};

/// Delivers one JSON request to a backend.
class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportResponse post(const nlohmann::json& request, const BackendConfig& config) = 0;
};

std::shared_ptr<Transport> make_http_transport();
std::shared_ptr<Transport> make_mock_transport();
/// Picks the transport from the endpoint scheme.
std::shared_ptr<Transport> transport_for(const BackendConfig& config);

struct GenerationResponse {
    enum class Kind { Text, Image, TextAndImage, Embeddings };
    Kind kind = Kind::Text;
    std::string text;
    std::optional<ImageBuffer> image;
    std::vector<std::vector<double>> embeddings;
    double latency_ms = 0.0;
    int attempt = 1;  ///< 1-based count of transport attempts used
    /// Provider response; image payloads are replaced by their SHA-256.
    nlohmann::json raw;
};

enum class EvaluationPhase { SemanticConsistency, PerceptualQuality };
std::string_view to_string(EvaluationPhase phase);

/// Client for one backend role. Shareable across threads; at most
/// config.max_in_flight requests are outstanding at any time.
class ModelClient {
public:
    ModelClient(BackendConfig config, std::shared_ptr<Transport> transport);
    explicit ModelClient(BackendConfig config) : ModelClient(config, transport_for(config)) {}

    const BackendConfig& config() const { return m_config; }

    /// Teacher or Student. Returns non-empty text.
    GenerationResponse complete_text(const PromptBundle& bundle, int sample_index = 0);
    /// Generator. `sample_index` separates repeated draws for one prompt.
    GenerationResponse generate_image(const PromptBundle& bundle, int sample_index);
    /// Embedder. One L2-normalized vector per text; every call must return
    /// the dimension of the first.
    std::vector<std::vector<double>> embed_text(std::span<const std::string> texts);
    /// Evaluator. Returns the raw evaluator text. A perceptual-quality request
    /// must carry exactly one image, the synthesized one.
    GenerationResponse evaluate(const PromptBundle& rubric, EvaluationPhase phase,
                                const std::vector<std::string>& rubric_items);

    std::size_t calls() const { return m_calls.load(); }
    std::size_t peak_in_flight() const;

    /// Wire payload for a text or image request; exposed for inspection.
    nlohmann::json request_payload(const PromptBundle& bundle, const std::string& operation,
                                   int sample_index) const;

private:
    nlohmann::json send(const nlohmann::json& request, GenerationResponse& meta);
    void require_role(std::initializer_list<BackendRole> roles, const char* op) const;
    void charge_budget();

    BackendConfig m_config;
    std::shared_ptr<Transport> m_transport;
    std::atomic<std::size_t> m_calls{0};

    mutable std::mutex m_gate_mutex;
    std::condition_variable m_gate_cv;
    std::size_t m_in_flight = 0;
    std::size_t m_peak = 0;
    std::size_t m_embedding_dim = 0;  ///< fixed by the first embed_text call; guarded by m_gate_mutex
};

/// Clients for every role of a BackendSet.
class Gateway {
public:
    explicit Gateway(const BackendSet& backends);
    Gateway(const BackendSet& backends, std::shared_ptr<Transport> transport);

    ModelClient& client(BackendRole role);
    bool has(BackendRole role) const { return m_clients.count(role) != 0; }

private:
    std::map<BackendRole, std::unique_ptr<ModelClient>> m_clients;
};

/// Reference trigram embedding used by the mock embedder: counts of
/// byte-trigrams of "  " + text + "  ", bucketed by fnv1a64 % dimension.
/// Not normalized.
std::vector<double> trigram_counts(std::string_view text, std::size_t dimension);

}  // namespace vicl
