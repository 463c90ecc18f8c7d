// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

#include "vicl/vicl_runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <thread>

#include "vicl/util.hpp"

namespace vicl {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(RunMode mode) { return mode == RunMode::FixedBaseline ? "fixed" : "ours"; }

RunMode parse_run_mode(std::string_view text) {
    if (text == "fixed") return RunMode::FixedBaseline;
    if (text == "ours") return RunMode::Ours;
    throw std::invalid_argument("unknown run mode '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- records

json CandidateResult::to_json() const {
    json j = {{"attempt", attempt}, {"image", image}, {"prompt_used", prompt_used}, {"failure", failure}};
    if (failed()) {
        j["psnr"] = nullptr;
        j["ssim"] = nullptr;
    } else {
        j["psnr"] = psnr.to_json();
        j["ssim"] = ssim;
    }
    j["vie"] = vie ? vie->to_json() : json(nullptr);
    if (!vie_error.empty()) j["vie_error"] = vie_error;
    return j;
}

CandidateResult CandidateResult::from_json(const json& j) {
    CandidateResult c;
    c.attempt = j.at("attempt").get<int>();
    c.image = j.value("image", std::string{});
    c.prompt_used = j.value("prompt_used", std::string{});
    c.failure = j.value("failure", std::string{});
    if (!c.failed()) {
        c.psnr = Psnr::from_json(j.at("psnr"));
        c.ssim = j.at("ssim").get<double>();
    }
    if (j.contains("vie") && !j["vie"].is_null()) c.vie = VieResult::from_json(j["vie"]);
    c.vie_error = j.value("vie_error", std::string{});
    return c;
}

const CandidateResult* SampleOutcome::selected_candidate() const {
    if (!selected) return nullptr;
    for (const auto& c : candidates)
        if (c.attempt == *selected) return &c;
    return nullptr;
}

json SampleOutcome::to_json() const {
    json cands = json::array();
    for (const auto& c : candidates) cands.push_back(c.to_json());
    json j = {{"sample_id", sample_id},
              {"pair", pair.key()},
              {"mode", to_string(mode)},
              {"status", status == OutcomeStatus::Succeeded ? "succeeded" : "failed"},
              {"k", k},
              {"generator_temperature", generator_temperature},
              {"metric_resolution", metric_resolution},
              {"instruction", instruction},
              {"failure", failure},
              {"candidates", std::move(cands)}};
    j["selected"] = selected ? json(*selected) : json(nullptr);
    j["implicit_prompt"] = implicit_prompt ? implicit_prompt->to_json() : json(nullptr);
    return j;
}

SampleOutcome SampleOutcome::from_json(const json& j, const TaskCatalog& catalog) {
    SampleOutcome o;
    o.sample_id = j.at("sample_id").get<std::string>();
    o.pair = catalog.parse_pair(j.at("pair").get<std::string>());
    o.mode = parse_run_mode(j.at("mode").get<std::string>());
    const std::string status = j.at("status");
    if (status != "succeeded" && status != "failed") throw Error("unknown outcome status '" + status + "'");
    o.status = status == "succeeded" ? OutcomeStatus::Succeeded : OutcomeStatus::Failed;
    o.k = j.value("k", 0);
    o.generator_temperature = j.value("generator_temperature", 0.0);
    o.metric_resolution = j.value("metric_resolution", std::string{});
    o.instruction = j.value("instruction", std::string{});
    o.failure = j.value("failure", std::string{});
    if (j.contains("selected") && !j["selected"].is_null()) o.selected = j["selected"].get<int>();
    if (j.contains("implicit_prompt") && !j["implicit_prompt"].is_null())
        o.implicit_prompt = PromptRecord::from_json(j["implicit_prompt"], catalog);
    for (const auto& c : j.at("candidates")) o.candidates.push_back(CandidateResult::from_json(c));
    return o;
}

std::optional<int> select_best(const std::vector<CandidateResult>& candidates) {
    const CandidateResult* best = nullptr;
    for (const auto& c : candidates) {
        if (c.failed()) continue;
        if (!best || c.psnr > best->psnr || (c.psnr == best->psnr && c.attempt < best->attempt)) best = &c;
    }
    if (!best) return std::nullopt;
    return best->attempt;
}

// ---------------------------------------------------------------- store

RunStore::RunStore(fs::path dir) : m_dir(std::move(dir)) { fs::create_directories(m_dir); }

std::vector<SampleOutcome> RunStore::load_outcomes(const TaskCatalog& catalog) const {
    std::vector<SampleOutcome> out;
    std::ifstream in(outcomes_path());
    if (!in) return out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(outcomes_path().string(), line_no, e.what());
        }
        if (j.contains("marker")) continue;
        out.push_back(SampleOutcome::from_json(j, catalog));
    }
    return out;
}

void RunStore::append_line(const fs::path& file, const std::string& line) {
    std::lock_guard lock(m_mutex);
    // One write per record; a crash leaves at most a truncated final line.
    std::ofstream out(file, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append to " + file.string());
    const std::string record = line + "\n";
    out.write(record.data(), static_cast<std::streamsize>(record.size()));
    out.flush();
    if (!out) throw Error("short write to " + file.string());
}

void RunStore::append_outcome(const SampleOutcome& outcome) {
    append_line(outcomes_path(), outcome.to_json().dump());
    json timings = {{"sample_id", outcome.sample_id}, {"mode", to_string(outcome.mode)}, {"ms", outcome.timings}};
    append_line(m_dir / "timings.jsonl", timings.dump());
}

void RunStore::append_marker(const json& marker) { append_line(outcomes_path(), marker.dump()); }

std::string RunStore::save_candidate_image(RunMode mode, const std::string& sample_id, int attempt,
                                           const ImageBuffer& image) {
    char name[32];
    std::snprintf(name, sizeof name, "attempt_%02d.png", attempt);
    const fs::path rel = fs::path("images") / std::string(to_string(mode)) / util::sanitize_component(sample_id) / name;
    save_png(image, m_dir / rel);
    return rel.generic_string();
}

fs::path RunStore::pending_review_path(const std::string& sample_id) const {
    return m_dir / "reviews" / "pending" / (util::sanitize_component(sample_id) + ".json");
}

fs::path RunStore::approved_review_path(const std::string& sample_id) const {
    return m_dir / "reviews" / "approved" / (util::sanitize_component(sample_id) + ".json");
}

void RunStore::append_audit(const json& entry) {
    fs::create_directories(m_dir / "reviews");
    append_line(m_dir / "reviews" / "audit.jsonl", entry.dump());
}

// ---------------------------------------------------------------- runner

Runner::Runner(const PromptEngine& engine, Gateway& gateway, RunStore& store, ImageLoader loader)
    : m_engine(&engine), m_gateway(&gateway), m_store(&store), m_loader(std::move(loader)) {}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct ApprovedReview {
    PromptRecord record;
    bool allow_leaky;
};

}  // namespace

PromptRecord Runner::student_prompt(const SampleTriple& triple, int sample_index) {
    SampleTriple student_view = triple;
    student_view.query_label.reset();
    const PromptBundle bundle = bind_images(m_engine->build_student_prompt(student_view), m_loader);
    const auto response = m_gateway->client(BackendRole::Student).complete_text(bundle, sample_index);
    std::string id = triple.sample_id + "/student";
    if (sample_index > 0) id += "/" + std::to_string(sample_index);
    return PromptRecord(std::move(id), response.text, triple.pair, triple.sample_id, PromptGenerator::Student,
                        m_engine->catalog());
}

std::optional<PromptRecord> Runner::approved_prompt(const std::string& sample_id) const {
    const fs::path path = m_store->approved_review_path(sample_id);
    if (!fs::exists(path)) return std::nullopt;
    const json doc = json::parse(util::read_file(path));
    return PromptRecord::from_json(doc.at("record"), m_engine->catalog());
}

std::optional<SampleOutcome> Runner::run_sample(const SampleTriple& triple, const RunOptions& options) {
    if (!triple.query_label)
        throw std::invalid_argument("run_sample needs the query label of sample '" + triple.sample_id + "'");
    if (options.k < 1) throw std::invalid_argument("k must be >= 1");

    SampleOutcome outcome;
    outcome.sample_id = triple.sample_id;
    outcome.pair = triple.pair;
    outcome.mode = options.mode;
    outcome.k = options.k;
    outcome.generator_temperature = m_gateway->client(BackendRole::Generator).config().temperature;

    auto fail = [&](std::string why) {
        outcome.status = OutcomeStatus::Failed;
        outcome.failure = std::move(why);
        return outcome;
    };

    // Stage 1: the prompt handed to the generator.
    PromptBundle deployment;
    bool allow_leaky = options.allow_leaky;
    const auto t_student = Clock::now();
    if (options.mode == RunMode::FixedBaseline) {
        deployment = m_engine->build_fixed_prompt(triple);
    } else {
        std::optional<PromptRecord> record;
        if (const fs::path approved = m_store->approved_review_path(triple.sample_id); fs::exists(approved)) {
            const json doc = json::parse(util::read_file(approved));
            record = PromptRecord::from_json(doc.at("record"), m_engine->catalog());
            allow_leaky = allow_leaky || doc.value("allow_leaky", false);
        } else {
            try {
                record = student_prompt(triple, 0);
            } catch (const GatewayError& e) {
                if (e.kind() == GatewayError::Kind::BudgetExhausted) throw;
                return fail(std::string("student: ") + e.what());
            }
            if (options.review) {
                json pending = {{"sample_id", triple.sample_id},
                                {"mode", to_string(options.mode)},
                                {"record", record->to_json()},
                                {"triple", to_json(triple)}};
                util::write_file_atomic(m_store->pending_review_path(triple.sample_id), pending.dump(2) + "\n");
                return std::nullopt;
            }
        }
        outcome.implicit_prompt = record;
        try {
            deployment = m_engine->build_deployment_prompt(triple, *record, allow_leaky);
        } catch (const LeakyPromptError& e) {
            outcome.timings["student"] = ms_since(t_student);
            return fail(std::string("lint: ") + e.what());
        }
    }
    outcome.timings["student"] = ms_since(t_student);
    outcome.instruction = deployment.instruction();
    deployment = bind_images(std::move(deployment), m_loader);
    const std::string prompt_id =
        outcome.implicit_prompt ? outcome.implicit_prompt->id() : deployment.template_id;

    // Stage 2: k generator draws.
    const auto t_generate = Clock::now();
    struct Draw {
        std::optional<ImageBuffer> image;
        std::string prompt_id;
        std::string failure;
    };
    auto draw = [&](int attempt) -> Draw {
        PromptBundle bundle = deployment;
        std::string used = prompt_id;
        if (options.resample_prompt && options.mode == RunMode::Ours && attempt > 0) {
            try {
                PromptRecord fresh = student_prompt(triple, attempt);
                bundle = bind_images(m_engine->build_deployment_prompt(triple, fresh, allow_leaky), m_loader);
                used = fresh.id();
            } catch (const LeakyPromptError& e) {
                return {std::nullopt, used, std::string("lint: ") + e.what()};
            } catch (const GatewayError& e) {
                if (e.kind() == GatewayError::Kind::BudgetExhausted) throw;
                return {std::nullopt, used, std::string("student: ") + e.what()};
            }
        }
        try {
            auto response = m_gateway->client(BackendRole::Generator).generate_image(bundle, attempt);
            return {std::move(response.image), used, {}};
        } catch (const GatewayError& e) {
            if (e.kind() == GatewayError::Kind::BudgetExhausted) throw;
            return {std::nullopt, used, e.what()};
        }
    };
    std::vector<Draw> draws(static_cast<std::size_t>(options.k));
    if (options.workers > 1) {
        std::vector<std::future<Draw>> futures;
        for (int a = 0; a < options.k; ++a) futures.push_back(std::async(std::launch::async, draw, a));
        std::exception_ptr error;
        for (int a = 0; a < options.k; ++a) {
            try {
                draws[static_cast<std::size_t>(a)] = futures[static_cast<std::size_t>(a)].get();
            } catch (...) {
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (int a = 0; a < options.k; ++a) draws[static_cast<std::size_t>(a)] = draw(a);
    }
    outcome.timings["generate"] = ms_since(t_generate);

    // Stage 3: metrics against the query label at the generator's resolution.
    const auto t_metrics = Clock::now();
    const auto label = m_loader(ImagePart{SlotRole::QueryLabel, triple.query_label->path, nullptr});
    std::optional<ImageBuffer> resized_label;
    for (int a = 0; a < options.k; ++a) {
        Draw& d = draws[static_cast<std::size_t>(a)];
        CandidateResult c;
        c.attempt = a;
        c.prompt_used = d.prompt_id;
        if (!d.image) {
            c.failure = d.failure.empty() ? "no image" : d.failure;
            outcome.candidates.push_back(std::move(c));
            continue;
        }
        const ImageBuffer& img = *d.image;
        const ImageBuffer* reference = label.get();
        if (img.width() != label->width() || img.height() != label->height()) {
            if (!resized_label || resized_label->width() != img.width() || resized_label->height() != img.height())
                resized_label = resize_bilinear(*label, img.width(), img.height());
            reference = &*resized_label;
        }
        const MetricResult m = score_candidate(*reference, img, options.channel_policy);
        c.psnr = m.psnr;
        c.ssim = m.ssim;
        c.image = m_store->save_candidate_image(options.mode, triple.sample_id, a, img);
        outcome.metric_resolution = std::to_string(img.width()) + "x" + std::to_string(img.height());
        outcome.candidates.push_back(std::move(c));
    }
    outcome.timings["metrics"] = ms_since(t_metrics);

    outcome.selected = select_best(outcome.candidates);
    if (!outcome.selected) {
        outcome.status = OutcomeStatus::Failed;
        outcome.failure = "all " + std::to_string(options.k) + " generator attempts failed";
        return outcome;
    }

    // Stage 4: VIEScore for the selected candidate (or all of them).
    const auto t_vie = Clock::now();
    if (m_gateway->has(BackendRole::Evaluator)) {
        VieScorer scorer(*m_engine, m_gateway->client(BackendRole::Evaluator), m_loader);
        for (auto& c : outcome.candidates) {
            if (c.failed() || (!options.vie_all && c.attempt != *outcome.selected)) continue;
            try {
                c.vie = scorer.evaluate_output(*draws[static_cast<std::size_t>(c.attempt)].image, triple,
                                               outcome.instruction);
            } catch (const Error& e) {
                c.vie_error = e.what();
            }
        }
    }
    outcome.timings["vie"] = ms_since(t_vie);
    return outcome;
}

PairRun Runner::run_pair(const DatasetDescriptor& descriptor, const TaskPair& pair, std::size_t n, std::uint64_t seed,
                         const RunOptions& options) {
    const DatasetDescriptor split =
        descriptor.count(Split::Unsplit) > 0 ? split_dataset(descriptor, seed) : descriptor;
    const auto triples = sample_triples(split, pair, n, seed);

    std::map<std::string, SampleOutcome> done;
    for (auto& o : m_store->load_outcomes(m_engine->catalog()))
        if (o.mode == options.mode) done.insert_or_assign(o.sample_id, std::move(o));

    enum class Slot { Waiting, Ready, Parked, Stopped, Resumed };
    std::vector<Slot> slots(triples.size(), Slot::Waiting);
    std::vector<std::optional<SampleOutcome>> results(triples.size());
    PairRun run;
    for (std::size_t i = 0; i < triples.size(); ++i)
        if (auto it = done.find(triples[i].sample_id); it != done.end()) {
            slots[i] = Slot::Resumed;
            results[i] = it->second;
            ++run.resumed;
        }

    std::mutex mutex;
    std::size_t flushed = 0;
    bool halted = false;
    std::exception_ptr error;
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> next{0};

    // Commits finished samples in sampling order so the store does not depend
    // on thread scheduling. Caller holds the mutex.
    auto flush = [&] {
        while (!halted && flushed < slots.size()) {
            const Slot s = slots[flushed];
            if (s == Slot::Waiting) return;
            if (s == Slot::Stopped) {
                halted = true;
                return;
            }
            if (s == Slot::Ready) m_store->append_outcome(*results[flushed]);
            ++flushed;
        }
    };

    auto worker = [&] {
        while (!stop) {
            const std::size_t i = next++;
            if (i >= triples.size()) return;
            if (slots[i] == Slot::Resumed) {
                std::lock_guard lock(mutex);
                flush();
                continue;
            }
            Slot state;
            std::optional<SampleOutcome> outcome;
            try {
                outcome = run_sample(triples[i], options);
                state = outcome ? Slot::Ready : Slot::Parked;
            } catch (const GatewayError& e) {
                if (e.kind() != GatewayError::Kind::BudgetExhausted) throw;
                std::lock_guard lock(mutex);
                run.truncated = true;
                run.truncation_reason = e.what();
                state = Slot::Stopped;
                stop = true;
            } catch (...) {
                std::lock_guard lock(mutex);
                if (!error) error = std::current_exception();
                state = Slot::Stopped;
                stop = true;
            }
            std::lock_guard lock(mutex);
            slots[i] = state;
            results[i] = std::move(outcome);
            flush();
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(options.workers, triples.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    {
        std::lock_guard lock(mutex);
        flush();
    }
    if (run.truncated)
        m_store->append_marker({{"marker", "truncated"},
                                {"pair", pair.key()},
                                {"mode", to_string(options.mode)},
                                {"reason", run.truncation_reason}});

    for (std::size_t i = 0; i < triples.size(); ++i) {
        if (i >= flushed && slots[i] != Slot::Resumed) continue;
        if (slots[i] == Slot::Parked) run.pending_review.push_back(triples[i].sample_id);
        if (slots[i] == Slot::Ready) ++run.executed;
        if (results[i]) run.outcomes.push_back(std::move(*results[i]));
    }
    return run;
}

PromptRecord Runner::review_prompt(const std::string& sample_id, const std::optional<std::string>& edited_text,
                                   bool allow_leaky) {
    const fs::path pending_path = m_store->pending_review_path(sample_id);
    if (!fs::exists(pending_path)) throw Error("sample '" + sample_id + "' is not waiting for review");
    const json pending = json::parse(util::read_file(pending_path));
    PromptRecord record = PromptRecord::from_json(pending.at("record"), m_engine->catalog());
    const std::string original = record.text();

    if (edited_text) {
        record.set_text(*edited_text, m_engine->catalog());
        if (record.lint().status == LintStatus::Empty ||
            (record.lint().status == LintStatus::Leaky && !allow_leaky))
            throw LeakyPromptError(record.lint());
    }
    const bool edited = edited_text && *edited_text != original;
    const std::string action = edited ? "edited" : "approved";
    util::write_file_atomic(m_store->approved_review_path(sample_id),
                            json{{"sample_id", sample_id}, {"action", action}, {"allow_leaky", allow_leaky},
                                 {"record", record.to_json()}}
                                    .dump(2) +
                                "\n");
    m_store->append_audit({{"sample_id", sample_id},
                           {"action", action},
                           {"original_text", original},
                           {"final_text", record.text()},
                           {"lint", to_string(record.lint().status)}});
    fs::remove(pending_path);
    return record;
}

}  // namespace vicl
