// Copyright (C) 2026 The vicl Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 error, 2 a check failed
// (leaky prompt, invalid training set, lint violations in a run).

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vicl/corpus.hpp"
#include "vicl/distill_export.hpp"
#include "vicl/diversity_filter.hpp"
#include "vicl/iqa_metrics.hpp"
#include "vicl/model_gateway.hpp"
#include "vicl/prompt_engine.hpp"
#include "vicl/reporting.hpp"
#include "vicl/run_config.hpp"
#include "vicl/task_catalog.hpp"
#include "vicl/util.hpp"
#include "vicl/vicl_runner.hpp"
#include "vicl/vie_score.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vicl;

namespace {

struct Context {
    std::string config_path;
    RunConfig config = RunConfig::mock();
    std::optional<TaskCatalog> catalog;
    std::optional<PromptEngine> engine;

    void load() {
        if (!config_path.empty()) config = RunConfig::load(config_path);
        catalog = config.catalog ? TaskCatalog::load(*config.catalog) : TaskCatalog::builtin();
        engine.emplace(*catalog, config.templates ? TemplateSet::load(*config.templates) : TemplateSet::builtin());
    }

    fs::path manifest(const std::string& override_path) const {
        if (!override_path.empty()) return override_path;
        if (!config.manifest) throw Error("no manifest: set \"manifest\" in the config or pass --manifest");
        return *config.manifest;
    }

    fs::path run_dir(const std::string& run_id) const {
        if (run_id.empty() || util::sanitize_component(run_id) != run_id)
            throw Error("run id '" + run_id + "' must be a plain file name");
        return config.run_root / run_id;
    }
};

std::vector<json> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<json> docs;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (util::trim(line).empty()) continue;
        try {
            docs.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string(), n, e.what());
        }
    }
    return docs;
}

void write_jsonl(const fs::path& path, const std::vector<json>& docs) {
    std::string text;
    for (const auto& d : docs) text += d.dump() + "\n";
    util::write_file_atomic(path, text);
}

SampleTriple read_triple(const Context& ctx, const std::string& path, std::size_t index) {
    const auto docs = read_jsonl(path);
    if (index >= docs.size()) throw Error(fmt::format("{} has {} triples, index {} requested", path, docs.size(), index));
    return triple_from_json(docs[index], *ctx.catalog);
}

void print_lint(const LintResult& lint) {
    fmt::print("{}\n", to_string(lint.status));
    for (const auto& m : lint.matches) fmt::print("  {} ({}) at byte {}\n", m.lexeme, m.task, m.offset);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-task visual in-context learning toolkit"};
    app.require_subcommand(1);
    Context ctx;
    app.add_option("--config", ctx.config_path, "Run configuration (JSON); defaults to all-mock backends");
    int exit_code = 0;

    // ------------------------------------------------------------ catalog
    auto* catalog_cmd = app.add_subcommand("catalog", "Inspect the task catalog");
    catalog_cmd->require_subcommand(1);
    catalog_cmd->add_subcommand("list", "List tasks")->callback([&] {
        for (const auto& t : ctx.catalog->list_tasks())
            fmt::print("{:<20} {:<20} {}\n", t.id, t.display_name, to_string(t.category));
    });
    std::string relation;
    auto* pairs_cmd = catalog_cmd->add_subcommand("pairs", "List ordered task pairs");
    pairs_cmd->add_option("--relation", relation, "intra or inter");
    pairs_cmd->callback([&] {
        std::optional<PairRelation> filter;
        if (!relation.empty()) filter = parse_relation(relation);
        for (const auto& p : ctx.catalog->enumerate_pairs(filter)) fmt::print("{} {}\n", p.key(), to_string(p.relation));
    });

    // ------------------------------------------------------------ corpus
    auto* corpus_cmd = app.add_subcommand("corpus", "Manifests, splits and sampling");
    corpus_cmd->require_subcommand(1);
    std::string manifest_opt, out_opt, pair_opt;
    std::uint64_t seed = 0;
    std::vector<CLI::Option*> seed_opts;  // the config seed applies when none is given
    std::size_t n = 1;

    auto* validate_cmd = corpus_cmd->add_subcommand("validate", "Load a manifest and print counts");
    validate_cmd->add_option("--manifest", manifest_opt);
    validate_cmd->callback([&] {
        const auto desc = load_manifest(ctx.manifest(manifest_opt), *ctx.catalog);
        for (const auto& [task, pairs] : desc.tasks)
            fmt::print("{:<20} pairs={} train={} test={} unsplit={}\n", task, pairs.size(),
                       desc.count(task, Split::Train), desc.count(task, Split::Test),
                       desc.count(task, Split::Unsplit));
        fmt::print("total {}\n", desc.pair_count());
    });

    auto* split_cmd = corpus_cmd->add_subcommand("split", "Assign a 70/30 train/test split");
    split_cmd->add_option("--manifest", manifest_opt);
    seed_opts.push_back(split_cmd->add_option("--seed", seed));
    split_cmd->add_option("--out", out_opt, "Output manifest")->required();
    split_cmd->callback([&] {
        const auto desc = split_dataset(load_manifest(ctx.manifest(manifest_opt), *ctx.catalog), seed);
        write_manifest(desc, out_opt);
        fmt::print("train {} test {}\n", desc.count(Split::Train), desc.count(Split::Test));
    });

    auto* sample_cmd = corpus_cmd->add_subcommand("sample", "Draw cross-task triples as JSONL");
    sample_cmd->add_option("--manifest", manifest_opt);
    sample_cmd->add_option("--pair", pair_opt, "source:target")->required();
    sample_cmd->add_option("--n", n)->required();
    seed_opts.push_back(sample_cmd->add_option("--seed", seed));
    sample_cmd->add_option("--out", out_opt, "Output file (default stdout)");
    sample_cmd->callback([&] {
        auto desc = load_manifest(ctx.manifest(manifest_opt), *ctx.catalog);
        if (desc.count(Split::Unsplit) > 0) desc = split_dataset(desc, seed);
        std::vector<json> docs;
        for (const auto& t : sample_triples(desc, ctx.catalog->parse_pair(pair_opt), n, seed)) docs.push_back(to_json(t));
        if (out_opt.empty())
            for (const auto& d : docs) fmt::print("{}\n", d.dump());
        else
            write_jsonl(out_opt, docs);
    });

    int pairs_per_task = 6;
    auto* synth_cmd = corpus_cmd->add_subcommand("synth", "Write a small synthetic paired corpus");
    synth_cmd->add_option("--out", out_opt, "Output directory")->required();
    synth_cmd->add_option("--pairs-per-task", pairs_per_task);
    seed_opts.push_back(synth_cmd->add_option("--seed", seed));
    synth_cmd->callback([&] { fmt::print("{}\n", write_synthetic_corpus(out_opt, *ctx.catalog, pairs_per_task, seed).string()); });

    // ------------------------------------------------------------ prompt
    auto* prompt_cmd = app.add_subcommand("prompt", "Render, lint and harvest prompts");
    prompt_cmd->require_subcommand(1);
    std::string kind_opt = "fixed", triples_opt, text_opt, file_opt;
    std::size_t index = 0;
    bool allow_leaky = false;

    auto* render_cmd = prompt_cmd->add_subcommand("render", "Print a prompt bundle in wire form");
    render_cmd->add_option("--kind", kind_opt, "fixed, teacher, student or deployment");
    render_cmd->add_option("--triples", triples_opt, "JSONL from corpus sample")->required();
    render_cmd->add_option("--index", index);
    render_cmd->add_option("--implicit", text_opt, "Implicit description (deployment)");
    render_cmd->add_flag("--allow-leaky", allow_leaky);
    render_cmd->callback([&] {
        const SampleTriple triple = read_triple(ctx, triples_opt, index);
        PromptBundle bundle;
        switch (parse_prompt_kind(kind_opt)) {
        case PromptKind::FixedBaseline: bundle = ctx.engine->build_fixed_prompt(triple); break;
        case PromptKind::TeacherElicitation: bundle = ctx.engine->build_teacher_prompt(triple); break;
        case PromptKind::StudentOpenEnded: bundle = ctx.engine->build_student_prompt(triple); break;
        case PromptKind::Deployment:
            bundle = ctx.engine->build_deployment_prompt(
                triple, PromptRecord("cli", text_opt, triple.pair, triple.sample_id, PromptGenerator::Human, *ctx.catalog),
                allow_leaky);
            break;
        }
        fmt::print("{}\n", to_wire(bundle).dump(2));
    });

    auto* lint_cmd = prompt_cmd->add_subcommand("lint", "Check a description for task names");
    lint_cmd->add_option("--pair", pair_opt, "source:target; omit to check every task");
    lint_cmd->add_option("--text", text_opt);
    lint_cmd->add_option("--file", file_opt);
    lint_cmd->callback([&] {
        const std::string text = file_opt.empty() ? text_opt : util::read_file(file_opt);
        const LintResult lint = pair_opt.empty() ? lint_against_all(text, *ctx.catalog)
                                                 : ctx.engine->lint(text, ctx.catalog->parse_pair(pair_opt));
        print_lint(lint);
        if (!lint.clean()) exit_code = 2;
    });

    std::string role_opt = "teacher";
    auto* harvest_cmd = prompt_cmd->add_subcommand("harvest", "Collect implicit descriptions for triples");
    harvest_cmd->add_option("--triples", triples_opt)->required();
    harvest_cmd->add_option("--out", out_opt, "PromptRecord JSONL")->required();
    harvest_cmd->add_option("--role", role_opt, "teacher or student");
    harvest_cmd->callback([&] {
        Gateway gateway(ctx.config.backends);
        const bool teacher = role_opt == "teacher";
        if (!teacher && role_opt != "student") throw Error("--role must be teacher or student");
        const auto loader = preprocessing_loader();
        std::vector<json> docs;
        std::size_t leaky = 0;
        for (const auto& doc : read_jsonl(triples_opt)) {
            SampleTriple triple = triple_from_json(doc, *ctx.catalog);
            if (!teacher) triple.query_label.reset();
            PromptBundle bundle =
                teacher ? ctx.engine->build_teacher_prompt(triple) : ctx.engine->build_student_prompt(triple);
            auto response = gateway.client(teacher ? BackendRole::Teacher : BackendRole::Student)
                                .complete_text(bind_images(std::move(bundle), loader));
            PromptRecord record(triple.sample_id + "/" + role_opt, response.text, triple.pair, triple.sample_id,
                                teacher ? PromptGenerator::Teacher : PromptGenerator::Student, *ctx.catalog);
            leaky += !record.lint().clean();
            docs.push_back(record.to_json());
        }
        write_jsonl(out_opt, docs);
        fmt::print("{} records, {} failing lint\n", docs.size(), leaky);
    });

    // ------------------------------------------------------------ filter
    auto* filter_cmd = app.add_subcommand("filter", "Diversity filtering");
    filter_cmd->require_subcommand(1);
    std::string in_opt;
    double threshold = kDefaultClusterThreshold;
    std::size_t cap = kDefaultKeepPerPair;
    auto* dedup_cmd = filter_cmd->add_subcommand("dedup", "Cluster near-duplicate descriptions per pair");
    dedup_cmd->add_option("--in", in_opt)->required();
    dedup_cmd->add_option("--out", out_opt)->required();
    dedup_cmd->add_option("--threshold", threshold);
    dedup_cmd->add_option("--cap", cap, "Representatives kept per pair");
    dedup_cmd->callback([&] {
        Gateway gateway(ctx.config.backends);
        std::map<std::string, std::vector<PromptRecord>> by_pair;
        for (const auto& doc : read_jsonl(in_opt)) {
            PromptRecord r = PromptRecord::from_json(doc, *ctx.catalog);
            by_pair[r.pair().key()].push_back(std::move(r));
        }
        ModelClient* embedder = gateway.has(BackendRole::Embedder) ? &gateway.client(BackendRole::Embedder) : nullptr;
        std::vector<json> docs;
        for (auto& [key, records] : by_pair) {
            const std::size_t before = records.size();
            auto result = deduplicate(std::move(records), embedder, threshold, cap);
            fmt::print("{}: {} records, {} clusters, {} kept\n", key, before, result.clusters.size(), result.kept.size());
            for (const auto& r : result.kept) docs.push_back(r.to_json());
        }
        write_jsonl(out_opt, docs);
    });

    // ------------------------------------------------------------ distill
    auto* distill_cmd = app.add_subcommand("distill", "Student training data");
    distill_cmd->require_subcommand(1);
    std::string records_opt;
    auto* export_cmd = distill_cmd->add_subcommand("export", "Write training instances");
    export_cmd->add_option("--records", records_opt)->required();
    export_cmd->add_option("--triples", triples_opt)->required();
    export_cmd->add_option("--out", out_opt)->required();
    export_cmd->add_option("--cap", cap);
    export_cmd->callback([&] {
        std::vector<PromptRecord> records;
        for (const auto& doc : read_jsonl(records_opt)) records.push_back(PromptRecord::from_json(doc, *ctx.catalog));
        std::vector<SampleTriple> triples;
        for (const auto& doc : read_jsonl(triples_opt)) triples.push_back(triple_from_json(doc, *ctx.catalog));
        const auto summary = export_training_set(records, triples, *ctx.engine, out_opt, cap);
        fmt::print("{}\n", summary.to_json().dump(2));
    });
    auto* validate_ts_cmd = distill_cmd->add_subcommand("validate", "Check a training file");
    validate_ts_cmd->add_option("--in", in_opt)->required();
    validate_ts_cmd->callback([&] {
        const auto report = validate_training_set(in_opt, *ctx.catalog);
        for (const auto& v : report.violations) fmt::print("line {}: {}\n", v.line, v.message);
        fmt::print("{} instances, {} violations\n", report.instances, report.violations.size());
        if (!report.clean()) exit_code = 2;
    });

    // ------------------------------------------------------------ iqa / vie
    auto* iqa_cmd = app.add_subcommand("iqa", "Pixel metrics");
    iqa_cmd->require_subcommand(1);
    std::string reference_opt, candidate_opt, policy_opt = "luma";
    auto* score_cmd = iqa_cmd->add_subcommand("score", "PSNR and SSIM of a candidate against a reference");
    score_cmd->add_option("--reference", reference_opt)->required();
    score_cmd->add_option("--candidate", candidate_opt)->required();
    score_cmd->add_option("--channels", policy_opt, "luma or rgb");
    score_cmd->callback([&] {
        if (policy_opt != "luma" && policy_opt != "rgb") throw Error("--channels must be luma or rgb");
        const auto policy = policy_opt == "luma" ? ChannelPolicy::LuminanceOnly : ChannelPolicy::MeanOverRGB;
        fmt::print("{}\n", score_candidate(load_png(reference_opt), load_png(candidate_opt), policy).to_json().dump(2));
    });

    auto* vie_cmd = app.add_subcommand("vie", "VIEScore");
    vie_cmd->require_subcommand(1);
    std::string image_opt;
    auto* vie_score_cmd = vie_cmd->add_subcommand("score", "Score a synthesized image for a triple");
    vie_score_cmd->add_option("--triples", triples_opt)->required();
    vie_score_cmd->add_option("--index", index);
    vie_score_cmd->add_option("--image", image_opt)->required();
    vie_score_cmd->add_option("--instruction", text_opt)->required();
    vie_score_cmd->callback([&] {
        Gateway gateway(ctx.config.backends);
        VieScorer scorer(*ctx.engine, gateway.client(BackendRole::Evaluator));
        const auto result = scorer.evaluate_output(load_png(image_opt), read_triple(ctx, triples_opt, index), text_opt);
        fmt::print("{}\n", result.to_json().dump(2));
    });

    // ------------------------------------------------------------ run
    auto* run_cmd = app.add_subcommand("run", "Inference runs");
    run_cmd->require_subcommand(1);
    std::string run_id = "default";
    RunOptions run_options;
    bool fixed_prompt = false;
    std::string workers_opt;
    auto* run_pair_cmd = run_cmd->add_subcommand("pair", "Run one task pair");
    run_pair_cmd->add_option("--pair", pair_opt, "source:target")->required();
    run_pair_cmd->add_option("--n", n, "Number of samples")->required();
    run_pair_cmd->add_option("--k", run_options.k, "Generator attempts per sample");
    seed_opts.push_back(run_pair_cmd->add_option("--seed", seed));
    run_pair_cmd->add_option("--run-id", run_id);
    run_pair_cmd->add_option("--manifest", manifest_opt);
    run_pair_cmd->add_option("--workers", workers_opt);
    run_pair_cmd->add_flag("--fixed-prompt", fixed_prompt, "Use the fixed baseline prompt");
    run_pair_cmd->add_flag("--review", run_options.review, "Pause each sample for prompt review");
    run_pair_cmd->add_flag("--vie-all", run_options.vie_all, "Score every candidate with VIEScore");
    run_pair_cmd->add_flag("--resample-prompt", run_options.resample_prompt,
                           "Ask the student for a new description on every attempt");
    run_pair_cmd->add_flag("--allow-leaky", run_options.allow_leaky);
    run_pair_cmd->callback([&] {
        run_options.mode = fixed_prompt ? RunMode::FixedBaseline : RunMode::Ours;
        run_options.workers = workers_opt.empty() ? ctx.config.workers : std::stoul(workers_opt);
        const auto start = std::chrono::steady_clock::now();
        const auto desc = load_manifest(ctx.manifest(manifest_opt), *ctx.catalog);
        Gateway gateway(ctx.config.backends);
        RunStore store(ctx.run_dir(run_id));
        Runner runner(*ctx.engine, gateway, store);
        const PairRun run = runner.run_pair(desc, ctx.catalog->parse_pair(pair_opt), n, seed, run_options);

        std::size_t failed = 0, leaks = 0;
        for (const auto& o : run.outcomes) {
            failed += o.status == OutcomeStatus::Failed;
            leaks += o.implicit_prompt && !o.implicit_prompt->lint().clean();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fmt::print("run {} {} mode={} outcomes={} executed={} resumed={} failed={} lint_leaks={} ({:.2f} s)\n", run_id,
                   pair_opt, to_string(run_options.mode), run.outcomes.size(), run.executed, run.resumed, failed,
                   leaks, secs);
        for (const auto& sid : run.pending_review) fmt::print("pending review: {}\n", sid);
        if (run.truncated) fmt::print("truncated: {}\n", run.truncation_reason);
        if (leaks) exit_code = 2;
    });

    std::string sample_opt, edit_opt;
    auto* review_cmd = run_cmd->add_subcommand("review", "Approve or edit a parked student description");
    review_cmd->add_option("--run-id", run_id);
    review_cmd->add_option("--sample", sample_opt)->required();
    review_cmd->add_option("--edit", edit_opt, "Replacement text; omit to approve as is");
    review_cmd->add_flag("--allow-leaky", allow_leaky);
    review_cmd->callback([&] {
        Gateway gateway(ctx.config.backends);
        RunStore store(ctx.run_dir(run_id));
        Runner runner(*ctx.engine, gateway, store);
        std::optional<std::string> edit;
        if (review_cmd->count("--edit")) edit = edit_opt;
        try {
            const PromptRecord r = runner.review_prompt(sample_opt, edit, allow_leaky);
            fmt::print("{}: {}\n", r.id(), to_string(r.lint().status));
        } catch (const LeakyPromptError& e) {
            fmt::print("rejected: {}\n", e.what());
            exit_code = 2;
        }
    });

    // ------------------------------------------------------------ report
    std::string format_opt = "md";
    auto* report_cmd = app.add_subcommand("report", "Fixed vs student comparison for a run");
    report_cmd->add_option("--run-id", run_id);
    report_cmd->add_option("--format", format_opt, "md or csv");
    report_cmd->callback([&] {
        if (format_opt != "md" && format_opt != "csv") throw Error("--format must be md or csv");
        const fs::path dir = ctx.run_dir(run_id);
        if (!fs::exists(dir / "outcomes.jsonl")) throw Error("no outcomes under " + dir.string());
        RunStore store(dir);
        const Comparison c = report_store(store, *ctx.catalog, ctx.config.tiers);
        const std::string& body = format_opt == "md" ? c.markdown : c.csv;
        util::write_file_atomic(dir / (format_opt == "md" ? "report.md" : "report.csv"), body);
        fmt::print("{}", body);
        for (const auto& w : c.warnings) fmt::print(stderr, "warning: {}\n", w);
    });

    try {
        app.parse_complete_callback([&] {
            ctx.load();
            if (std::none_of(seed_opts.begin(), seed_opts.end(), [](CLI::Option* o) { return o->count() > 0; }))
                seed = ctx.config.seed;
        });
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return exit_code;
}
