#pragma once
// End-to-end orchestration: index -> retrieve -> generate -> (debate) ->
// eval, with a machine-readable run manifest. Deterministic outputs are
// digested into the manifest; wall-clock data (call log, timings, eval
// report) is written as volatile sidecars so the manifest itself is byte-
// reproducible across runs.

#include "hcag/eval.hpp"
#include "hcag/generation.hpp"
#include "hcag/mock_backend.hpp"

namespace hcag {

struct RunConfig {
    fs::path repo;
    std::string query;
    fs::path out_dir;
    std::string backend_id = "mock";
    std::uint64_t seed = 0;
    IgnoreConfig ignore;
    AbstractionConfig abstraction;
    RetrievalConfig retrieval;
    GenerationLimits generation;
    DebateConfig debate;
    std::optional<fs::path> golden_dir;
    EvalHooks hooks;
};

struct RunResult {
    KnowledgeBase kb;
    RetrievalTrace trace;
    GeneratedArtifact artifact;
    json manifest;
    std::optional<EvalReport> eval;
};

inline void write_artifact_files(const fs::path& dir, const GeneratedArtifact& artifact) {
    for (const auto& [rel, content] : artifact.files) write_text_atomic(dir / rel, content);
}

inline RunResult run_pipeline(RunConfig cfg, PortBundle& ports) {
    cfg.retrieval.validate();
    cfg.debate.validate();
    cfg.abstraction.repo_root = cfg.repo.generic_string();
    cfg.abstraction.backend_id = cfg.backend_id;

    RepoTree tree = parse_repository(cfg.repo, cfg.ignore);
    FsContentSource source(cfg.repo);
    auto [kb, build_stats] = build_knowledge_base(tree, cfg.abstraction, *ports.summarizer, source);

    RetrievalPorts rports{*ports.judge, *ports.embedder, *ports.decomposer, *ports.summarizer};
    auto [trace, kb_after] = hierarchical_retrieve(kb, cfg.query, cfg.retrieval, rports, source);

    GenerationPorts gports{*ports.embedder, *ports.judge, *ports.decomposer, *ports.generator};
    GeneratedArtifact artifact =
        scaffold_fill(trace, kb_after, cfg.query, gports, cfg.generation, &source);
    artifact = multi_agent_discussion(std::move(artifact), cfg.debate, ports.critics,
                                      *ports.moderator);

    // The persisted KB is the post-retrieval state, including any on-demand
    // expansions the query triggered.
    save_kb(kb_after, cfg.out_dir / "kb.json");
    write_json_atomic(cfg.out_dir / "trace.json", trace.to_json());
    write_json_atomic(cfg.out_dir / "plan.json", artifact.plan_to_json(cfg.query));
    write_text_atomic(cfg.out_dir / "task.txt", cfg.query + "\n");
    write_artifact_files(cfg.out_dir / "artifact", artifact);

    double at_seconds = ports.log ? ports.log->wall_span_ms() / 1000.0 : 0.0;
    std::optional<EvalReport> eval_report;
    if (cfg.golden_dir) {
        eval_report = evaluate(cfg.out_dir / "artifact", *cfg.golden_dir, cfg.hooks,
                               (cfg.out_dir / "task.txt").string(), at_seconds);
        write_json_atomic(cfg.out_dir / "eval.json", eval_report->to_json());
    }
    if (ports.log) write_json_atomic(cfg.out_dir / "calllog.json", ports.log->to_json());
    write_json_atomic(cfg.out_dir / "timings.json",
                      json{{"at_seconds", at_seconds},
                           {"backend_calls", ports.log ? ports.log->entries().size() : 0}});

    json outputs = json::object();
    auto digest_output = [&](const std::string& rel) {
        outputs[rel] = sha256_hex(read_text_file(cfg.out_dir / rel));
    };
    digest_output("kb.json");
    digest_output("trace.json");
    digest_output("plan.json");
    digest_output("task.txt");
    for (const auto& [rel, content] : artifact.files) outputs["artifact/" + rel] = sha256_hex(content);

    json volatile_outputs = json::array({"calllog.json", "timings.json"});
    if (eval_report) volatile_outputs.push_back("eval.json");

    json manifest{{"command", "run"},
                  {"config", json{{"abstraction", config_to_json(cfg.abstraction)},
                                  {"debate", json{{"num_agents", cfg.debate.num_agents},
                                                  {"rounds", cfg.debate.rounds}}},
                                  {"generation",
                                   json{{"match_threshold", cfg.generation.match_threshold},
                                        {"max_decompose_depth", cfg.generation.max_decompose_depth},
                                        {"output_ext", cfg.generation.output_ext}}},
                                  {"retrieval", cfg.retrieval.to_json()}}},
                  {"inputs", json{{"backend", cfg.backend_id},
                                  {"query", cfg.query},
                                  {"repo", cfg.repo.generic_string()},
                                  {"seed", cfg.seed}}},
                  {"outputs", outputs},
                  {"volatile", volatile_outputs}};
    write_json_atomic(cfg.out_dir / "manifest.json", manifest);

    RunResult result;
    result.kb = std::move(kb_after);
    result.trace = std::move(trace);
    result.artifact = std::move(artifact);
    result.manifest = std::move(manifest);
    result.eval = std::move(eval_report);
    return result;
}

}  // namespace hcag
