// hcag command-line interface: index | query | generate | cost | run | eval.
// Exit codes: 0 success, 1 usage, 2 backend failure, 3 input failure,
// 4 hook failure.

#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hcag/hcag.hpp"

namespace {

using namespace hcag;

PortBundle make_ports(const std::string& backend_id, const MockConfig& mock_cfg,
                      std::size_t num_critics) {
    if (backend_id == "mock") return make_mock_ports(mock_cfg, num_critics);
    if (backend_id == "http") {
        PortBundle b;
        b.backend = std::make_shared<HcagHttpBackend>(HttpEndpointConfig::from_env(),
                                                      std::make_shared<HttplibTransport>());
        b.log = std::make_shared<CallLog>();
        b.summarizer = std::make_shared<BackendSummarizerPort>(b.backend, b.log,
                                                               mock_cfg.context_budget_chars);
        b.judge = std::make_shared<BackendJudgePort>(b.backend, b.log);
        b.decomposer = std::make_shared<BackendDecomposerPort>(b.backend, b.log);
        b.generator = std::make_shared<BackendGeneratorPort>(b.backend, b.log);
        b.embedder = std::make_shared<BackendEmbedderPort>(b.backend, b.log);
        for (std::size_t i = 0; i < num_critics; ++i)
            b.critics.push_back(std::make_shared<BackendCriticPort>(b.backend, b.log));
        b.moderator = std::make_shared<BackendModeratorPort>(b.backend, b.log);
        return b;
    }
    throw Error("unknown backend: " + backend_id + " (expected mock or http)");
}

void maybe_write_log(const PortBundle& ports, const std::string& log_path) {
    if (!log_path.empty() && ports.log) write_json_atomic(log_path, ports.log->to_json());
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(10) << v;
    return ss.str();
}

struct CostSweep {
    std::string axis;  // "C" | "Q" | "p_gap"
    std::string from, to, step;
};

void run_cost(const CostParams& base, const std::optional<CostSweep>& sweep, const fs::path& out,
              std::int64_t trials, std::uint64_t seed, bool force_persistent) {
    std::ostringstream csv;
    csv << "swept_value,hcag_total,flat_total,leaf_only_total,q_star,c_star_int,c_star_cont,p0,"
           "simulated_mean,simulated_stderr\n";

    auto emit_row = [&](const std::string& label, const CostParams& p, bool persistent) {
        CostReport h = hcag_cost(p);
        CostReport f = flat_cost(p);
        CostReport l = leaf_only_cost(p);
        Threshold th = crossover_threshold(h, f);
        CompressionAdvantage ca = compression_advantage_threshold(p);
        SimulationReport sim = simulate_traversal(p, trials, seed, persistent);
        csv << label << "," << fmt(h.total.to_double()) << "," << fmt(f.total.to_double()) << ","
            << fmt(l.total.to_double()) << "," << (th.exists ? fmt(th.q_star.to_double()) : "")
            << ",";
        if (p.B >= 2) {
            OptimalDepth od = optimal_compression_depth(p);
            csv << od.c_star_integer << "," << fmt(od.c_star_continuous);
        } else {
            csv << ",";
        }
        csv << "," << fmt(ca.p0.to_double()) << "," << fmt(sim.mean_cost_per_trial.to_double())
            << "," << fmt(sim.stderr_cost) << "\n";
    };

    if (!sweep) {
        emit_row(std::to_string(base.Q), base, force_persistent);
    } else if (sweep->axis == "C" || sweep->axis == "Q") {
        std::int64_t from = std::stoll(sweep->from), to = std::stoll(sweep->to);
        std::int64_t step = sweep->step.empty() ? 1 : std::stoll(sweep->step);
        if (step < 1) throw Error("sweep step must be >= 1");
        for (std::int64_t v = from; v <= to; v += step) {
            CostParams p = base;
            (sweep->axis == "C" ? p.C : p.Q) = v;
            p.validate();
            emit_row(std::to_string(v), p, force_persistent);
        }
    } else if (sweep->axis == "p_gap") {
        Rational from = Rational::parse(sweep->from), to = Rational::parse(sweep->to);
        Rational step = sweep->step.empty() ? Rational(1, 4) : Rational::parse(sweep->step);
        if (!(Rational(0) < step)) throw Error("sweep step must be positive");
        for (Rational v = from; v <= to; v += step) {
            CostParams p = base;
            p.p_gap = v;
            p.validate();
            emit_row(v.str(), p, true);  // the sparsity study uses persistent expansion
        }
    } else {
        throw Error("unknown sweep axis: " + sweep->axis);
    }
    write_text_atomic(out, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hcag: hierarchical repository abstraction, retrieval and scaffolded generation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string backend_id = "mock";
    std::uint64_t seed = 0;
    std::string log_path;
    app.add_option("--backend", backend_id, "Backend: mock or http")->capture_default_str();
    app.add_option("--seed", seed, "Random seed")->capture_default_str();
    app.add_option("--log", log_path, "Write the backend call log to this path");

    // --- index ---
    auto* index = app.add_subcommand("index", "Build a knowledge base from a repository");
    std::string idx_repo, idx_out;
    AbstractionConfig idx_cfg;
    bool idx_include_hidden = false;
    index->add_option("--repo", idx_repo, "Repository root")->required();
    index->add_option("--out", idx_out, "Output KB path")->required();
    index->add_option("--compress-depth", idx_cfg.compression_depth, "Compression depth C")
        ->capture_default_str();
    index->add_option("--max-summary-chars", idx_cfg.max_summary_chars)->capture_default_str();
    index->add_option("--max-children", idx_cfg.max_children_in_prompt)->capture_default_str();
    index->add_flag("--include-hidden", idx_include_hidden, "Index dot-prefixed entries too");

    // --- query ---
    auto* query = app.add_subcommand("query", "Hierarchical retrieval against a knowledge base");
    std::string q_kb, q_text, q_trace_out;
    RetrievalConfig q_cfg;
    bool q_persist = false;
    query->add_option("--kb", q_kb, "KB path")->required();
    query->add_option("--query", q_text, "Task query")->required();
    query->add_option("--depth", q_cfg.max_depth, "Max retrieval depth d")->capture_default_str();
    query->add_option("--lambda-sem", q_cfg.lambda_sem)->capture_default_str();
    query->add_option("--lambda-struct", q_cfg.lambda_struct)->capture_default_str();
    query->add_option("--fully-threshold", q_cfg.fully_threshold)->capture_default_str();
    query->add_option("--irrelevant-threshold", q_cfg.irrelevant_threshold)->capture_default_str();
    query->add_option("--top-k", q_cfg.top_k_skeletons)->capture_default_str();
    query->add_option("--trace-out", q_trace_out, "Trace output path")->required();
    query->add_flag("--strict-figure2", q_cfg.strict_figure2,
                    "Terminate partially relevant leaves without emitting them");
    query->add_flag("--persist-expansions", q_persist,
                    "Write the expanded KB back atomically");

    // --- generate ---
    auto* gen = app.add_subcommand("generate", "Scaffold-and-fill generation");
    std::string g_kb, g_query, g_out, g_plan_out, g_repo;
    RetrievalConfig g_rcfg;
    GenerationLimits g_limits;
    DebateConfig g_debate;
    gen->add_option("--kb", g_kb)->required();
    gen->add_option("--query", g_query)->required();
    gen->add_option("--depth", g_rcfg.max_depth)->capture_default_str();
    gen->add_option("--agents", g_debate.num_agents)->capture_default_str();
    gen->add_option("--rounds", g_debate.rounds)->capture_default_str();
    gen->add_option("--out", g_out, "Artifact output directory")->required();
    gen->add_option("--plan-out", g_plan_out, "Plan output path")->required();
    gen->add_option("--repo", g_repo, "Repository root for resolving references");
    gen->add_option("--match-threshold", g_limits.match_threshold)->capture_default_str();
    gen->add_option("--max-decompose-depth", g_limits.max_decompose_depth)->capture_default_str();
    gen->add_option("--gen-ext", g_limits.output_ext)->capture_default_str();

    // --- cost ---
    auto* cost = app.add_subcommand("cost", "Analytic + simulated cost model");
    std::string c_params, c_out, c_axis, c_from, c_to, c_step;
    std::int64_t c_trials = 200;
    bool c_persistent = false;
    cost->add_option("--params", c_params, "CostParams JSON file")->required();
    cost->add_option("--out", c_out, "Output CSV path")->required();
    cost->add_option("--sweep", c_axis, "Sweep axis: C, Q or p_gap");
    cost->add_option("--from", c_from);
    cost->add_option("--to", c_to);
    cost->add_option("--step", c_step);
    cost->add_option("--trials", c_trials)->capture_default_str();
    cost->add_flag("--persistent", c_persistent, "Persistent-expansion simulation mode");

    // --- run ---
    auto* run = app.add_subcommand("run", "End-to-end index -> query -> generate -> eval");
    RunConfig run_cfg;
    std::string r_repo, r_out, r_golden, r_cq, r_rpr;
    run->add_option("--repo", r_repo)->required();
    run->add_option("--query", run_cfg.query)->required();
    run->add_option("--out", r_out)->required();
    run->add_option("--compress-depth", run_cfg.abstraction.compression_depth)
        ->capture_default_str();
    run->add_option("--depth", run_cfg.retrieval.max_depth)->capture_default_str();
    run->add_option("--agents", run_cfg.debate.num_agents)->capture_default_str();
    run->add_option("--rounds", run_cfg.debate.rounds)->capture_default_str();
    run->add_option("--golden", r_golden, "Golden directory; enables eval");
    run->add_option("--cq-cmd", r_cq);
    run->add_option("--rpr-cmd", r_rpr);

    // --- eval ---
    auto* ev = app.add_subcommand("eval", "Evaluate an artifact directory against goldens");
    std::string e_artifact, e_golden, e_cq, e_rpr, e_task, e_calllog, e_out;
    ev->add_option("--artifact", e_artifact)->required();
    ev->add_option("--golden", e_golden)->required();
    ev->add_option("--cq-cmd", e_cq);
    ev->add_option("--rpr-cmd", e_rpr);
    ev->add_option("--task-file", e_task);
    ev->add_option("--calllog", e_calllog, "Call log for the AT metric");
    ev->add_option("--out", e_out, "Report output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*index) {
            idx_cfg.backend_id = backend_id;
            idx_cfg.repo_root = idx_repo;
            idx_cfg.validate();
            IgnoreConfig ignore;
            ignore.skip_hidden = !idx_include_hidden;
            PortBundle ports = make_ports(backend_id, MockConfig{}, 1);
            RepoTree tree = parse_repository(idx_repo, ignore);
            FsContentSource source{fs::path(idx_repo)};
            auto [kb, stats] = build_knowledge_base(tree, idx_cfg, *ports.summarizer, source);
            save_kb(kb, idx_out);
            maybe_write_log(ports, log_path);
            std::cout << "indexed " << kb.nodes.size() << " nodes (" << stats.detailed_count
                      << " detailed, " << stats.compressed_count << " compressed, "
                      << stats.summarize_calls << " summarize calls) -> " << idx_out << "\n";
        } else if (*query) {
            q_cfg.validate();
            MockConfig mc;
            mc.fully_threshold = q_cfg.fully_threshold;
            mc.irrelevant_threshold = q_cfg.irrelevant_threshold;
            PortBundle ports = make_ports(backend_id, mc, 1);
            KnowledgeBase kb = load_kb(q_kb);
            FsContentSource source{fs::path(kb.build_config.repo_root)};
            RetrievalPorts rports{*ports.judge, *ports.embedder, *ports.decomposer,
                                  *ports.summarizer};
            auto [trace, kb_after] = hierarchical_retrieve(kb, q_text, q_cfg, rports, source);
            write_json_atomic(q_trace_out, trace.to_json());
            if (q_persist && !trace.expansions.empty()) save_kb(kb_after, q_kb);
            maybe_write_log(ports, log_path);
            std::cout << "visited " << trace.visited.size() << " nodes, " << trace.results.size()
                      << " results, " << trace.expansions.size() << " expansions -> "
                      << q_trace_out << "\n";
        } else if (*gen) {
            g_rcfg.validate();
            g_debate.validate();
            MockConfig mc;
            mc.fully_threshold = g_rcfg.fully_threshold;
            mc.irrelevant_threshold = g_rcfg.irrelevant_threshold;
            PortBundle ports =
                make_ports(backend_id, mc, static_cast<std::size_t>(g_debate.num_agents));
            KnowledgeBase kb = load_kb(g_kb);
            std::string repo_root = g_repo.empty() ? kb.build_config.repo_root : g_repo;
            FsContentSource source{fs::path(repo_root)};
            RetrievalPorts rports{*ports.judge, *ports.embedder, *ports.decomposer,
                                  *ports.summarizer};
            auto [trace, kb_after] = hierarchical_retrieve(kb, g_query, g_rcfg, rports, source);
            GenerationPorts gports{*ports.embedder, *ports.judge, *ports.decomposer,
                                   *ports.generator};
            GeneratedArtifact artifact =
                scaffold_fill(trace, kb_after, g_query, gports, g_limits, &source);
            artifact = multi_agent_discussion(std::move(artifact), g_debate, ports.critics,
                                              *ports.moderator);
            write_artifact_files(g_out, artifact);
            write_json_atomic(g_plan_out, artifact.plan_to_json(g_query));
            maybe_write_log(ports, log_path);
            std::cout << "generated " << artifact.files.size() << " files -> " << g_out << "\n";
        } else if (*cost) {
            CostParams params = CostParams::from_json(parse_json_file(c_params));
            std::optional<CostSweep> sweep;
            if (!c_axis.empty()) {
                if (c_from.empty() || c_to.empty()) throw Error("--sweep needs --from and --to");
                sweep = CostSweep{c_axis, c_from, c_to, c_step};
            }
            run_cost(params, sweep, c_out, c_trials, seed, c_persistent);
            std::cout << "cost table -> " << c_out << "\n";
        } else if (*run) {
            run_cfg.repo = r_repo;
            run_cfg.out_dir = r_out;
            run_cfg.backend_id = backend_id;
            run_cfg.seed = seed;
            if (!r_golden.empty()) run_cfg.golden_dir = fs::path(r_golden);
            if (!r_cq.empty()) run_cfg.hooks.cq_cmd = r_cq;
            if (!r_rpr.empty()) run_cfg.hooks.rpr_cmd = r_rpr;
            MockConfig mc;
            mc.fully_threshold = run_cfg.retrieval.fully_threshold;
            mc.irrelevant_threshold = run_cfg.retrieval.irrelevant_threshold;
            PortBundle ports =
                make_ports(backend_id, mc, static_cast<std::size_t>(run_cfg.debate.num_agents));
            RunResult result = run_pipeline(run_cfg, ports);
            std::cout << "run complete: " << result.artifact.files.size() << " files, "
                      << result.trace.results.size() << " retrieved, manifest -> "
                      << (run_cfg.out_dir / "manifest.json").string() << "\n";
        } else if (*ev) {
            EvalHooks hooks;
            if (!e_cq.empty()) hooks.cq_cmd = e_cq;
            if (!e_rpr.empty()) hooks.rpr_cmd = e_rpr;
            double at_seconds = 0.0;
            if (!e_calllog.empty()) {
                json log = parse_json_file(e_calllog);
                for (const auto& entry : log.at("entries"))
                    at_seconds += entry.at("wall_ms").get<double>() / 1000.0;
            }
            EvalReport report = evaluate(e_artifact, e_golden, hooks, e_task, at_seconds);
            if (e_out.empty()) std::cout << canonical_json(report.to_json());
            else {
                write_json_atomic(e_out, report.to_json());
                std::cout << "eval report -> " << e_out << "\n";
            }
        }
    } catch (const HookFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const BackendFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
