// Acceptance suite: one test case per release criterion, each ending with a
// [PASS] line (a failed criterion aborts its case before printing, and the
// framework reports the failure instead).

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>

#include "test_helpers.hpp"

using namespace hcag;
using namespace hcag::testing;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void pass(const std::string& name) { std::cout << "[PASS] " << name << "\n"; }

int run_cli_in_source_dir(const std::string& args) {
    std::string cmd = "cd '" + source_dir().string() + "' && '" + std::string(cli_path()) + "' " +
                      args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("cost-formula oracle: simulator equals analytic costs over the full grid") {
    Stopwatch timer;
    std::int64_t cases = 0;
    for (std::int64_t B : {2, 3, 4}) {
        for (std::int64_t L = 2; L <= 6; ++L) {
            for (std::int64_t C = 1; C <= L; ++C) {
                for (std::int64_t R = 1; R <= 3; ++R) {
                    for (std::int64_t Q = 0; Q <= 20; ++Q) {
                        CostParams p;
                        p.B = B;
                        p.L = L;
                        p.C = C;
                        p.c_a = 2;
                        p.c_c = 1;
                        p.c_j = {1, 2};
                        p.R = R;
                        p.Q = Q;
                        SimulationReport sim = simulate_traversal(p, 2, 1234 + Q);
                        REQUIRE(sim.mean_cost_per_trial == hcag_cost(p).total);
                        REQUIRE(sim.stderr_cost == 0.0);
                        ++cases;
                    }
                }
            }
        }
    }
    REQUIRE(cases == 3LL * (2 + 3 + 4 + 5 + 6) * 3 * 21);
    REQUIRE(timer.seconds() < 10.0);
    pass("cost-formula oracle: exact equality on " + std::to_string(cases) + " grid points in " +
         std::to_string(timer.seconds()) + "s");
}

TEST_CASE("worked threshold: intercept 346, slope 17, flat slope 128, q* = 346/111, Q = 4") {
    CostParams p;
    p.B = 4;
    p.L = 5;
    p.C = 3;
    p.c_a = 2;
    p.c_c = 1;
    p.c_j = {1, 2};
    p.R = 2;

    CostReport h = hcag_cost(p);
    CostReport f = flat_cost(p);
    REQUIRE(h.intercept == Rational(346));
    REQUIRE(h.per_query_slope == Rational(17));
    REQUIRE(f.per_query_slope == Rational(128));

    Threshold t = crossover_threshold(h, f);
    REQUIRE(t.exists);
    REQUIRE(t.q_star == Rational(346, 111));

    // Smallest integer Q with strictly lower HCAG total, by direct evaluation.
    std::int64_t smallest = -1;
    for (std::int64_t q = 0; q <= 10 && smallest < 0; ++q) {
        CostParams pq = p;
        pq.Q = q;
        if (hcag_cost(pq).total < flat_cost(pq).total) smallest = q;
    }
    REQUIRE(smallest == 4);
    pass("worked threshold: I=346 S=17 flat S=128 q*=346/111, first winning Q=4");
}

TEST_CASE("optimal compression depth: worked grid, neighbour consistency, monotone in Q") {
    CostParams p;
    p.B = 4;
    p.L = 5;
    p.C = 3;
    p.c_a = 2;
    p.c_c = 1;
    p.c_j = {1, 2};
    p.R = 2;
    p.Q = 10;

    auto total_at = [&](std::int64_t c) {
        CostParams pc = p;
        pc.C = c;
        return hcag_cost(pc).total;
    };
    REQUIRE(total_at(3) == Rational(516));
    REQUIRE(total_at(4) == Rational(492));
    REQUIRE(total_at(5) == Rational(516));
    OptimalDepth od = optimal_compression_depth(p);
    REQUIRE(od.c_star_integer == 4);
    REQUIRE(od.c_star_continuous > 4.0);
    REQUIRE(od.c_star_continuous < 5.0);
    double closed_form =
        1.0 + std::log(10.0 * 2.0 * 2.0 * 3.0 / ((2.0 - 1.0) * std::log(4.0))) / std::log(4.0);
    REQUIRE(od.c_star_continuous == Catch::Approx(closed_form).epsilon(1e-9));

    for (std::int64_t B : {2, 3, 4}) {
        for (std::int64_t L = 2; L <= 6; ++L) {
            double prev = 0.0;
            for (std::int64_t Q = 1; Q <= 20; ++Q) {
                for (std::int64_t R = 1; R <= 3; ++R) {
                    CostParams g;
                    g.B = B;
                    g.L = L;
                    g.C = 1;
                    g.c_a = 2;
                    g.c_c = 1;
                    g.c_j = {1, 2};
                    g.R = R;
                    g.Q = Q;
                    OptimalDepth grid = optimal_compression_depth(g);
                    double cont = grid.c_star_continuous;
                    if (cont > 1.0 && cont < static_cast<double>(L)) {
                        REQUIRE((grid.c_star_integer ==
                                     static_cast<std::int64_t>(std::floor(cont)) ||
                                 grid.c_star_integer == static_cast<std::int64_t>(std::ceil(cont))));
                    } else {
                        REQUIRE((grid.c_star_integer == 1 || grid.c_star_integer == L));
                    }
                }
                CostParams g;
                g.B = B;
                g.L = L;
                g.C = 1;
                g.c_a = 2;
                g.c_c = 1;
                g.c_j = {1, 2};
                g.R = 2;
                g.Q = Q;
                double cont = optimal_compression_depth(g).c_star_continuous;
                REQUIRE(cont >= prev - 1e-12);
                prev = cont;
            }
        }
    }
    pass("optimal compression depth: C*=4 at total 492, floor/ceil + monotonicity on grid");
}

TEST_CASE("theorem-2 property: expansions affine in (1 - p_gap), zero at p_gap = 1") {
    Stopwatch timer;
    CostParams p;
    p.B = 4;
    p.L = 5;
    p.C = 4;
    p.c_a = 2;
    p.c_c = 1;
    p.c_j = {1, 2};
    p.R = 1;
    p.Q = 3;

    const std::int64_t kTrials = 1000;
    const std::uint64_t kSeed = 20260809;
    std::vector<Rational> gaps = {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4),
                                  Rational(1)};
    std::vector<double> mean(gaps.size()), se(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        CostParams pg = p;
        pg.p_gap = gaps[i];
        SimulationReport sim = simulate_traversal(pg, kTrials, kSeed, true);
        mean[i] = sim.mean_expansions_per_trial;
        se[i] = sim.stderr_expansions;
        if (gaps[i] == Rational(1)) REQUIRE(sim.expansion_events == 0);
    }

    // Line through the endpoints: zero at x = 0 and the measured mean at x = 1.
    double slope = mean[0];  // p_gap = 0 is x = 1
    for (std::size_t i = 1; i + 1 < gaps.size(); ++i) {
        double x = 1.0 - gaps[i].to_double();
        double predicted = slope * x;
        double tolerance = 3.0 * std::sqrt(se[i] * se[i] + x * x * se[0] * se[0]);
        INFO("p_gap=" << gaps[i].str() << " mean=" << mean[i] << " predicted=" << predicted
                      << " tol=" << tolerance);
        REQUIRE(std::abs(mean[i] - predicted) <= tolerance);
    }
    REQUIRE(timer.seconds() < 30.0);
    pass("theorem-2 property: mean expansions affine in (1-p_gap) within 3 stderr, 0 at p_gap=1");
}

TEST_CASE("phase-one call law on perfect trees") {
    for (int B : {2, 3, 4}) {
        for (int L = 2; L <= 5; ++L) {
            for (int C = 1; C <= L; ++C) {
                auto repo = make_perfect_tree(B, L);
                auto ports = make_mock_ports();
                AbstractionConfig cfg;
                cfg.compression_depth = C;
                cfg.retry_base_ms = 0;
                MapContentSource source(repo.files);
                auto [kb, stats] =
                    build_knowledge_base(repo.tree, cfg, *ports.summarizer, source);
                std::int64_t expected = C > 1 ? node_count_at_levels(B, L, 1, C - 1) : 0;
                REQUIRE(stats.summarize_calls == expected);
                for (const auto& [path, node] : kb.nodes)
                    REQUIRE((node.depth < C) == (node.status == NodeStatus::Detailed));
            }
        }
    }
    pass("phase-one call law: summarize calls = (B^(C-1)-1)/(B-1), partition matches depth rule");
}

TEST_CASE("retrieval invariant suite: 500 randomized cases") {
    Stopwatch timer;
    std::mt19937_64 rng(424242);
    const std::vector<int> depths = {2, 3, 4, 6};
    const auto& vocab = vocabulary();

    class CheckingJudge : public JudgePort {
    public:
        explicit CheckingJudge(std::shared_ptr<JudgePort> inner) : inner_(std::move(inner)) {}
        RelevanceVerdict classify(const std::string& q, const std::string& p,
                                  const std::string& a) override {
            REQUIRE(a != kPlaceholderAbstract);
            return inner_->classify(q, p, a);
        }
        bool affirms_related(const std::string& d, const std::string& p,
                             const std::string& a) override {
            return inner_->affirms_related(d, p, a);
        }

    private:
        std::shared_ptr<JudgePort> inner_;
    };

    for (int i = 0; i < 500; ++i) {
        auto repo = make_random_tree(rng);
        int C = 1 + static_cast<int>(rng() % 4);
        int d = depths[rng() % depths.size()];
        std::string query;
        int qwords = 1 + static_cast<int>(rng() % 3);
        for (int w = 0; w < qwords; ++w) query += vocab[rng() % vocab.size()] + " ";

        AbstractionConfig acfg;
        acfg.compression_depth = C;
        acfg.retry_base_ms = 0;
        MapContentSource source(repo.files);
        RetrievalConfig cfg;
        cfg.max_depth = d;

        auto run_once = [&] {
            auto ports = make_mock_ports();
            CheckingJudge judge(ports.judge);
            KnowledgeBase kb =
                build_knowledge_base(repo.tree, acfg, *ports.summarizer, source).first;
            RetrievalPorts rports{judge, *ports.embedder, *ports.decomposer, *ports.summarizer};
            auto [trace, kb_after] = hierarchical_retrieve(kb, query, cfg, rports, source);
            return canonical_json(trace.to_json());
        };
        std::string first = run_once();  // termination == this returns
        std::string second = run_once();
        REQUIRE(first == second);

        json trace = json::parse(first);
        for (const auto& v : trace.at("visited")) {
            std::string id = v.at("task_id").get<std::string>();
            REQUIRE(std::count(id.begin(), id.end(), '.') <= d);
        }
    }
    REQUIRE(timer.seconds() < 60.0);
    pass("retrieval invariants: depth bound, no compressed judgments, termination, determinism "
         "(500 cases in " + std::to_string(timer.seconds()) + "s)");
}

TEST_CASE("expansion idempotence through persistence") {
    RepoTree tree = parse_repository(toy_auction_dir());
    FsContentSource source(toy_auction_dir());
    auto ports = make_mock_ports();
    AbstractionConfig cfg;
    cfg.compression_depth = 3;
    cfg.repo_root = toy_auction_dir().generic_string();
    KnowledgeBase kb = build_knowledge_base(tree, cfg, *ports.summarizer, source).first;

    fs::path dir = fresh_tmp_dir("acceptance_idem");
    auto [kb1, s1] = expand_node(kb, "agents/strategies", cfg, *ports.summarizer, source);
    save_kb(kb1, dir / "one.json");
    KnowledgeBase loaded = load_kb(dir / "one.json");
    auto [kb2, s2] = expand_node(loaded, "agents/strategies", cfg, *ports.summarizer, source);
    save_kb(kb2, dir / "two.json");
    REQUIRE(read_text_file(dir / "one.json") == read_text_file(dir / "two.json"));
    REQUIRE(s2.expansion_calls == 0);
    pass("expansion idempotence: expand -> save -> load -> expand is byte-identical");
}

TEST_CASE("end-to-end golden run reproduces committed outputs exactly") {
    fs::path out = fresh_tmp_dir("acceptance_run");
    int code = run_cli_in_source_dir("run --repo fixtures/toy_auction --query \"buyer bidding "
                                     "strategy\" --backend mock --out '" +
                                     out.string() + "'");
    REQUIRE(code == 0);

    fs::path golden = fixtures_dir() / "golden_run";
    for (const char* name : {"manifest.json", "trace.json", "plan.json"}) {
        INFO(name);
        REQUIRE(read_text_file(out / name) == read_text_file(golden / name));
    }
    json manifest = parse_json_file(out / "manifest.json");
    for (const auto& [rel, digest] : manifest.at("outputs").items())
        REQUIRE(digest.get<std::string>() == sha256_hex(read_text_file(out / rel)));
    REQUIRE(manifest.at("outputs").contains("artifact/__module__.txt"));
    pass("end-to-end golden run: manifest, trace, plan and artifact digests reproduced");
}

TEST_CASE("edit similarity metric: exact value, axioms, oracle agreement") {
    REQUIRE(edit_similarity("kitten", "sitting") == 1.0 - 3.0 / 7.0);

    auto lev_oracle = [](const std::string& a, const std::string& b) {
        std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                                std::vector<std::size_t>(b.size() + 1, 0));
        for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
        for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
        for (std::size_t i = 1; i <= a.size(); ++i)
            for (std::size_t j = 1; j <= b.size(); ++j)
                d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                    d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        return d[a.size()][b.size()];
    };

    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<std::size_t> len(0, 64);
    std::uniform_int_distribution<int> ch('a', 'e');
    for (int i = 0; i < 1000; ++i) {
        std::string a(len(rng), ' '), b(len(rng), ' ');
        for (auto& c : a) c = static_cast<char>(ch(rng));
        for (auto& c : b) c = static_cast<char>(ch(rng));
        double es = edit_similarity(a, b);
        REQUIRE(levenshtein(a, b) == lev_oracle(a, b));
        REQUIRE(es >= 0.0);
        REQUIRE(es <= 1.0);
        REQUIRE(es == edit_similarity(b, a));
        REQUIRE((es == 1.0) == (a == b));
    }
    pass("edit similarity: kitten/sitting = 4/7 exact, axioms + DP oracle on 1000 pairs");
}

TEST_CASE("debate contracts: identity, convergence, newline fixed point") {
    auto ports = make_mock_ports();
    GeneratedArtifact draft;
    draft.files = {{"a.txt", "alpha"}, {"b.txt", "beta\n"}};

    DebateConfig zero;
    zero.num_agents = 1;
    zero.rounds = 0;
    REQUIRE(multi_agent_discussion(draft, zero, ports.critics, *ports.moderator).files ==
            draft.files);

    DebateConfig ten;
    ten.num_agents = 1;
    ten.rounds = 10;
    std::vector<std::string> log;
    GeneratedArtifact unchanged =
        multi_agent_discussion(draft, ten, ports.critics, *ports.moderator, &log);
    REQUIRE(unchanged.files == draft.files);
    REQUIRE(log.size() == 1);

    std::vector<std::shared_ptr<CriticPort>> newline_critics = {
        std::make_shared<TrailingNewlineCritic>()};
    std::vector<std::string> log2;
    GeneratedArtifact fixed =
        multi_agent_discussion(draft, ten, newline_critics, *ports.moderator, &log2);
    for (const auto& [p, c] : fixed.files) REQUIRE(c.back() == '\n');
    REQUIRE(log2.size() <= 2);
    GeneratedArtifact again = multi_agent_discussion(fixed, ten, newline_critics, *ports.moderator);
    REQUIRE(again.files == fixed.files);
    pass("debate contracts: r=0 identity, empty critics converge in 1 round, newline critic "
         "fixed point in <= 2 rounds and idempotent");
}
