#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace hcag;
using namespace hcag::testing;

namespace {

AbstractionConfig fast_cfg(int C) {
    AbstractionConfig cfg;
    cfg.compression_depth = C;
    cfg.retry_base_ms = 0;
    return cfg;
}

struct ToyBuild {
    KnowledgeBase kb;
    AbstractionStats stats;
    PortBundle ports;
};

ToyBuild build_toy(int C) {
    ToyBuild out{.kb = {}, .stats = {}, .ports = make_mock_ports()};
    RepoTree tree = parse_repository(toy_auction_dir());
    FsContentSource source(toy_auction_dir());
    auto [kb, stats] = build_knowledge_base(tree, fast_cfg(C), *out.ports.summarizer, source);
    out.kb = std::move(kb);
    out.stats = stats;
    return out;
}

}  // namespace

TEST_CASE("summarize_file") {
    auto ports = make_mock_ports();
    AbstractionConfig cfg = fast_cfg(3);

    SECTION("empty file gets a canonical record without a backend call") {
        std::int64_t calls = 0;
        SummaryRecord rec = summarize_file("  \n\t ", "empty.py", *ports.summarizer, cfg, &calls);
        CHECK(rec.functionality == "(empty file)");
        CHECK(rec.core_logic == "(empty file)");
        CHECK(rec.inputs_outputs == "file empty.py");
        CHECK(calls == 0);
        CHECK(ports.log->count(Role::Summarize) == 0);
    }
    SECTION("fixture buyer.py digest") {
        std::string content = read_text_file(toy_auction_dir() / "agents/buyer.py");
        SummaryRecord rec = summarize_file(content, "agents/buyer.py", *ports.summarizer, cfg);
        CHECK(rec.functionality == "bidding budget buyer valuation strategy");
    }
    SECTION("always-failing backend surfaces after the configured retries") {
        auto failing = std::make_shared<FailingBackend>();
        BackendSummarizerPort port(failing, nullptr, 1 << 20);
        CHECK_THROWS_AS(summarize_file("some content", "f.py", port, cfg), BackendFailure);
        CHECK(failing->calls == cfg.retry_attempts);
    }
    SECTION("oversized content is chunked and merged") {
        MockConfig small;
        small.context_budget_chars = 30;
        auto bundle = make_mock_ports(small);
        std::int64_t calls = 0;
        std::string content(100, 'x');
        content[10] = ' ';
        SummaryRecord rec = summarize_file(content, "big.py", *bundle.summarizer, cfg, &calls);
        CHECK(calls == 5);  // 4 slices + 1 merge
        CHECK(rec.inputs_outputs == "file big.py");

        AbstractionConfig strict = cfg;
        strict.max_children_in_prompt = 2;
        CHECK_THROWS_AS(summarize_file(content, "big.py", *bundle.summarizer, strict),
                        ContentTooLarge);
    }
    SECTION("records are capped at max_summary_chars with a marker") {
        AbstractionConfig tight = fast_cfg(3);
        tight.max_summary_chars = 24;
        SummaryRecord rec =
            summarize_file("alpha beta gamma delta epsilon zeta", "f.py", *ports.summarizer, tight);
        CHECK(rec.total_chars() <= 24);
        CHECK((rec.functionality + rec.core_logic).find("...") != std::string::npos);
    }
}

TEST_CASE("summarize_directory") {
    AbstractionConfig cfg = fast_cfg(3);

    SECTION("single child: DIR prefix over the child digest") {
        auto ports = make_mock_ports();
        SummaryRecord rec = summarize_directory(
            {{"agents/strategies/bidding.py", "bid bidding increment shade strategy"}},
            "agents/strategies", *ports.summarizer, cfg);
        // payload line is "bidding.py: <digest>", so 'bidding' leads the merge
        CHECK(rec.functionality == "DIR: bidding bid increment py shade");
        CHECK(rec.inputs_outputs == "dir agents/strategies");
        CHECK(rec.dependencies ==
              std::vector<std::string>{"agents/strategies/bidding.py"});
    }
    SECTION("two fixture children merge deterministically") {
        auto ports = make_mock_ports();
        std::vector<std::pair<std::string, std::string>> children = {
            {"market/clearing.py", "clearing price above and ask"},
            {"market/rng.py", "random 7 draws for helper"}};
        SummaryRecord a = summarize_directory(children, "market", *ports.summarizer, cfg);
        SummaryRecord b = summarize_directory(children, "market", *ports.summarizer, cfg);
        CHECK(a.functionality == "DIR: clearing py 7 above and");
        CHECK(a.functionality == b.functionality);
    }
    SECTION("children beyond max_children_in_prompt collapse into an overflow note") {
        auto recording = std::make_shared<RecordingBackend>();
        BackendSummarizerPort port(recording, nullptr, 1 << 20);
        AbstractionConfig wide = fast_cfg(3);
        wide.max_children_in_prompt = 64;
        std::vector<std::pair<std::string, std::string>> children;
        for (int i = 0; i < 1000; ++i)
            children.emplace_back("dir/f" + std::to_string(i), "abstract " + std::to_string(i));
        summarize_directory(children, "dir", port, wide);
        REQUIRE(recording->requests.size() == 1);
        const std::string& payload = recording->requests[0].payload;
        CHECK(payload.find("...and 936 more") != std::string::npos);
        CHECK(std::count(payload.begin(), payload.end(), '\n') == 65);  // 64 abstracts + note
    }
    SECTION("empty child list is rejected") {
        auto ports = make_mock_ports();
        CHECK_THROWS_AS(summarize_directory({}, "dir", *ports.summarizer, cfg), Error);
    }
}

TEST_CASE("build_knowledge_base compression behaviour on the fixture") {
    SECTION("C deeper than the tree: everything detailed") {
        ToyBuild b = build_toy(10);
        CHECK(b.stats.detailed_count == 11);
        CHECK(b.stats.compressed_count == 0);
        CHECK(b.stats.summarize_calls == 11);
        CHECK(b.kb.at("agents").abstract_text == "DIR: py bidding buyer seller ask");
        CHECK(b.kb.at(".").abstract_text == "DIR: auction py agents and buyer");
    }
    SECTION("C = 1: nothing detailed, zero calls") {
        ToyBuild b = build_toy(1);
        CHECK(b.stats.detailed_count == 0);
        CHECK(b.stats.compressed_count == 11);
        CHECK(b.stats.summarize_calls == 0);
        for (const auto& [p, n] : b.kb.nodes) CHECK(n.abstract_text == kPlaceholderAbstract);
    }
    SECTION("C = 3: depths 1-2 detailed, rest compressed") {
        ToyBuild b = build_toy(3);
        CHECK(b.stats.detailed_count == 5);
        CHECK(b.stats.compressed_count == 6);
        CHECK(b.stats.summarize_calls == 5);
        for (const auto& [p, n] : b.kb.nodes)
            CHECK((n.depth < 3) == (n.status == NodeStatus::Detailed));
        CHECK(b.kb.at(".").abstract_text == "DIR: auction py agents be buyer");
        CHECK(b.kb.at("market").abstract_text == "DIR: be detailed py to clearing");
    }
    SECTION("stats partition always covers the node count") {
        for (int C : {1, 2, 3, 4, 10}) {
            ToyBuild b = build_toy(C);
            CHECK(b.stats.detailed_count + b.stats.compressed_count ==
                  static_cast<std::int64_t>(b.kb.nodes.size()));
        }
    }
}

TEST_CASE("Phase I call-count law on perfect trees") {
    for (int B : {2, 3, 4}) {
        for (int L = 2; L <= 5; ++L) {
            for (int C = 1; C <= L; ++C) {
                auto repo = make_perfect_tree(B, L);
                auto ports = make_mock_ports();
                MapContentSource source(repo.files);
                auto [kb, stats] =
                    build_knowledge_base(repo.tree, fast_cfg(C), *ports.summarizer, source);
                std::int64_t expected = C > 1 ? node_count_at_levels(B, L, 1, C - 1) : 0;
                INFO("B=" << B << " L=" << L << " C=" << C);
                CHECK(stats.summarize_calls == expected);
                CHECK(ports.log->count(Role::Summarize) == expected);
                for (const auto& [p, n] : kb.nodes)
                    CHECK((n.depth < C) == (n.status == NodeStatus::Detailed));
            }
        }
    }
}

TEST_CASE("bottom-up causality: parents see final child abstracts") {
    auto ports = make_mock_ports();
    RecordingSummarizerPort recorder(ports.summarizer);
    RepoTree tree = parse_repository(toy_auction_dir());
    FsContentSource source(toy_auction_dir());
    auto [kb, stats] = build_knowledge_base(tree, fast_cfg(10), recorder, source);

    const auto& requests = recorder.requests;
    std::map<std::string, std::size_t> call_order;
    for (std::size_t i = 0; i < requests.size(); ++i) call_order[requests[i].path] = i;

    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& req = requests[i];
        if (req.kind != "directory") continue;
        for (const auto& child : req.child_paths) {
            const KnowledgeNode& cn = kb.at(child);
            if (cn.kind == NodeKind::File && cn.summary &&
                cn.summary->functionality == "(empty file)")
                continue;  // empty files never reach the backend
            REQUIRE(call_order.count(child) == 1);
            CHECK(call_order[child] < i);
            CHECK(req.payload.find(path_basename(child) + ": " + cn.abstract_text) !=
                  std::string::npos);
        }
    }
}

TEST_CASE("expand_node") {
    ToyBuild b = build_toy(3);
    FsContentSource source(toy_auction_dir());
    AbstractionConfig cfg = b.kb.build_config;

    SECTION("expanding a detailed node is a no-op with zero calls") {
        std::int64_t before = b.ports.log->count(Role::Summarize);
        auto [kb2, stats] = expand_node(b.kb, "agents", cfg, *b.ports.summarizer, source);
        CHECK(b.ports.log->count(Role::Summarize) == before);
        CHECK(stats.expansion_calls == 0);
        CHECK(canonical_json(kb_to_json(kb2)) == canonical_json(kb_to_json(b.kb)));
    }
    SECTION("expanding the depth-3 directory details it and its one child") {
        auto [kb2, stats] = expand_node(b.kb, "agents/strategies", cfg, *b.ports.summarizer, source);
        CHECK(kb2.at("agents/strategies").status == NodeStatus::Detailed);
        CHECK(kb2.at("agents/strategies/bidding.py").status == NodeStatus::Detailed);
        CHECK(kb2.at("agents/strategies/bidding.py").abstract_text ==
              "bid bidding increment shade strategy");
        CHECK(kb2.at("agents/strategies").abstract_text == "DIR: bidding bid increment py shade");
        CHECK(stats.expansion_calls == 2);

        SECTION("expansion locality: everything outside the subtree is unchanged") {
            for (const auto& [p, n] : b.kb.nodes) {
                if (p == "agents/strategies" || p == "agents/strategies/bidding.py") continue;
                CHECK(kb2.at(p).status == n.status);
                CHECK(kb2.at(p).abstract_text == n.abstract_text);
            }
        }
    }
    SECTION("expanding a compressed leaf details just that file") {
        auto [kb2, stats] = expand_node(b.kb, "agents/buyer.py", cfg, *b.ports.summarizer, source);
        CHECK(kb2.at("agents/buyer.py").abstract_text ==
              "bidding budget buyer valuation strategy");
        CHECK(stats.expansion_calls == 1);
        CHECK(stats.detailed_count == 6);
        CHECK(stats.compressed_count == 5);
    }
    SECTION("C=1 guard: expansion still details the target itself") {
        ToyBuild flat = build_toy(1);
        auto [kb2, stats] =
            expand_node(flat.kb, ".", flat.kb.build_config, *flat.ports.summarizer, source);
        CHECK(kb2.at(".").status == NodeStatus::Detailed);
        CHECK(stats.expansion_calls == 1);
    }
    SECTION("unknown node") {
        CHECK_THROWS_AS(expand_node(b.kb, "nope.py", cfg, *b.ports.summarizer, source),
                        UnknownNode);
    }
    SECTION("expand -> save -> load -> expand is byte-identical") {
        fs::path dir = fresh_tmp_dir("expand_idem");
        auto [kb2, s1] = expand_node(b.kb, "agents/strategies", cfg, *b.ports.summarizer, source);
        save_kb(kb2, dir / "one.json");
        KnowledgeBase loaded = load_kb(dir / "one.json");
        auto [kb3, s2] =
            expand_node(loaded, "agents/strategies", cfg, *b.ports.summarizer, source);
        save_kb(kb3, dir / "two.json");
        CHECK(read_text_file(dir / "one.json") == read_text_file(dir / "two.json"));
        CHECK(s2.expansion_calls == 0);
    }
}

TEST_CASE("build is a pure function of tree contents and config") {
    ToyBuild a = build_toy(3);
    ToyBuild b = build_toy(3);
    CHECK(canonical_json(kb_to_json(a.kb)) == canonical_json(kb_to_json(b.kb)));
}
