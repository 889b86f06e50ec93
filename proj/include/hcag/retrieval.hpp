#pragma once
// Phase II, level 1: top-down hierarchical retrieval. Control flow follows
// the categorical relevance verdict (fully relevant returns content and
// stops, irrelevant or leaf terminates the branch, partially relevant
// decomposes the task over the node's children); the combined
// semantic+structural score S is used only for sibling visit order and
// skeleton selection. Compressed nodes are expanded on first encounter,
// before any judgment.

#include <algorithm>
#include <functional>
#include <optional>

#include "hcag/abstraction.hpp"

namespace hcag {

struct Task {
    std::string id;
    std::string query;
    std::optional<std::string> parent_id;
    int lineage_depth = 0;
    // Decomposition provenance: the child this subtask targets and its kind
    // (the "leaf implementation vs module" tag used by structural scoring).
    std::optional<std::string> target_path;
    std::optional<NodeKind> target_kind;
};

struct RetrievalConfig {
    double lambda_sem = 0.7;
    double lambda_struct = 0.3;
    int max_depth = 4;
    double fully_threshold = 0.8;
    double irrelevant_threshold = 0.1;
    int top_k_skeletons = 3;
    // Fig. 2 terminates partially-relevant leaves silently; by default we
    // still emit them as low-confidence results when their score clears half
    // the fully threshold.
    bool strict_figure2 = false;

    void validate() const {
        if (lambda_sem < 0 || lambda_struct < 0 || std::abs(lambda_sem + lambda_struct - 1.0) > 1e-9)
            throw Error("lambda_sem + lambda_struct must equal 1");
        if (!(0.0 <= irrelevant_threshold && irrelevant_threshold < fully_threshold &&
              fully_threshold <= 1.0))
            throw Error("need 0 <= irrelevant < fully <= 1");
        if (max_depth < 1) throw Error("max_depth must be >= 1");
        if (top_k_skeletons < 1) throw Error("top_k_skeletons must be >= 1");
    }

    json to_json() const {
        return json{{"lambda_sem", lambda_sem},
                    {"lambda_struct", lambda_struct},
                    {"max_depth", max_depth},
                    {"relevance_thresholds", json{{"fully", fully_threshold},
                                                  {"irrelevant", irrelevant_threshold}}},
                    {"strict_figure2", strict_figure2},
                    {"top_k_skeletons", top_k_skeletons}};
    }
};

struct RetrievedItem {
    std::string path;
    ContentRef content_ref;
    double score = 0.0;
};

struct VisitEntry {
    std::string path;
    RelevanceVerdict verdict;
    std::string task_id;
};

struct RetrievalTrace {
    std::string query;
    RetrievalConfig config;
    std::vector<VisitEntry> visited;
    std::vector<std::string> expansions;
    std::vector<std::string> empty_decompositions;
    std::int64_t judge_calls = 0;
    std::int64_t expansion_summarize_calls = 0;
    std::vector<RetrievedItem> results;
    std::optional<std::string> skeleton;  // G_best
    std::vector<std::pair<std::string, double>> skeleton_candidates;
    std::int64_t path_length_sum = 0;  // sum of depths where descent terminated

    json to_json() const {
        json visited_j = json::array();
        for (const auto& v : visited)
            visited_j.push_back(json{{"path", v.path},
                                     {"task_id", v.task_id},
                                     {"verdict", json{{"label", to_string(v.verdict.label)},
                                                      {"rationale", v.verdict.rationale},
                                                      {"score", v.verdict.score}}}});
        json results_j = json::array();
        for (const auto& r : results) {
            json ref{{"file_path", r.content_ref.file_path}};
            if (r.content_ref.byte_start) ref["byte_start"] = *r.content_ref.byte_start;
            if (r.content_ref.byte_len) ref["byte_len"] = *r.content_ref.byte_len;
            results_j.push_back(json{{"content_ref", ref}, {"path", r.path}, {"score", r.score}});
        }
        json cands = json::array();
        for (const auto& [p, s] : skeleton_candidates)
            cands.push_back(json{{"path", p}, {"score", s}});
        json j{{"config", config.to_json()},
               {"empty_decompositions", empty_decompositions},
               {"expansion_summarize_calls", expansion_summarize_calls},
               {"expansions", expansions},
               {"judge_calls", judge_calls},
               {"path_length_sum", path_length_sum},
               {"query", query},
               {"results", results_j},
               {"skeleton_candidates", cands},
               {"visited", visited_j}};
        if (skeleton) j["skeleton"] = *skeleton;
        return j;
    }
};

// ---------------------------------------------------------------------------
// Scoring

// Cosine of the bag-of-words embeddings, clamped to [0,1]. Equal non-empty
// texts embed identically, so identity short-circuits to exactly 1.
inline double sim_semantic(const std::string& a, const std::string& b, EmbedderPort& embedder) {
    if (a == b) return token_set(a).empty() ? 0.0 : 1.0;
    double c = cosine(embedder.embed(a), embedder.embed(b));
    return std::clamp(c, 0.0, 1.0);
}

// Structural relevance: half from the child/subtask count ratio, half from
// the Jaccard overlap of kind tags ({file, directory} vs the subtasks'
// leaf/module expectations). Vacuously 1 on both sides being empty.
inline double sim_structural(const KnowledgeBase& kb, const KnowledgeNode& node,
                             const std::vector<Task>& decomposition_hint) {
    std::size_t m = node.children.size();
    std::size_t n = decomposition_hint.size();
    double count_term;
    if (m == 0 && n == 0) {
        count_term = 1.0;
    } else {
        count_term = static_cast<double>(std::min(m, n)) /
                     static_cast<double>(std::max({m, n, std::size_t(1)}));
    }

    std::set<NodeKind> child_tags;
    for (const auto& c : node.children) child_tags.insert(kb.at(c).kind);
    std::set<NodeKind> task_tags;
    for (const auto& t : decomposition_hint)
        if (t.target_kind) task_tags.insert(*t.target_kind);

    double kind_term;
    if (child_tags.empty() && task_tags.empty()) {
        kind_term = 1.0;
    } else {
        std::size_t inter = 0;
        for (auto k : child_tags)
            if (task_tags.count(k)) ++inter;
        std::size_t uni = child_tags.size() + task_tags.size() - inter;
        kind_term = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return 0.5 * count_term + 0.5 * kind_term;
}

inline double score_node(const KnowledgeBase& kb, const KnowledgeNode& node, const Task& task,
                         const std::vector<Task>& hint, const RetrievalConfig& cfg,
                         EmbedderPort& embedder) {
    return cfg.lambda_sem * sim_semantic(node.abstract_text, task.query, embedder) +
           cfg.lambda_struct * sim_structural(kb, node, hint);
}

inline RelevanceVerdict classify_relevance(const KnowledgeNode& node, const Task& task,
                                           JudgePort& judge) {
    if (node.status != NodeStatus::Detailed)
        throw InvariantViolation("classify_relevance on compressed node " + node.path);
    return judge.classify(task.query, node.path, node.abstract_text);
}

inline std::vector<Task> decompose_task(const Task& task, const KnowledgeNode& node,
                                        const KnowledgeBase& kb, DecomposerPort& decomposer) {
    if (node.children.empty()) throw Error("decompose_task on a leaf: " + node.path);
    std::vector<DecomposeChild> children;
    for (const auto& c : node.children) {
        const KnowledgeNode& child = kb.at(c);
        DecomposeChild dc;
        dc.path = child.path;
        dc.basename = path_basename(child.path);
        dc.kind = child.kind;
        dc.status = child.status;
        dc.abstract_text = child.abstract_text;
        children.push_back(std::move(dc));
    }
    auto specs = decomposer.decompose(task.id, task.query, node.path, children);
    if (specs.empty()) throw EmptyDecomposition(node.path);
    if (specs.size() > node.children.size())
        throw MalformedResponse("decomposer emitted more subtasks than children");

    std::vector<Task> out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        Task t;
        t.id = task.id + "." + std::to_string(i);
        t.query = specs[i].query;
        t.parent_id = task.id;
        t.lineage_depth = task.lineage_depth + 1;
        t.target_path = specs[i].child_path;
        t.target_kind = specs[i].child_kind;
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Depth-limited recursive retrieval

struct RetrievalPorts {
    JudgePort& judge;
    EmbedderPort& embedder;
    DecomposerPort& decomposer;
    SummarizerPort& summarizer;
};

inline std::pair<RetrievalTrace, KnowledgeBase> hierarchical_retrieve(const KnowledgeBase& kb_in,
                                                                      const std::string& query,
                                                                      const RetrievalConfig& cfg,
                                                                      RetrievalPorts ports,
                                                                      const ContentSource& source) {
    cfg.validate();
    if (token_set(query).empty()) throw QueryEmpty();

    KnowledgeBase kb = kb_in;
    RetrievalTrace trace;
    trace.query = query;
    trace.config = cfg;
    std::vector<std::pair<double, std::string>> candidates;  // internal, fully/partially relevant

    std::function<void(const std::string&, const Task&)> visit = [&](const std::string& path,
                                                                     const Task& task) {
        if (kb.at(path).status == NodeStatus::Compressed) {
            auto [expanded, stats] = expand_node(kb, path, kb.build_config, ports.summarizer, source);
            kb = std::move(expanded);
            trace.expansions.push_back(path);
            trace.expansion_summarize_calls += stats.expansion_calls;
        }
        KnowledgeNode node = kb.at(path);
        RelevanceVerdict verdict = classify_relevance(node, task, ports.judge);
        ++trace.judge_calls;
        trace.visited.push_back(VisitEntry{path, verdict, task.id});

        bool terminal = true;
        if (verdict.label == RelevanceLabel::FullyRelevant) {
            double score = score_node(kb, node, task, {}, cfg, ports.embedder);
            trace.results.push_back(RetrievedItem{path, node.content_ref, score});
            if (!node.is_leaf()) candidates.emplace_back(score, path);
        } else if (verdict.label == RelevanceLabel::PartiallyRelevant) {
            if (node.is_leaf()) {
                double score = score_node(kb, node, task, {}, cfg, ports.embedder);
                // Borderline leaves are kept as low-confidence results unless
                // the strict Fig. 2 termination rule is requested.
                if (!cfg.strict_figure2 && score >= cfg.fully_threshold * 0.5)
                    trace.results.push_back(RetrievedItem{path, node.content_ref, score});
            } else if (task.lineage_depth + 1 > cfg.max_depth) {
                candidates.emplace_back(score_node(kb, node, task, {}, cfg, ports.embedder), path);
            } else {
                std::vector<Task> subtasks;
                try {
                    subtasks = decompose_task(task, node, kb, ports.decomposer);
                } catch (const EmptyDecomposition&) {
                    trace.empty_decompositions.push_back(path);
                }
                if (subtasks.empty()) {
                    candidates.emplace_back(score_node(kb, node, task, {}, cfg, ports.embedder), path);
                } else {
                    candidates.emplace_back(
                        score_node(kb, node, task, subtasks, cfg, ports.embedder), path);
                    terminal = false;
                    struct ChildVisit {
                        double order_score;
                        std::string path;
                        const Task* task;
                    };
                    std::vector<ChildVisit> order;
                    for (const auto& st : subtasks) {
                        const KnowledgeNode& child = kb.at(*st.target_path);
                        order.push_back(
                            ChildVisit{score_node(kb, child, st, {}, cfg, ports.embedder),
                                       *st.target_path, &st});
                    }
                    std::sort(order.begin(), order.end(), [](const ChildVisit& a, const ChildVisit& b) {
                        if (a.order_score != b.order_score) return a.order_score > b.order_score;
                        return a.path < b.path;
                    });
                    for (const auto& cv : order) visit(cv.path, *cv.task);
                }
            }
        }
        if (terminal) trace.path_length_sum += node.depth;
    };

    Task root_task;
    root_task.id = "t0";
    root_task.query = query;
    visit(kRootPath, root_task);

    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    if (!candidates.empty()) trace.skeleton = candidates.front().second;
    for (std::size_t i = 0; i < candidates.size() &&
                            i < static_cast<std::size_t>(cfg.top_k_skeletons); ++i)
        trace.skeleton_candidates.emplace_back(candidates[i].second, candidates[i].first);

    return {std::move(trace), std::move(kb)};
}

}  // namespace hcag
