#pragma once
// Phase II, level 2: scaffold-and-fill generation over the retrieved
// skeleton. Each skeleton child is treated as a module: Match against the
// KB, else Decompose into sub-tasks, else Generate directly; sibling outputs
// are aggregated bottom-up into their parent module. A critique/moderate
// debate loop refines the draft afterwards.

#include <optional>

#include "hcag/retrieval.hpp"

namespace hcag {

enum class PlanDecisionKind { Matched, Generated, Decomposed };

inline std::string to_string(PlanDecisionKind k) {
    switch (k) {
        case PlanDecisionKind::Matched: return "matched";
        case PlanDecisionKind::Generated: return "generated";
        case PlanDecisionKind::Decomposed: return "decomposed";
    }
    return "?";
}

struct PlanNode {
    std::string id;
    std::string description;
    PlanDecisionKind decision = PlanDecisionKind::Generated;
    std::optional<std::string> reference;  // KB path for Matched nodes
    bool depth_exceeded = false;           // decomposition wanted but depth-limited
    std::string output_path;
    std::vector<PlanNode> children;

    json to_json() const {
        json kids = json::array();
        for (const auto& c : children) kids.push_back(c.to_json());
        json j{{"children", kids},
               {"decision", to_string(decision)},
               {"description", description},
               {"id", id},
               {"output_path", output_path}};
        if (reference) j["reference"] = *reference;
        if (depth_exceeded) j["depth_exceeded"] = true;
        return j;
    }
};

struct Scaffold {
    std::optional<std::string> skeleton_root;  // G_best
    PlanNode plan;
};

struct GeneratedArtifact {
    ArtifactFiles files;
    Scaffold plan;
    std::map<std::string, std::vector<std::string>> provenance;  // file -> KB refs in prompt

    json plan_to_json(const std::string& query) const {
        json j{{"plan", plan.plan.to_json()}, {"provenance", provenance}, {"query", query}};
        if (plan.skeleton_root) j["skeleton_root"] = *plan.skeleton_root;
        return j;
    }
};

struct DebateConfig {
    int num_agents = 1;
    int rounds = 0;

    void validate() const {
        if (num_agents < 1) throw Error("num_agents must be >= 1");
        if (rounds < 0) throw Error("rounds must be >= 0");
    }
};

struct GenerationLimits {
    int max_decompose_depth = 2;
    double match_threshold = 0.6;
    std::string output_ext = "txt";
};

// ---------------------------------------------------------------------------
// Match

// Best detailed node whose embedding similarity clears the threshold and
// whose abstract the judge affirms as superset-or-related functionality.
// Candidates are ranked by similarity, ties by path.
inline std::optional<std::string> match_module(const std::string& description,
                                               const KnowledgeBase& kb, EmbedderPort& embedder,
                                               JudgePort& judge, double threshold) {
    std::vector<std::pair<double, const KnowledgeNode*>> ranked;
    for (const auto& [path, node] : kb.nodes) {
        if (node.status != NodeStatus::Detailed) continue;
        ranked.emplace_back(sim_semantic(description, node.abstract_text, embedder), &node);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->path < b.second->path;
    });
    for (const auto& [sim, node] : ranked) {
        if (sim < threshold) break;
        if (judge.affirms_related(description, node->path, node->abstract_text)) return node->path;
    }
    return std::nullopt;
}

inline std::string generate_module(const std::string& module_id, const std::string& description,
                                   const std::optional<std::pair<std::string, std::string>>& reference,
                                   const std::vector<std::string>& context, GeneratorPort& generator) {
    std::string out = generator.generate(module_id, description, reference, context);
    if (out.empty()) throw EmptyGeneration(module_id);
    return out;
}

// ---------------------------------------------------------------------------
// Scaffold fill

struct GenerationPorts {
    EmbedderPort& embedder;
    JudgePort& judge;
    DecomposerPort& decomposer;
    GeneratorPort& generator;
};

namespace detail {

inline std::string slugify(const std::string& s) {
    std::string out;
    for (unsigned char c : s) out.push_back(std::isalnum(c) ? static_cast<char>(c) : '_');
    return out.empty() ? "module" : out;
}

class ScaffoldFiller {
public:
    ScaffoldFiller(const KnowledgeBase& kb, GenerationPorts ports, const GenerationLimits& limits,
                   const ContentSource* source)
        : kb_(kb), ports_(ports), limits_(limits), source_(source) {}

    GeneratedArtifact artifact;

    // Reference content: the file body when resolvable, otherwise the node's
    // abstract plus its child list.
    std::string reference_content(const KnowledgeNode& node) const {
        if (node.kind == NodeKind::File && source_) {
            try {
                return source_->read(node.content_ref.file_path);
            } catch (const IoFailure&) {
            }
        }
        std::string out = node.abstract_text;
        for (const auto& c : node.children) out += "\n" + c;
        return out;
    }

    std::string unique_path(const std::string& dir, const std::string& slug, bool is_dir) {
        std::string base = dir + slug;
        std::string candidate = base;
        int i = 1;
        while (!used_.insert(candidate + (is_dir ? "/" : "." + limits_.output_ext)).second)
            candidate = base + "_" + std::to_string(i++);
        return candidate;
    }

    // Emits the file for `node` and records provenance.
    void emit(PlanNode& node, std::string content, std::vector<std::string> refs) {
        artifact.files[node.output_path] = std::move(content);
        artifact.provenance[node.output_path] = std::move(refs);
    }

    // Match / Generate-or-Decompose for one module; returns the generated
    // text so parents can aggregate it.
    std::string fill(PlanNode& node, const std::string& dir, const std::string& slug, int depth) {
        auto matched = match_module(node.description, kb_, ports_.embedder, ports_.judge,
                                    limits_.match_threshold);
        if (matched) {
            const KnowledgeNode& ref_node = kb_.at(*matched);
            node.decision = PlanDecisionKind::Matched;
            node.reference = *matched;
            node.output_path = unique_path(dir, slug, false) + "." + limits_.output_ext;
            std::string out = generate_module(node.id, node.description,
                                              std::make_pair(*matched, reference_content(ref_node)),
                                              {}, ports_.generator);
            emit(node, out, {*matched});
            return out;
        }

        std::vector<std::string> parts;
        if (depth < limits_.max_decompose_depth)
            parts = ports_.decomposer.decompose_description(node.id, node.description);

        if (parts.empty()) {
            node.decision = PlanDecisionKind::Generated;
            node.depth_exceeded = depth >= limits_.max_decompose_depth;
            node.output_path = unique_path(dir, slug, false) + "." + limits_.output_ext;
            std::string out =
                generate_module(node.id, node.description, std::nullopt, {}, ports_.generator);
            emit(node, out, {});
            return out;
        }

        node.decision = PlanDecisionKind::Decomposed;
        std::string subdir = unique_path(dir, slug, true) + "/";
        node.output_path = subdir + "__module__." + limits_.output_ext;
        std::vector<std::string> context;
        for (std::size_t j = 0; j < parts.size(); ++j) {
            PlanNode child;
            child.id = node.id + "." + std::to_string(j);
            child.description = parts[j];
            context.push_back(fill(child, subdir, "sub" + std::to_string(j), depth + 1));
            node.children.push_back(std::move(child));
        }
        std::string out =
            generate_module(node.id, node.description, std::nullopt, context, ports_.generator);
        emit(node, out, {});
        return out;
    }

private:
    const KnowledgeBase& kb_;
    GenerationPorts ports_;
    GenerationLimits limits_;
    const ContentSource* source_;
    std::set<std::string> used_;
};

}  // namespace detail

inline GeneratedArtifact scaffold_fill(const RetrievalTrace& trace, const KnowledgeBase& kb,
                                       const std::string& query, GenerationPorts ports,
                                       const GenerationLimits& limits = {},
                                       const ContentSource* source = nullptr) {
    detail::ScaffoldFiller filler(kb, ports, limits, source);
    filler.artifact.plan.skeleton_root = trace.skeleton;

    PlanNode root;
    root.id = "m0";

    if (!trace.skeleton) {
        // No skeleton was retrieved: the whole query is one module.
        root.description = query;
        filler.fill(root, "", "__module__", 0);
    } else {
        const KnowledgeNode& skeleton = kb.at(*trace.skeleton);
        if (skeleton.children.empty()) {
            root.description = query;
            root.decision = PlanDecisionKind::Generated;
            root.output_path = "__module__." + limits.output_ext;
            std::string out = generate_module(root.id, query, std::nullopt, {}, ports.generator);
            filler.emit(root, out, {});
        } else {
            root.description = skeleton.abstract_text;
            root.decision = PlanDecisionKind::Matched;
            root.reference = skeleton.path;
            root.output_path = "__module__." + limits.output_ext;
            std::vector<std::string> context;
            for (std::size_t i = 0; i < skeleton.children.size(); ++i) {
                const KnowledgeNode& child = kb.at(skeleton.children[i]);
                PlanNode module;
                module.id = "m0." + std::to_string(i);
                module.description = child.abstract_text;
                context.push_back(filler.fill(module, "", detail::slugify(child.path), 0));
                root.children.push_back(std::move(module));
            }
            std::string out = generate_module(
                root.id, root.description,
                std::make_pair(skeleton.path, filler.reference_content(skeleton)), context,
                ports.generator);
            filler.emit(root, out, {skeleton.path});
        }
    }

    filler.artifact.plan.plan = std::move(root);
    return std::move(filler.artifact);
}

// ---------------------------------------------------------------------------
// Multi-agent discussion: each round every critic reviews the artifact, the
// moderator merges accepted critiques (order: critic index, then file path).
// The loop stops after `rounds` rounds or on the first round with zero
// accepted critiques. A backend failure skips the round, never corrupting
// the artifact.

inline GeneratedArtifact multi_agent_discussion(GeneratedArtifact draft, const DebateConfig& cfg,
                                                const std::vector<std::shared_ptr<CriticPort>>& critics,
                                                ModeratorPort& moderator,
                                                std::vector<std::string>* round_log = nullptr) {
    cfg.validate();
    if (critics.size() != static_cast<std::size_t>(cfg.num_agents))
        throw Error("debate needs exactly num_agents critics");
    if (cfg.rounds == 0) return draft;

    for (int round = 1; round <= cfg.rounds; ++round) {
        std::string subject = "round" + std::to_string(round);
        try {
            std::vector<Critique> merged_order;
            for (std::size_t i = 0; i < critics.size(); ++i) {
                auto cs = critics[i]->critique(draft.files, subject);
                std::sort(cs.begin(), cs.end(),
                          [](const Critique& a, const Critique& b) { return a.file < b.file; });
                merged_order.insert(merged_order.end(), cs.begin(), cs.end());
            }
            ModerationResult result = moderator.merge(draft.files, merged_order, subject);
            if (round_log)
                round_log->push_back(subject + ": accepted " + std::to_string(result.accepted));
            if (result.accepted == 0) break;  // converged
            draft.files = std::move(result.files);
        } catch (const BackendFailure& e) {
            if (round_log) round_log->push_back(subject + ": skipped (" + e.what() + ")");
        }
    }
    return draft;
}

}  // namespace hcag
