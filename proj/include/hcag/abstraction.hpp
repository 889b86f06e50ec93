#pragma once
// Phase I: recursive bottom-up summarization with compression depth C, plus
// on-demand expansion of compressed subtrees. Nodes at depth < C get detailed
// summaries (files first, then their directories, so every parent sees final
// child abstracts); deeper nodes get the placeholder and a content pointer.

#include <cstdint>
#include <functional>

#include "hcag/ports.hpp"

namespace hcag {

struct AbstractionStats {
    std::int64_t detailed_count = 0;
    std::int64_t compressed_count = 0;
    std::int64_t summarize_calls = 0;
    std::int64_t expansion_calls = 0;
};

inline std::string path_basename(const std::string& path) {
    auto slash = path.rfind('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

namespace detail {

inline bool is_blank(const std::string& s) {
    for (unsigned char c : s)
        if (!std::isspace(c)) return false;
    return true;
}

// Cap the serialized record size, marking the cut with "...". Fields are
// spent in order; later fields are dropped once the budget runs out.
inline void truncate_record(SummaryRecord& rec, std::size_t max_chars) {
    auto clip = [](std::string& field, std::size_t remaining) -> std::size_t {
        if (field.size() <= remaining) return field.size();
        std::size_t marker = remaining < 3 ? remaining : 3;
        field = field.substr(0, remaining - marker) + std::string(marker, '.');
        return remaining;
    };
    std::size_t left = max_chars;
    left -= clip(rec.functionality, left);
    left -= clip(rec.core_logic, left);
    left -= clip(rec.inputs_outputs, left);
    std::vector<std::string> deps;
    for (auto& d : rec.dependencies) {
        if (left == 0) break;
        left -= clip(d, left);
        deps.push_back(d);
    }
    rec.dependencies = std::move(deps);
}

}  // namespace detail

inline SummaryRecord summarize_file(const std::string& content, const std::string& path,
                                    SummarizerPort& backend, const AbstractionConfig& cfg,
                                    std::int64_t* call_counter = nullptr) {
    if (detail::is_blank(content)) {
        SummaryRecord rec;
        rec.functionality = "(empty file)";
        rec.core_logic = "(empty file)";
        rec.inputs_outputs = "file " + path;
        detail::truncate_record(rec, static_cast<std::size_t>(cfg.max_summary_chars));
        return rec;  // canonical record, no backend call
    }

    auto call = [&](const SummarizeRequest& req) {
        if (call_counter) ++*call_counter;
        return with_retries(cfg.retry_attempts, cfg.retry_base_ms,
                            [&] { return backend.summarize(req); });
    };

    std::size_t budget = backend.context_budget_chars();
    SummaryRecord rec;
    if (content.size() <= budget) {
        SummarizeRequest req;
        req.path = path;
        req.kind = "file";
        req.system_instructions = "summarize file " + path;
        req.payload = content;
        rec = call(req);
    } else {
        // Oversized file: summarize fixed-size slices, then merge the slice
        // digests with one directory-style aggregation call.
        std::size_t chunks = (content.size() + budget - 1) / budget;
        if (chunks > static_cast<std::size_t>(cfg.max_children_in_prompt))
            throw ContentTooLarge(path);
        std::string merged_payload;
        std::vector<std::string> chunk_ids;
        for (std::size_t i = 0; i < chunks; ++i) {
            std::string chunk_id = path + "#chunk" + std::to_string(i);
            SummarizeRequest req;
            req.path = chunk_id;
            req.kind = "file";
            req.system_instructions = "summarize slice " + std::to_string(i) + " of " + path;
            req.payload = content.substr(i * budget, budget);
            SummaryRecord part = call(req);
            merged_payload += path_basename(chunk_id) + ": " + part.functionality + "\n";
            chunk_ids.push_back(chunk_id);
        }
        SummarizeRequest merge;
        merge.path = path;
        merge.kind = "merge";
        merge.system_instructions = "merge slice summaries of " + path;
        merge.payload = merged_payload;
        merge.child_paths = chunk_ids;
        rec = call(merge);
        rec.inputs_outputs = "file " + path;
    }
    detail::truncate_record(rec, static_cast<std::size_t>(cfg.max_summary_chars));
    return rec;
}

inline SummaryRecord summarize_directory(const std::vector<std::pair<std::string, std::string>>& child_records,
                                         const std::string& path, SummarizerPort& backend,
                                         const AbstractionConfig& cfg,
                                         std::int64_t* call_counter = nullptr) {
    if (child_records.empty()) throw Error("summarize_directory needs children: " + path);

    std::size_t shown = std::min(child_records.size(),
                                 static_cast<std::size_t>(cfg.max_children_in_prompt));
    SummarizeRequest req;
    req.path = path;
    req.kind = "directory";
    req.system_instructions = "summarize directory " + path + " from its child abstracts";
    for (std::size_t i = 0; i < shown; ++i) {
        req.payload += path_basename(child_records[i].first) + ": " + child_records[i].second + "\n";
        req.child_paths.push_back(child_records[i].first);
    }
    if (shown < child_records.size())
        req.payload += "...and " + std::to_string(child_records.size() - shown) + " more\n";

    if (call_counter) ++*call_counter;
    SummaryRecord rec = with_retries(cfg.retry_attempts, cfg.retry_base_ms,
                                     [&] { return backend.summarize(req); });
    rec.functionality = "DIR: " + rec.functionality;
    detail::truncate_record(rec, static_cast<std::size_t>(cfg.max_summary_chars));
    return rec;
}

namespace detail {

inline ContentRef make_content_ref(const std::string& path, NodeKind kind, std::uint64_t size) {
    ContentRef ref;
    ref.file_path = path;
    if (kind == NodeKind::File) {
        ref.byte_start = 0;
        ref.byte_len = size;
    }
    return ref;
}

// Detail one currently-compressed node in place; children must already carry
// their final abstracts.
inline void detail_node(KnowledgeBase& kb, KnowledgeNode& node, SummarizerPort& backend,
                        const AbstractionConfig& cfg, const ContentSource& source,
                        std::int64_t* call_counter) {
    if (node.kind == NodeKind::File) {
        node.summary = summarize_file(source.read(node.path), node.path, backend, cfg, call_counter);
    } else {
        std::vector<std::pair<std::string, std::string>> records;
        for (const auto& c : node.children) records.emplace_back(c, kb.at(c).abstract_text);
        node.summary = summarize_directory(records, node.path, backend, cfg, call_counter);
    }
    node.abstract_text = node.summary->functionality;
    node.status = NodeStatus::Detailed;
}

}  // namespace detail

// Builds the whole KB from a parsed tree: strictly bottom-up, deterministic
// given (tree contents, cfg) and a deterministic backend. On backend failure
// the exception propagates and no KB is returned, so partial builds can never
// be persisted.
inline std::pair<KnowledgeBase, AbstractionStats> build_knowledge_base(const RepoTree& tree,
                                                                       const AbstractionConfig& cfg,
                                                                       SummarizerPort& backend,
                                                                       const ContentSource& source) {
    cfg.validate();
    KnowledgeBase kb;
    kb.compression_depth = cfg.compression_depth;
    kb.build_config = cfg;
    kb.repo_root_fingerprint = fingerprint_tree(tree, source);

    AbstractionStats stats;
    std::function<void(std::size_t)> visit = [&](std::size_t idx) {
        const RepoNode& rn = tree.nodes[idx];
        for (auto c : rn.children) visit(c);

        KnowledgeNode node;
        node.path = rn.path;
        node.kind = rn.kind;
        node.depth = rn.depth;
        node.content_ref = detail::make_content_ref(rn.path, rn.kind, rn.size_bytes);
        for (auto c : rn.children) node.children.push_back(tree.nodes[c].path);

        if (rn.depth < cfg.compression_depth) {
            kb.nodes[node.path] = node;  // children already present for lookup
            detail::detail_node(kb, kb.at(node.path), backend, cfg, source, &stats.summarize_calls);
            ++stats.detailed_count;
        } else {
            node.status = NodeStatus::Compressed;
            node.abstract_text = kPlaceholderAbstract;
            kb.nodes[node.path] = std::move(node);
            ++stats.compressed_count;
        }
    };
    visit(tree.root);
    return {std::move(kb), stats};
}

// On-demand expansion: re-applies the Phase I procedure rooted at the target,
// so the target and its descendants down to relative depth C-1 become
// detailed while everything outside the subtree is untouched. Expanding an
// already-detailed node is a no-op. With C = 1 a literal re-application would
// leave the target compressed forever; the target itself is always detailed.
inline std::pair<KnowledgeBase, AbstractionStats> expand_node(const KnowledgeBase& kb,
                                                              const std::string& node_path,
                                                              const AbstractionConfig& cfg,
                                                              SummarizerPort& backend,
                                                              const ContentSource& source) {
    const KnowledgeNode& target = kb.at(node_path);

    auto count_statuses = [](const KnowledgeBase& k, AbstractionStats& s) {
        for (const auto& [p, n] : k.nodes)
            (n.status == NodeStatus::Detailed ? s.detailed_count : s.compressed_count)++;
    };

    AbstractionStats stats;
    if (target.status == NodeStatus::Detailed) {
        count_statuses(kb, stats);
        return {kb, stats};
    }

    KnowledgeBase out = kb;
    int base_depth = target.depth;
    std::function<void(const std::string&)> visit = [&](const std::string& path) {
        KnowledgeNode& node = out.at(path);
        int rel_level = node.depth - base_depth + 1;
        bool wanted = rel_level < cfg.compression_depth || path == node_path;
        if (!wanted) return;  // deeper layers stay compressed until triggered again
        for (const auto& c : node.children) visit(c);
        if (node.status == NodeStatus::Compressed)
            detail::detail_node(out, node, backend, cfg, source, &stats.expansion_calls);
    };
    visit(node_path);
    count_statuses(out, stats);
    return {std::move(out), stats};
}

}  // namespace hcag
