#pragma once
// Knowledge-base data model: repository tree construction, node records,
// bit-exact JSON persistence and the closed-form level counts used by the
// cost model.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hcag/errors.hpp"
#include "hcag/rational.hpp"
#include "hcag/util.hpp"

namespace hcag {

inline constexpr int kKbSchemaVersion = 1;
inline constexpr const char* kPlaceholderAbstract = "to be detailed";
inline constexpr const char* kRootPath = ".";

enum class NodeKind { File, Directory };
enum class NodeStatus { Detailed, Compressed };

inline std::string to_string(NodeKind k) { return k == NodeKind::File ? "file" : "directory"; }
inline std::string to_string(NodeStatus s) { return s == NodeStatus::Detailed ? "detailed" : "compressed"; }

inline NodeKind node_kind_from_string(const std::string& s) {
    if (s == "file") return NodeKind::File;
    if (s == "directory") return NodeKind::Directory;
    throw ParseError("bad node kind: " + s);
}
inline NodeStatus node_status_from_string(const std::string& s) {
    if (s == "detailed") return NodeStatus::Detailed;
    if (s == "compressed") return NodeStatus::Compressed;
    throw ParseError("bad node status: " + s);
}

// ---------------------------------------------------------------------------
// Repository tree

struct RepoNode {
    std::string path;  // repo-relative, "." for the root
    NodeKind kind = NodeKind::File;
    std::vector<std::size_t> children;  // ordered lexicographically by path
    std::uint64_t size_bytes = 0;
    int depth = 1;  // root = 1
};

struct RepoTree {
    std::size_t root = 0;
    std::vector<RepoNode> nodes;
    std::map<std::string, std::size_t> index;

    const RepoNode& at(const std::string& path) const {
        auto it = index.find(path);
        if (it == index.end()) throw UnknownNode(path);
        return nodes[it->second];
    }
    std::size_t file_count() const {
        std::size_t n = 0;
        for (const auto& nd : nodes)
            if (nd.kind == NodeKind::File) ++n;
        return n;
    }
};

struct IgnoreConfig {
    bool skip_hidden = true;            // dot-prefixed names ('.git' is covered here too)
    bool skip_binaries = true;          // null-byte sniff on the first 8 KiB
    std::uint64_t max_file_bytes = 1 << 20;
    std::vector<std::string> ignore_names = {".git"};  // always skipped, even if not hidden
};

namespace detail {

inline bool looks_binary(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoFailure(p.string());
    char buf[8192];
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i)
        if (buf[i] == '\0') return true;
    return false;
}

inline bool ignored_name(const std::string& name, const IgnoreConfig& ig) {
    for (const auto& n : ig.ignore_names)
        if (name == n) return true;
    if (ig.skip_hidden && !name.empty() && name.front() == '.') return true;
    return false;
}

// Returns the node index, or nullopt when the subtree holds no indexable file.
inline std::optional<std::size_t> walk_dir(const fs::path& abs, const std::string& rel, int depth,
                                           const IgnoreConfig& ig, RepoTree& tree) {
    std::vector<std::pair<std::string, fs::directory_entry>> entries;
    std::error_code ec;
    for (fs::directory_iterator it(abs, ec), end; it != end; it.increment(ec)) {
        if (ec) throw IoFailure(abs.string() + ": " + ec.message());
        entries.emplace_back(it->path().filename().string(), *it);
    }
    if (ec) throw IoFailure(abs.string() + ": " + ec.message());
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    RepoNode node;
    node.path = rel.empty() ? kRootPath : rel;
    node.kind = NodeKind::Directory;
    node.depth = depth;
    std::size_t self = tree.nodes.size();
    tree.nodes.push_back(node);

    std::vector<std::size_t> kids;
    for (auto& [name, entry] : entries) {
        if (ignored_name(name, ig)) continue;
        std::string child_rel = rel.empty() ? name : rel + "/" + name;
        if (entry.is_directory()) {
            if (auto idx = walk_dir(entry.path(), child_rel, depth + 1, ig, tree)) kids.push_back(*idx);
        } else if (entry.is_regular_file()) {
            std::uint64_t size = entry.file_size(ec);
            if (ec) throw IoFailure(child_rel);
            if (size > ig.max_file_bytes) continue;
            if (ig.skip_binaries && looks_binary(entry.path())) continue;
            RepoNode leaf;
            leaf.path = child_rel;
            leaf.kind = NodeKind::File;
            leaf.size_bytes = size;
            leaf.depth = depth + 1;
            kids.push_back(tree.nodes.size());
            tree.nodes.push_back(leaf);
        }
    }

    bool has_file = false;
    for (auto k : kids)
        if (!tree.nodes[k].children.empty() || tree.nodes[k].kind == NodeKind::File) has_file = true;
    if (!has_file && depth > 1) return std::nullopt;  // prune directories without files
    tree.nodes[self].children = std::move(kids);
    return self;
}

}  // namespace detail

// Deterministic function of the directory contents and the ignore rules.
inline RepoTree parse_repository(const fs::path& root_dir, const IgnoreConfig& ignore = {}) {
    std::error_code ec;
    if (!fs::is_directory(root_dir, ec) || ec) throw NotADirectory(root_dir.string());

    RepoTree tree;
    detail::walk_dir(root_dir, "", 1, ignore, tree);

    // Drop pruned branches: rebuild with only nodes reachable from the root.
    RepoTree compact;
    std::vector<std::optional<std::size_t>> remap(tree.nodes.size());
    std::vector<std::size_t> stack = {tree.root};
    // The walk already removed empty directories from children lists, but the
    // node vector still holds them; copy reachable nodes in preorder.
    std::vector<std::size_t> order;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        order.push_back(i);
        for (auto it = tree.nodes[i].children.rbegin(); it != tree.nodes[i].children.rend(); ++it)
            stack.push_back(*it);
    }
    for (auto i : order) {
        remap[i] = compact.nodes.size();
        compact.nodes.push_back(tree.nodes[i]);
    }
    for (auto& n : compact.nodes) {
        for (auto& c : n.children) c = *remap[c];
        compact.index[n.path] = static_cast<std::size_t>(&n - compact.nodes.data());
    }
    if (compact.file_count() == 0) throw EmptyRepository(root_dir.string());
    return compact;
}

// ---------------------------------------------------------------------------
// Knowledge nodes

struct SummaryRecord {
    std::string functionality;
    std::string core_logic;
    std::string inputs_outputs;
    std::vector<std::string> dependencies;

    std::size_t total_chars() const {
        std::size_t n = functionality.size() + core_logic.size() + inputs_outputs.size();
        for (const auto& d : dependencies) n += d.size();
        return n;
    }
};

struct ContentRef {
    std::string file_path;
    std::optional<std::uint64_t> byte_start;
    std::optional<std::uint64_t> byte_len;
};

struct KnowledgeNode {
    std::string path;
    NodeKind kind = NodeKind::File;
    NodeStatus status = NodeStatus::Compressed;
    std::string abstract_text;
    std::optional<SummaryRecord> summary;
    std::vector<std::string> children;  // node paths, lexicographic
    ContentRef content_ref;
    int depth = 1;

    bool is_leaf() const { return kind == NodeKind::File; }
};

struct AbstractionConfig {
    int compression_depth = 3;
    int max_summary_chars = 2000;
    int max_children_in_prompt = 64;
    std::string backend_id = "mock";
    std::string repo_root;  // recorded so later retrieval can resolve content_refs
    int retry_attempts = 3;
    int retry_base_ms = 100;

    void validate() const {
        if (compression_depth < 1) throw Error("compression_depth must be >= 1");
        if (max_summary_chars < 8) throw Error("max_summary_chars too small");
        if (max_children_in_prompt < 1) throw Error("max_children_in_prompt must be >= 1");
        if (retry_attempts < 1) throw Error("retry_attempts must be >= 1");
    }
};

struct KnowledgeBase {
    int schema_version = kKbSchemaVersion;
    std::string repo_root_fingerprint;
    int compression_depth = 3;
    AbstractionConfig build_config;
    std::map<std::string, KnowledgeNode> nodes;

    const KnowledgeNode& at(const std::string& path) const {
        auto it = nodes.find(path);
        if (it == nodes.end()) throw UnknownNode(path);
        return it->second;
    }
    KnowledgeNode& at(const std::string& path) {
        auto it = nodes.find(path);
        if (it == nodes.end()) throw UnknownNode(path);
        return it->second;
    }
    bool contains(const std::string& path) const { return nodes.count(path) != 0; }
};

// Structural sanity of a whole KB; throws InvariantViolation on first failure.
inline void validate_kb(const KnowledgeBase& kb) {
    if (!kb.contains(kRootPath)) throw InvariantViolation("missing root node");
    if (kb.at(kRootPath).depth != 1) throw InvariantViolation("root depth must be 1");

    std::map<std::string, int> seen_as_child;
    for (const auto& [path, node] : kb.nodes) {
        if (node.path != path) throw InvariantViolation("node key/path mismatch at " + path);
        if (node.is_leaf() && !node.children.empty())
            throw InvariantViolation("file node with children: " + path);
        if (node.status == NodeStatus::Compressed) {
            if (node.abstract_text != kPlaceholderAbstract)
                throw InvariantViolation("compressed node without placeholder abstract: " + path);
            if (node.summary) throw InvariantViolation("compressed node with summary: " + path);
        } else if (!node.summary) {
            throw InvariantViolation("detailed node without summary: " + path);
        }
        if (node.depth < kb.compression_depth && node.status != NodeStatus::Detailed)
            throw InvariantViolation("node above compression depth not detailed: " + path);
        if (node.content_ref.file_path != path)
            throw InvariantViolation("content_ref path mismatch at " + path);
        if (node.kind == NodeKind::Directory &&
            (node.content_ref.byte_start || node.content_ref.byte_len))
            throw InvariantViolation("directory content_ref with byte range: " + path);
        std::string prev;
        for (const auto& c : node.children) {
            if (!kb.contains(c)) throw InvariantViolation("dangling child " + c + " of " + path);
            if (kb.at(c).depth != node.depth + 1)
                throw InvariantViolation("child depth mismatch at " + c);
            if (!prev.empty() && !(prev < c))
                throw InvariantViolation("children not sorted at " + path);
            prev = c;
            ++seen_as_child[c];
        }
    }
    for (const auto& [path, count] : seen_as_child)
        if (count > 1) throw InvariantViolation("node has multiple parents: " + path);

    // Tree closure: everything reachable from the root, exactly once.
    std::size_t reached = 0;
    std::vector<const KnowledgeNode*> stack = {&kb.at(kRootPath)};
    while (!stack.empty()) {
        const KnowledgeNode* n = stack.back();
        stack.pop_back();
        ++reached;
        for (const auto& c : n->children) stack.push_back(&kb.at(c));
    }
    if (reached != kb.nodes.size())
        throw InvariantViolation("child graph does not cover all nodes");
    for (const auto& [path, node] : kb.nodes)
        if (path != kRootPath && seen_as_child.find(path) == seen_as_child.end())
            throw InvariantViolation("orphan node: " + path);
}

// ---------------------------------------------------------------------------
// Persistence (canonical JSON; see README for the schema)

inline json summary_to_json(const SummaryRecord& s) {
    return json{{"core_logic", s.core_logic},
                {"dependencies", s.dependencies},
                {"functionality", s.functionality},
                {"inputs_outputs", s.inputs_outputs}};
}

inline SummaryRecord summary_from_json(const json& j) {
    SummaryRecord s;
    s.functionality = j.at("functionality").get<std::string>();
    s.core_logic = j.at("core_logic").get<std::string>();
    s.inputs_outputs = j.at("inputs_outputs").get<std::string>();
    s.dependencies = j.at("dependencies").get<std::vector<std::string>>();
    return s;
}

inline json config_to_json(const AbstractionConfig& c) {
    return json{{"backend_id", c.backend_id},
                {"compression_depth", c.compression_depth},
                {"max_children_in_prompt", c.max_children_in_prompt},
                {"max_summary_chars", c.max_summary_chars},
                {"repo_root", c.repo_root},
                {"retry_attempts", c.retry_attempts},
                {"retry_base_ms", c.retry_base_ms}};
}

inline AbstractionConfig config_from_json(const json& j) {
    AbstractionConfig c;
    c.backend_id = j.at("backend_id").get<std::string>();
    c.compression_depth = j.at("compression_depth").get<int>();
    c.max_children_in_prompt = j.at("max_children_in_prompt").get<int>();
    c.max_summary_chars = j.at("max_summary_chars").get<int>();
    c.repo_root = j.at("repo_root").get<std::string>();
    c.retry_attempts = j.at("retry_attempts").get<int>();
    c.retry_base_ms = j.at("retry_base_ms").get<int>();
    return c;
}

inline json kb_to_json(const KnowledgeBase& kb) {
    json nodes = json::object();
    for (const auto& [path, n] : kb.nodes) {
        json ref{{"file_path", n.content_ref.file_path}};
        if (n.content_ref.byte_start) ref["byte_start"] = *n.content_ref.byte_start;
        if (n.content_ref.byte_len) ref["byte_len"] = *n.content_ref.byte_len;
        json jn{{"abstract", n.abstract_text},
                {"children", n.children},
                {"content_ref", ref},
                {"depth", n.depth},
                {"kind", to_string(n.kind)},
                {"path", n.path},
                {"status", to_string(n.status)}};
        if (n.summary) jn["summary"] = summary_to_json(*n.summary);
        nodes[path] = std::move(jn);
    }
    return json{{"build_config", config_to_json(kb.build_config)},
                {"compression_depth", kb.compression_depth},
                {"nodes", nodes},
                {"repo_root_fingerprint", kb.repo_root_fingerprint},
                {"schema_version", kb.schema_version}};
}

inline void save_kb(const KnowledgeBase& kb, const fs::path& out) {
    validate_kb(kb);  // refuse to persist a broken KB
    write_json_atomic(out, kb_to_json(kb));
}

inline KnowledgeBase load_kb(const fs::path& in) {
    json j = parse_json_file(in);
    try {
        int version = j.at("schema_version").get<int>();
        if (version != kKbSchemaVersion) throw SchemaMismatch(version, kKbSchemaVersion);

        KnowledgeBase kb;
        kb.schema_version = version;
        kb.repo_root_fingerprint = j.at("repo_root_fingerprint").get<std::string>();
        kb.compression_depth = j.at("compression_depth").get<int>();
        kb.build_config = config_from_json(j.at("build_config"));
        for (const auto& [path, jn] : j.at("nodes").items()) {
            KnowledgeNode n;
            n.path = jn.at("path").get<std::string>();
            n.kind = node_kind_from_string(jn.at("kind").get<std::string>());
            n.status = node_status_from_string(jn.at("status").get<std::string>());
            n.abstract_text = jn.at("abstract").get<std::string>();
            n.children = jn.at("children").get<std::vector<std::string>>();
            n.depth = jn.at("depth").get<int>();
            const auto& ref = jn.at("content_ref");
            n.content_ref.file_path = ref.at("file_path").get<std::string>();
            if (ref.contains("byte_start")) n.content_ref.byte_start = ref.at("byte_start").get<std::uint64_t>();
            if (ref.contains("byte_len")) n.content_ref.byte_len = ref.at("byte_len").get<std::uint64_t>();
            if (jn.contains("summary")) n.summary = summary_from_json(jn.at("summary"));
            kb.nodes[path] = std::move(n);
        }
        validate_kb(kb);
        return kb;
    } catch (const json::exception& e) {
        throw ParseError(in.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Closed-form node counts for the perfect-tree model: sum of B^(l-1) over
// levels from..to, exact integer arithmetic, overflow reported.

inline std::int64_t node_count_at_levels(std::int64_t B, std::int64_t L,
                                         std::int64_t from_level, std::int64_t to_level) {
    if (B < 1) throw Error("branching factor must be >= 1");
    if (from_level < 1 || from_level > to_level || to_level > L)
        throw Error("bad level range");
    if (B == 1) return to_level - from_level + 1;
    std::int64_t total = 0;
    for (std::int64_t l = from_level; l <= to_level; ++l) {
        std::int64_t levels = checked_ipow(B, l - 1);
        if (total > INT64_MAX - levels) throw OverflowError("node_count_at_levels");
        total += levels;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Content access. parse_repository records only structure; summarization and
// generation read file bodies through this interface so tests can run on
// synthetic trees without touching the filesystem.

class ContentSource {
public:
    virtual ~ContentSource() = default;
    virtual std::string read(const std::string& repo_rel_path) const = 0;
};

class FsContentSource : public ContentSource {
public:
    explicit FsContentSource(fs::path root) : root_(std::move(root)) {}
    std::string read(const std::string& rel) const override {
        return read_text_file(rel == kRootPath ? root_ : root_ / rel);
    }

private:
    fs::path root_;
};

class MapContentSource : public ContentSource {
public:
    explicit MapContentSource(std::map<std::string, std::string> files) : files_(std::move(files)) {}
    std::string read(const std::string& rel) const override {
        auto it = files_.find(rel);
        if (it == files_.end()) throw IoFailure(rel);
        return it->second;
    }

private:
    std::map<std::string, std::string> files_;
};

// Fingerprint of the indexed tree: sha256 over a canonical manifest of every
// node path, with sizes and content hashes for files.
inline std::string fingerprint_tree(const RepoTree& tree, const ContentSource& source) {
    std::map<std::string, const RepoNode*> by_path;
    for (const auto& n : tree.nodes) by_path[n.path] = &n;
    std::string manifest;
    for (const auto& [path, n] : by_path) {
        if (n->kind == NodeKind::Directory) {
            manifest += path + "/\n";
        } else {
            std::string content = source.read(path);
            manifest += path + "\n" + std::to_string(content.size()) + "\n" + sha256_hex(content) + "\n";
        }
    }
    return sha256_hex(manifest);
}

}  // namespace hcag
