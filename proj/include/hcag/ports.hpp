#pragma once
// Pluggable ports for every model-dependent step. Pipelines only see these
// interfaces; the deterministic mock and the remote HTTP backend implement
// them. A shared CallLog records one entry per backend call so cost
// accounting and wall-clock metrics need no instrumentation inside the
// algorithms.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hcag/kb.hpp"

namespace hcag {

enum class Role { Summarize, Judge, Decompose, Generate, Critique, Moderate, Embed };

inline std::string to_string(Role r) {
    switch (r) {
        case Role::Summarize: return "summarize";
        case Role::Judge: return "judge";
        case Role::Decompose: return "decompose";
        case Role::Generate: return "generate";
        case Role::Critique: return "critique";
        case Role::Moderate: return "moderate";
        case Role::Embed: return "embed";
    }
    return "?";
}

struct PortBudget {
    int max_output_chars = 1 << 16;
    int timeout_ms = 60000;
};

struct PortRequest {
    Role role = Role::Summarize;
    std::string system_instructions;
    std::string payload;
    PortBudget budget;
};

// Append-only within a pipeline run.
class CallLog {
public:
    struct Entry {
        Role role;
        std::string subject;  // node path or task id
        std::string request_digest;
        std::string response_digest;
        double wall_ms = 0.0;
    };

    void append(Entry e) {
        std::lock_guard<std::mutex> lock(mu_);
        entries_.push_back(std::move(e));
    }
    std::vector<Entry> entries() const {
        std::lock_guard<std::mutex> lock(mu_);
        return entries_;
    }
    std::int64_t count(Role r) const {
        std::lock_guard<std::mutex> lock(mu_);
        std::int64_t n = 0;
        for (const auto& e : entries_)
            if (e.role == r) ++n;
        return n;
    }
    double wall_span_ms() const {
        std::lock_guard<std::mutex> lock(mu_);
        double total = 0.0;
        for (const auto& e : entries_) total += e.wall_ms;
        return total;
    }
    json to_json() const {
        json arr = json::array();
        for (const auto& e : entries())
            arr.push_back(json{{"role", to_string(e.role)},
                               {"subject", e.subject},
                               {"request_digest", e.request_digest},
                               {"response_digest", e.response_digest},
                               {"wall_ms", e.wall_ms}});
        return json{{"entries", arr}};
    }

private:
    mutable std::mutex mu_;
    std::vector<Entry> entries_;
};

// Low-level text port: one request in, one response out.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string respond(const PortRequest& req) = 0;
};

// respond() + CallLog bookkeeping, shared by all typed adapters.
inline std::string logged_respond(Backend& backend, CallLog* log, const PortRequest& req,
                                  const std::string& subject) {
    auto t0 = std::chrono::steady_clock::now();
    std::string out = backend.respond(req);
    auto t1 = std::chrono::steady_clock::now();
    if (log) {
        CallLog::Entry e;
        e.role = req.role;
        e.subject = subject;
        e.request_digest = sha256_hex(req.system_instructions + "\x1f" + req.payload).substr(0, 16);
        e.response_digest = sha256_hex(out).substr(0, 16);
        e.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        log->append(std::move(e));
    }
    return out;
}

// Retries with exponential backoff; only BackendFailure is retried.
template <typename Fn>
auto with_retries(int attempts, int base_ms, Fn&& fn) -> decltype(fn()) {
    for (int i = 0;; ++i) {
        try {
            return fn();
        } catch (const BackendFailure&) {
            if (i + 1 >= attempts) throw;
            if (base_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(base_ms << i));
        }
    }
}

// ---------------------------------------------------------------------------
// Embeddings: sparse vectors over the run vocabulary (token -> weight for the
// mock, dimension label -> weight for remote models), L2-normalized at
// creation; the zero vector stands for an empty token set.

using Embedding = std::map<std::string, double>;

inline Embedding normalized_embedding(const std::map<std::string, double>& weights) {
    double norm2 = 0.0;
    for (const auto& [k, v] : weights) norm2 += v * v;
    if (norm2 == 0.0) return {};
    double norm = std::sqrt(norm2);
    Embedding out;
    for (const auto& [k, v] : weights)
        if (v != 0.0) out[k] = v / norm;
    return out;
}

inline double l2_norm(const Embedding& e) {
    double n2 = 0.0;
    for (const auto& [k, v] : e) n2 += v * v;
    return std::sqrt(n2);
}

inline double cosine(const Embedding& a, const Embedding& b) {
    if (a.empty() || b.empty()) return 0.0;
    double dot = 0.0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        if (it != b.end()) dot += v * it->second;
    }
    double na = l2_norm(a), nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (na * nb);
}

// ---------------------------------------------------------------------------
// Typed ports

class EmbedderPort {
public:
    virtual ~EmbedderPort() = default;
    virtual Embedding embed(const std::string& text) = 0;
};

struct SummarizeRequest {
    std::string path;
    std::string kind;  // "file" | "directory" | "merge"
    std::string system_instructions;
    std::string payload;
    std::vector<std::string> child_paths;  // presented children (directories)
};

class SummarizerPort {
public:
    virtual ~SummarizerPort() = default;
    virtual SummaryRecord summarize(const SummarizeRequest& req) = 0;
    virtual std::size_t context_budget_chars() const { return 1 << 20; }
};

enum class RelevanceLabel { FullyRelevant, PartiallyRelevant, Irrelevant };

inline std::string to_string(RelevanceLabel l) {
    switch (l) {
        case RelevanceLabel::FullyRelevant: return "fully_relevant";
        case RelevanceLabel::PartiallyRelevant: return "partially_relevant";
        case RelevanceLabel::Irrelevant: return "irrelevant";
    }
    return "?";
}

struct RelevanceVerdict {
    RelevanceLabel label = RelevanceLabel::Irrelevant;
    std::string rationale;
    double score = 0.0;  // judge-side confidence in [0,1]
};

class JudgePort {
public:
    virtual ~JudgePort() = default;
    virtual RelevanceVerdict classify(const std::string& query, const std::string& node_path,
                                      const std::string& node_abstract) = 0;
    // Match-time question: is the candidate a superset of / closely related to
    // the described functionality?
    virtual bool affirms_related(const std::string& description, const std::string& candidate_path,
                                 const std::string& candidate_abstract) = 0;
};

struct DecomposeChild {
    std::string path;
    std::string basename;
    NodeKind kind = NodeKind::File;
    NodeStatus status = NodeStatus::Compressed;
    std::string abstract_text;
};

struct SubtaskSpec {
    std::string child_path;
    NodeKind child_kind = NodeKind::File;
    std::string query;
};

class DecomposerPort {
public:
    virtual ~DecomposerPort() = default;
    // Retrieval-side: split a task over a node's children. Order defines
    // subtask ids.
    virtual std::vector<SubtaskSpec> decompose(const std::string& task_id, const std::string& query,
                                               const std::string& node_path,
                                               const std::vector<DecomposeChild>& children) = 0;
    // Generation-side: split a module description into sub-descriptions.
    virtual std::vector<std::string> decompose_description(const std::string& module_id,
                                                           const std::string& description) = 0;
};

class GeneratorPort {
public:
    virtual ~GeneratorPort() = default;
    virtual std::string generate(const std::string& module_id, const std::string& description,
                                 const std::optional<std::pair<std::string, std::string>>& reference,
                                 const std::vector<std::string>& context) = 0;
};

struct Critique {
    std::string file;
    std::string issue;
    std::string revision;  // full replacement content
};

using ArtifactFiles = std::map<std::string, std::string>;

class CriticPort {
public:
    virtual ~CriticPort() = default;
    virtual std::vector<Critique> critique(const ArtifactFiles& files, const std::string& subject) = 0;
};

struct ModerationResult {
    ArtifactFiles files;
    std::size_t accepted = 0;
};

class ModeratorPort {
public:
    virtual ~ModeratorPort() = default;
    virtual ModerationResult merge(const ArtifactFiles& files, const std::vector<Critique>& critiques,
                                   const std::string& subject) = 0;
};

// Everything a pipeline run needs, with shared ownership.
struct PortBundle {
    std::shared_ptr<Backend> backend;
    std::shared_ptr<CallLog> log;
    std::shared_ptr<SummarizerPort> summarizer;
    std::shared_ptr<JudgePort> judge;
    std::shared_ptr<DecomposerPort> decomposer;
    std::shared_ptr<GeneratorPort> generator;
    std::shared_ptr<EmbedderPort> embedder;
    std::vector<std::shared_ptr<CriticPort>> critics;
    std::shared_ptr<ModeratorPort> moderator;
};

}  // namespace hcag
