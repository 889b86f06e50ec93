#pragma once
// Fully deterministic mock backend. Every response is a pure function of the
// request, so entire pipeline runs are reproducible byte for byte. The rules
// are documented here and frozen by the test suite:
//
//   Summarize  -> "SUM: " + top-5 payload tokens by (frequency desc, token asc)
//   Judge      -> "JUDGE: <label> <k>/<n>", overlap ratio of query tokens
//                 found in the abstract, labelled against the configured
//                 thresholds (affirm mode answers yes/no at ratio >= 1/2)
//   Decompose  -> one subtask line per child whose match text shares >= 1
//                 query token; a child's match text is its abstract, or its
//                 basename while the child is still compressed. The subtask
//                 query keeps the shared tokens in query order and appends
//                 the child path as a context tag after " @@ ".
//   Generate   -> fixed stub template with "# ref:" / "# section i:" markers
//   Critique   -> configurable rule list (default empty); the one built-in
//                 rule flags files missing a trailing newline
//   Moderate   -> accepts every critique, applies them in order as full-file
//                 replacements
//   Embed      -> "EMB:" + exact bag-of-words counts, token-sorted; adapters
//                 L2-normalize

#include <sstream>

#include "hcag/ports.hpp"

namespace hcag {

struct MockConfig {
    double fully_threshold = 0.8;
    double irrelevant_threshold = 0.1;
    std::size_t context_budget_chars = 1 << 20;
    std::vector<std::string> critic_rules;  // e.g. {"trailing_newline"}
};

namespace mockdetail {

inline std::string query_of(const std::string& payload, std::string* rest = nullptr) {
    auto sep = payload.find("\n-----\n");
    if (sep == std::string::npos) {
        if (rest) rest->clear();
        return payload;
    }
    if (rest) *rest = payload.substr(sep + 7);
    return payload.substr(0, sep);
}

// Query tokens, in order of first appearance, restricted to `keep`.
inline std::string restrict_query(const std::string& query, const std::set<std::string>& keep) {
    std::string out;
    std::set<std::string> used;
    for (const auto& t : tokenize(query)) {
        if (keep.count(t) && !used.count(t)) {
            if (!out.empty()) out.push_back(' ');
            out += t;
            used.insert(t);
        }
    }
    return out;
}

}  // namespace mockdetail

class MockBackend : public Backend {
public:
    explicit MockBackend(MockConfig cfg = {}) : cfg_(cfg) {}

    const MockConfig& config() const { return cfg_; }

    std::string respond(const PortRequest& req) override {
        switch (req.role) {
            case Role::Summarize: return "SUM: " + frequency_digest(req.payload);
            case Role::Judge: return judge(req);
            case Role::Decompose: return decompose(req);
            case Role::Generate: return generate(req);
            case Role::Critique: return critique(req);
            case Role::Moderate: return moderate(req);
            case Role::Embed: return embed(req);
        }
        throw BackendFailure("unknown role");
    }

private:
    std::string judge(const PortRequest& req) const {
        std::string abstract_text;
        std::string query = mockdetail::query_of(req.payload, &abstract_text);
        auto q = token_set(query);
        auto a = token_set(abstract_text);
        std::size_t shared = 0;
        for (const auto& t : q)
            if (a.count(t)) ++shared;
        std::size_t n = q.size();
        std::string frac = std::to_string(shared) + "/" + std::to_string(n);
        double ratio = n == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(n);
        if (req.system_instructions.find("affirm") != std::string::npos)
            return std::string("JUDGE: ") + (ratio >= 0.5 ? "yes " : "no ") + frac;
        const char* label = "partial";
        if (ratio >= cfg_.fully_threshold) label = "fully";
        else if (ratio <= cfg_.irrelevant_threshold) label = "irrelevant";
        return std::string("JUDGE: ") + label + " " + frac;
    }

    std::string decompose(const PortRequest& req) const {
        if (req.system_instructions.find("description") != std::string::npos) {
            // Split a module description on the literal " and ".
            std::string desc = req.payload;
            std::vector<std::string> parts;
            std::size_t pos = 0;
            while (true) {
                auto at = desc.find(" and ", pos);
                if (at == std::string::npos) break;
                parts.push_back(desc.substr(pos, at - pos));
                pos = at + 5;
            }
            parts.push_back(desc.substr(pos));
            std::string out = "DEC:";
            if (parts.size() < 2) return out;  // nothing to split
            for (const auto& p : parts)
                if (!p.empty()) out += "\n" + p;
            return out;
        }
        std::string rest;
        std::string query = mockdetail::query_of(req.payload, &rest);
        auto q = token_set(query);
        std::string out = "DEC:";
        std::istringstream lines(rest);
        std::string line;
        while (std::getline(lines, line)) {
            auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            std::string path = line.substr(0, tab);
            std::string match_text = line.substr(tab + 1);
            std::set<std::string> shared;
            for (const auto& t : token_set(match_text))
                if (q.count(t)) shared.insert(t);
            if (shared.empty()) continue;
            out += "\n" + path + "\t" + mockdetail::restrict_query(query, shared) + " @@ " + path;
        }
        return out;
    }

    std::string generate(const PortRequest& req) const {
        json j = json::parse(req.payload);
        std::string out = "# module: " + j.at("description").get<std::string>() + "\n";
        if (j.contains("ref")) out += "# ref: " + j.at("ref").get<std::string>() + "\n";
        int i = 0;
        for (const auto& head : j.at("context_heads"))
            out += "# section " + std::to_string(i++) + ": " + head.get<std::string>() + "\n";
        out += "# body: stub for " + j.at("description").get<std::string>() + "\n";
        return out;
    }

    std::string critique(const PortRequest& req) const {
        json files = json::parse(req.payload).at("files");
        json out = json::array();
        for (const auto& rule : cfg_.critic_rules) {
            if (rule == "trailing_newline") {
                for (const auto& [path, content] : files.items()) {
                    std::string text = content.get<std::string>();
                    if (!text.empty() && text.back() != '\n')
                        out.push_back(json{{"file", path},
                                           {"issue", "missing trailing newline"},
                                           {"revision", text + "\n"}});
                    else if (text.empty())
                        out.push_back(json{{"file", path},
                                           {"issue", "missing trailing newline"},
                                           {"revision", "\n"}});
                }
            }
        }
        return out.dump();
    }

    std::string moderate(const PortRequest& req) const {
        json j = json::parse(req.payload);
        json files = j.at("files");
        std::size_t accepted = 0;
        for (const auto& c : j.at("critiques")) {
            files[c.at("file").get<std::string>()] = c.at("revision").get<std::string>();
            ++accepted;
        }
        return json{{"files", files}, {"accepted", accepted}}.dump();
    }

    std::string embed(const PortRequest& req) const {
        auto counts = token_counts(req.payload);
        std::string out = "EMB:";
        for (const auto& [tok, n] : counts) out += " " + tok + ":" + std::to_string(n);
        return out;
    }

    MockConfig cfg_;
};

// ---------------------------------------------------------------------------
// Typed adapters over a Backend. These only format requests and parse
// responses; behaviour never branches on the backend's identity.

class BackendSummarizerPort : public SummarizerPort {
public:
    BackendSummarizerPort(std::shared_ptr<Backend> b, std::shared_ptr<CallLog> log,
                          std::size_t budget_chars)
        : backend_(std::move(b)), log_(std::move(log)), budget_(budget_chars) {}

    SummaryRecord summarize(const SummarizeRequest& req) override {
        PortRequest pr;
        pr.role = Role::Summarize;
        pr.system_instructions = req.system_instructions;
        pr.payload = req.payload;
        std::string resp = logged_respond(*backend_, log_.get(), pr, req.path);
        std::string digest = resp.rfind("SUM: ", 0) == 0 ? resp.substr(5) : resp;
        SummaryRecord rec;
        rec.functionality = digest;
        rec.core_logic = "freq digest of " + std::to_string(tokenize(req.payload).size()) + " tokens";
        rec.inputs_outputs = (req.kind == "directory" ? "dir " : "file ") + req.path;
        rec.dependencies = req.child_paths;
        return rec;
    }
    std::size_t context_budget_chars() const override { return budget_; }

private:
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<CallLog> log_;
    std::size_t budget_;
};

class BackendJudgePort : public JudgePort {
public:
    BackendJudgePort(std::shared_ptr<Backend> b, std::shared_ptr<CallLog> log)
        : backend_(std::move(b)), log_(std::move(log)) {}

    RelevanceVerdict classify(const std::string& query, const std::string& node_path,
                              const std::string& node_abstract) override {
        PortRequest pr;
        pr.role = Role::Judge;
        pr.system_instructions = "classify relevance of a node abstract to the task";
        pr.payload = query + "\n-----\n" + node_abstract;
        std::string resp = logged_respond(*backend_, log_.get(), pr, node_path);
        return parse_verdict(resp);
    }

    bool affirms_related(const std::string& description, const std::string& candidate_path,
                         const std::string& candidate_abstract) override {
        PortRequest pr;
        pr.role = Role::Judge;
        pr.system_instructions = "affirm whether the candidate is a superset or closely related";
        pr.payload = description + "\n-----\n" + candidate_abstract;
        std::string resp = logged_respond(*backend_, log_.get(), pr, candidate_path);
        std::istringstream ss(resp);
        std::string tag, answer;
        ss >> tag >> answer;
        return answer == "yes";
    }

private:
    static RelevanceVerdict parse_verdict(const std::string& resp) {
        std::istringstream ss(resp);
        std::string tag, label, frac;
        ss >> tag >> label >> frac;
        RelevanceVerdict v;
        if (label == "fully") v.label = RelevanceLabel::FullyRelevant;
        else if (label == "partial") v.label = RelevanceLabel::PartiallyRelevant;
        else if (label == "irrelevant") v.label = RelevanceLabel::Irrelevant;
        else throw MalformedResponse("judge: " + resp);
        auto slash = frac.find('/');
        if (slash == std::string::npos) throw MalformedResponse("judge: " + resp);
        double num = std::stod(frac.substr(0, slash));
        double den = std::stod(frac.substr(slash + 1));
        v.score = den == 0.0 ? 0.0 : num / den;
        v.rationale = "token overlap " + frac;
        return v;
    }

    std::shared_ptr<Backend> backend_;
    std::shared_ptr<CallLog> log_;
};

class BackendDecomposerPort : public DecomposerPort {
public:
    BackendDecomposerPort(std::shared_ptr<Backend> b, std::shared_ptr<CallLog> log)
        : backend_(std::move(b)), log_(std::move(log)) {}

    std::vector<SubtaskSpec> decompose(const std::string& task_id, const std::string& query,
                                       const std::string& node_path,
                                       const std::vector<DecomposeChild>& children) override {
        PortRequest pr;
        pr.role = Role::Decompose;
        pr.system_instructions = "split the task over the node's children";
        std::string payload = query + "\n-----\n";
        std::map<std::string, NodeKind> kinds;
        for (const auto& c : children) {
            // A compressed child has only its placeholder abstract; its
            // basename is the one piece of real signal available, so that is
            // what the decomposer matches against.
            const std::string& match_text =
                c.status == NodeStatus::Detailed ? c.abstract_text : c.basename;
            payload += c.path + "\t" + match_text + "\n";
            kinds[c.path] = c.kind;
        }
        pr.payload = payload;
        std::string resp = logged_respond(*backend_, log_.get(), pr, task_id);
        std::vector<SubtaskSpec> out;
        std::istringstream lines(resp);
        std::string line;
        std::getline(lines, line);  // "DEC:" header
        while (std::getline(lines, line)) {
            auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            SubtaskSpec s;
            s.child_path = line.substr(0, tab);
            s.query = line.substr(tab + 1);
            auto k = kinds.find(s.child_path);
            if (k == kinds.end()) throw MalformedResponse("decompose: unknown child " + s.child_path);
            s.child_kind = k->second;
            out.push_back(std::move(s));
        }
        return out;
    }

    std::vector<std::string> decompose_description(const std::string& module_id,
                                                   const std::string& description) override {
        PortRequest pr;
        pr.role = Role::Decompose;
        pr.system_instructions = "split the module description into sub-tasks";
        pr.payload = description;
        std::string resp = logged_respond(*backend_, log_.get(), pr, module_id);
        std::vector<std::string> out;
        std::istringstream lines(resp);
        std::string line;
        std::getline(lines, line);  // header
        while (std::getline(lines, line))
            if (!line.empty()) out.push_back(line);
        return out;
    }

private:
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<CallLog> log_;
};

class BackendGeneratorPort : public GeneratorPort {
public:
    BackendGeneratorPort(std::shared_ptr<Backend> b, std::shared_ptr<CallLog> log)
        : backend_(std::move(b)), log_(std::move(log)) {}

    std::string generate(const std::string& module_id, const std::string& description,
                         const std::optional<std::pair<std::string, std::string>>& reference,
                         const std::vector<std::string>& context) override {
        json payload{{"description", description}, {"context_heads", json::array()}};
        if (reference) payload["ref"] = reference->first;
        for (const auto& c : context) {
            auto nl = c.find('\n');
            payload["context_heads"].push_back(nl == std::string::npos ? c : c.substr(0, nl));
        }
        PortRequest pr;
        pr.role = Role::Generate;
        pr.system_instructions = "generate the module";
        pr.payload = payload.dump();
        return logged_respond(*backend_, log_.get(), pr, module_id);
    }

private:
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<CallLog> log_;
};

class BackendCriticPort : public CriticPort {
public:
    BackendCriticPort(std::shared_ptr<Backend> b, std::shared_ptr<CallLog> log)
        : backend_(std::move(b)), log_(std::move(log)) {}

    std::vector<Critique> critique(const ArtifactFiles& files, const std::string& subject) override {
        PortRequest pr;
        pr.role = Role::Critique;
        pr.system_instructions = "review the artifact";
        pr.payload = json{{"files", files}}.dump();
        std::string resp = logged_respond(*backend_, log_.get(), pr, subject);
        std::vector<Critique> out;
        for (const auto& c : json::parse(resp))
            out.push_back(Critique{c.at("file").get<std::string>(), c.at("issue").get<std::string>(),
                                   c.at("revision").get<std::string>()});
        return out;
    }

private:
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<CallLog> log_;
};

class BackendModeratorPort : public ModeratorPort {
public:
    BackendModeratorPort(std::shared_ptr<Backend> b, std::shared_ptr<CallLog> log)
        : backend_(std::move(b)), log_(std::move(log)) {}

    ModerationResult merge(const ArtifactFiles& files, const std::vector<Critique>& critiques,
                           const std::string& subject) override {
        json cr = json::array();
        for (const auto& c : critiques)
            cr.push_back(json{{"file", c.file}, {"issue", c.issue}, {"revision", c.revision}});
        PortRequest pr;
        pr.role = Role::Moderate;
        pr.system_instructions = "merge accepted critiques";
        pr.payload = json{{"files", files}, {"critiques", cr}}.dump();
        json resp = json::parse(logged_respond(*backend_, log_.get(), pr, subject));
        ModerationResult out;
        out.accepted = resp.at("accepted").get<std::size_t>();
        for (const auto& [path, content] : resp.at("files").items())
            out.files[path] = content.get<std::string>();
        return out;
    }

private:
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<CallLog> log_;
};

class BackendEmbedderPort : public EmbedderPort {
public:
    BackendEmbedderPort(std::shared_ptr<Backend> b, std::shared_ptr<CallLog> log)
        : backend_(std::move(b)), log_(std::move(log)) {}

    Embedding embed(const std::string& text) override {
        PortRequest pr;
        pr.role = Role::Embed;
        pr.system_instructions = "embed";
        pr.payload = text;
        std::string resp = logged_respond(*backend_, log_.get(), pr, "");
        std::map<std::string, double> weights;
        std::istringstream ss(resp.rfind("EMB:", 0) == 0 ? resp.substr(4) : resp);
        std::string item;
        while (ss >> item) {
            auto colon = item.rfind(':');
            if (colon == std::string::npos) throw MalformedResponse("embed: " + resp);
            weights[item.substr(0, colon)] = std::stod(item.substr(colon + 1));
        }
        return normalized_embedding(weights);
    }

private:
    std::shared_ptr<Backend> backend_;
    std::shared_ptr<CallLog> log_;
};

// Built-in scripted critic used by tests and the debate contract checks.
class TrailingNewlineCritic : public CriticPort {
public:
    std::vector<Critique> critique(const ArtifactFiles& files, const std::string&) override {
        std::vector<Critique> out;
        for (const auto& [path, content] : files)
            if (content.empty() || content.back() != '\n')
                out.push_back(Critique{path, "missing trailing newline", content + "\n"});
        return out;
    }
};

inline PortBundle make_mock_ports(const MockConfig& cfg = {}, std::size_t num_critics = 1) {
    PortBundle b;
    b.backend = std::make_shared<MockBackend>(cfg);
    b.log = std::make_shared<CallLog>();
    b.summarizer = std::make_shared<BackendSummarizerPort>(b.backend, b.log, cfg.context_budget_chars);
    b.judge = std::make_shared<BackendJudgePort>(b.backend, b.log);
    b.decomposer = std::make_shared<BackendDecomposerPort>(b.backend, b.log);
    b.generator = std::make_shared<BackendGeneratorPort>(b.backend, b.log);
    b.embedder = std::make_shared<BackendEmbedderPort>(b.backend, b.log);
    for (std::size_t i = 0; i < num_critics; ++i)
        b.critics.push_back(std::make_shared<BackendCriticPort>(b.backend, b.log));
    b.moderator = std::make_shared<BackendModeratorPort>(b.backend, b.log);
    return b;
}

}  // namespace hcag
