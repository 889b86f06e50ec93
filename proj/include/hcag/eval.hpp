#pragma once
// Evaluation harness: exact character-level edit similarity against golden
// references, plus pluggable external hooks for judge-scored code quality
// (CQ) and execution-based requirement pass rate (RPR).

#include <cstdio>
#include <optional>

#include "hcag/util.hpp"

namespace hcag {

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// 1 - lev(a, b) / max(|a|, |b|); 1.0 when both strings are empty.
inline double edit_similarity(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t m = std::max(a.size(), b.size());
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

struct EvalHooks {
    std::optional<std::string> cq_cmd;   // prints one float in [0,1]
    std::optional<std::string> rpr_cmd;  // prints PASS or FAIL as its last line
};

struct EvalReport {
    double ts = 0.0;
    std::optional<double> cq;
    std::optional<double> rpr;
    double at_seconds = 0.0;
    json per_task = json::array();

    json to_json() const {
        json j{{"at_seconds", at_seconds}, {"per_task", per_task}, {"ts", ts}};
        if (cq) j["cq"] = *cq;
        if (rpr) j["rpr"] = *rpr;
        return j;
    }
};

namespace evaldetail {

inline std::map<std::string, std::string> scan_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    std::error_code ec;
    for (fs::recursive_directory_iterator it(dir, ec), end; it != end; it.increment(ec)) {
        if (ec) throw IoFailure(dir.string());
        if (it->is_regular_file())
            out[fs::relative(it->path(), dir).generic_string()] = read_text_file(it->path());
    }
    return out;
}

struct HookResult {
    int exit_code = 0;
    std::string output;
};

inline HookResult run_hook(const std::string& cmd, const std::string& artifact_dir,
                           const std::string& task_file) {
    std::string full = cmd + " '" + artifact_dir + "' '" + task_file + "' 2>/dev/null";
    FILE* pipe = ::popen(full.c_str(), "r");
    if (!pipe) throw HookFailure(cmd, "popen failed");
    HookResult r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
    int status = ::pclose(pipe);
    r.exit_code = status == -1 ? -1 : WEXITSTATUS(status);
    return r;
}

inline std::string last_line(const std::string& text) {
    std::size_t end = text.find_last_not_of("\r\n");
    if (end == std::string::npos) return "";
    std::size_t start = text.find_last_of('\n', end);
    return text.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace evaldetail

// TS over in-memory file maps: mean over generated files of the best edit
// similarity against any golden file (goldens reusable across files).
inline double text_similarity(const std::map<std::string, std::string>& generated,
                              const std::map<std::string, std::string>& golden) {
    if (generated.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [path, text] : generated) {
        double best = 0.0;
        for (const auto& [gpath, gtext] : golden)
            best = std::max(best, edit_similarity(text, gtext));
        total += best;
    }
    return total / static_cast<double>(generated.size());
}

inline EvalReport evaluate(const fs::path& artifact_dir, const fs::path& golden_dir,
                           const EvalHooks& hooks = {}, const std::string& task_file = "",
                           double at_seconds = 0.0) {
    std::error_code ec;
    if (!fs::is_directory(golden_dir, ec) || ec) throw GoldenMissing(golden_dir.string());
    if (!fs::is_directory(artifact_dir, ec) || ec) throw IoFailure(artifact_dir.string());

    auto generated = evaldetail::scan_files(artifact_dir);
    auto golden = evaldetail::scan_files(golden_dir);

    EvalReport report;
    report.at_seconds = at_seconds;
    report.ts = text_similarity(generated, golden);
    for (const auto& [path, text] : generated) {
        double best = 0.0;
        std::string best_golden;
        for (const auto& [gpath, gtext] : golden) {
            double es = edit_similarity(text, gtext);
            if (es > best || (es == best && best_golden.empty())) {
                best = es;
                best_golden = gpath;
            }
        }
        report.per_task.push_back(json{{"best_golden", best_golden}, {"es", best}, {"file", path}});
    }

    if (hooks.cq_cmd) {
        auto r = evaldetail::run_hook(*hooks.cq_cmd, artifact_dir.string(), task_file);
        if (r.exit_code != 0) throw HookFailure(*hooks.cq_cmd, r.exit_code);
        try {
            double v = std::stod(evaldetail::last_line(r.output));
            if (v < 0.0 || v > 1.0) throw HookFailure(*hooks.cq_cmd, "score out of [0,1]");
            report.cq = v;
        } catch (const std::invalid_argument&) {
            throw HookFailure(*hooks.cq_cmd, "did not print a float");
        }
    }
    if (hooks.rpr_cmd) {
        auto r = evaldetail::run_hook(*hooks.rpr_cmd, artifact_dir.string(), task_file);
        if (r.exit_code != 0) throw HookFailure(*hooks.rpr_cmd, r.exit_code);
        std::string verdict = evaldetail::last_line(r.output);
        if (verdict == "PASS") report.rpr = 1.0;
        else if (verdict == "FAIL") report.rpr = 0.0;
        else throw HookFailure(*hooks.rpr_cmd, "last line must be PASS or FAIL");
    }
    return report;
}

}  // namespace hcag
