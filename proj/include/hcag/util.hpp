#pragma once
// Small shared helpers: tokenization, frequency digests, SHA-256, canonical
// JSON emission and atomic file writes. Everything here is deterministic.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "hcag/errors.hpp"

namespace hcag {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Lowercased maximal runs of [a-z0-9_]. This is the single tokenizer used by
// every mock rule (digests, judge overlap, decomposition matching), so all
// hand-traceable fixtures share one vocabulary convention.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '_') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::set<std::string> token_set(std::string_view text) {
    auto toks = tokenize(text);
    return {toks.begin(), toks.end()};
}

inline std::map<std::string, int> token_counts(std::string_view text) {
    std::map<std::string, int> counts;
    for (auto& t : tokenize(text)) ++counts[t];
    return counts;
}

// Top-k tokens by (frequency desc, token asc), space-joined. The canonical
// mock summarizer digest.
inline std::string frequency_digest(std::string_view text, std::size_t k = 5) {
    auto counts = token_counts(text);
    std::vector<std::pair<std::string, int>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::string out;
    for (std::size_t i = 0; i < items.size() && i < k; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += items[i].first;
    }
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

inline std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoFailure(p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoFailure(p.string());
    return ss.str();
}

// Write-temp-then-rename so readers never observe a partial file.
inline void write_text_atomic(const fs::path& p, std::string_view data) {
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure(tmp.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw IoFailure(tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, p, ec);
    if (ec) throw IoFailure(p.string() + ": " + ec.message());
}

// Canonical serialized form used for every artifact this library persists:
// sorted keys (nlohmann objects are std::map-backed), two-space indent,
// newline-terminated UTF-8.
inline std::string canonical_json(const json& j) { return j.dump(2) + "\n"; }

inline void write_json_atomic(const fs::path& p, const json& j) {
    write_text_atomic(p, canonical_json(j));
}

inline json parse_json_file(const fs::path& p) {
    std::string text = read_text_file(p);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(p.string() + ": " + e.what());
    }
}

}  // namespace hcag
