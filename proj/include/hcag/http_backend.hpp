#pragma once
// Generic remote HTTP backend: chat-style completions for text roles and an
// embeddings endpoint for Embed. Responses are normalized into the same wire
// formats the typed adapters parse for the mock, so pipelines never branch
// on backend identity. Transport is injectable for tests.

#include <cstdlib>

#include "hcag/ports.hpp"
#include "hcag/prompts.hpp"

namespace hcag {

struct HttpEndpointConfig {
    std::string endpoint;        // e.g. http://host:8000/v1/chat/completions
    std::string model;
    std::string api_key;
    std::string embed_endpoint;  // e.g. http://host:8000/v1/embeddings
    std::string embed_model;
    int attempts = 3;
    int base_backoff_ms = 250;
    int timeout_ms = 60000;

    static HttpEndpointConfig from_env() {
        auto get = [](const char* k) { const char* v = std::getenv(k); return v ? std::string(v) : std::string(); };
        HttpEndpointConfig c;
        c.endpoint = get("HCAG_LLM_ENDPOINT");
        c.model = get("HCAG_LLM_MODEL");
        c.api_key = get("HCAG_LLM_API_KEY");
        c.embed_endpoint = get("HCAG_EMBED_ENDPOINT");
        c.embed_model = get("HCAG_EMBED_MODEL");
        return c;
    }
};

struct HttpResult {
    int status = 0;
    std::string body;
    bool transport_error = false;
    bool timed_out = false;
    std::string error;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResult post(const std::string& url, const std::string& api_key,
                            const std::string& body, int timeout_ms) = 0;
};

// Splits "scheme://host[:port]/path" into origin and path.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("bad endpoint url: " + url);
    auto path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, "/"};
    return {url.substr(0, path), url.substr(path)};
}

class HcagHttpBackend : public Backend {
public:
    HcagHttpBackend(HttpEndpointConfig cfg, std::shared_ptr<HttpTransport> transport)
        : cfg_(std::move(cfg)), transport_(std::move(transport)) {}

    std::string respond(const PortRequest& req) override {
        if (req.role == Role::Embed) return embed(req);
        return chat(req);
    }

private:
    std::string chat(const PortRequest& req) {
        if (cfg_.endpoint.empty()) throw CredentialMissing("HCAG_LLM_ENDPOINT");
        if (cfg_.model.empty()) throw CredentialMissing("HCAG_LLM_MODEL");
        if (cfg_.api_key.empty()) throw CredentialMissing("HCAG_LLM_API_KEY");

        json body{{"model", cfg_.model},
                  {"temperature", 0},
                  {"messages", json::array({json{{"role", "system"},
                                                 {"content", prompt_for(req.role, req) +
                                                                 std::string(req.system_instructions)}},
                                            json{{"role", "user"}, {"content", req.payload}}})}};
        json resp = post_json(cfg_.endpoint, body);
        std::string text;
        try {
            text = resp.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw MalformedResponse(e.what());
        }
        return normalize(req.role, req, text);
    }

    std::string embed(const PortRequest& req) {
        if (cfg_.embed_endpoint.empty()) throw CredentialMissing("HCAG_EMBED_ENDPOINT");
        if (cfg_.embed_model.empty()) throw CredentialMissing("HCAG_EMBED_MODEL");
        if (cfg_.api_key.empty()) throw CredentialMissing("HCAG_LLM_API_KEY");

        json body{{"model", cfg_.embed_model}, {"input", req.payload}};
        json resp = post_json(cfg_.embed_endpoint, body);
        std::string out = "EMB:";
        try {
            const json& vec = resp.at("data").at(0).at("embedding");
            char label[16];
            int i = 0;
            for (const auto& v : vec) {
                std::snprintf(label, sizeof label, "d%05d", i++);
                out += std::string(" ") + label + ":" + std::to_string(v.get<double>());
            }
        } catch (const json::exception& e) {
            throw MalformedResponse(e.what());
        }
        return out;
    }

    json post_json(const std::string& url, const json& body) {
        std::string payload = body.dump();
        for (int attempt = 0;; ++attempt) {
            HttpResult r = transport_->post(url, cfg_.api_key, payload, cfg_.timeout_ms);
            bool retryable = r.timed_out || r.transport_error || r.status == 429 || r.status >= 500;
            if (!retryable && r.status == 200) {
                try {
                    return json::parse(r.body);
                } catch (const json::parse_error& e) {
                    throw MalformedResponse(e.what());
                }
            }
            if (!retryable) throw HttpStatusError(r.status);
            if (attempt + 1 >= cfg_.attempts) {
                if (r.timed_out) throw TimeoutError();
                if (r.transport_error) throw BackendFailure(r.error);
                throw HttpStatusError(r.status);
            }
            if (cfg_.base_backoff_ms > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.base_backoff_ms << attempt));
        }
    }

    static std::string prompt_for(Role role, const PortRequest& req) {
        switch (role) {
            case Role::Summarize:
                return std::string(req.system_instructions.find("directory") != std::string::npos
                                       ? prompts::kSummarizeDirectory
                                       : prompts::kSummarizeFile);
            case Role::Judge:
                return std::string(req.system_instructions.find("affirm") != std::string::npos
                                       ? prompts::kJudgeAffirm
                                       : prompts::kJudgeRelevance);
            case Role::Decompose:
                return std::string(req.system_instructions.find("description") != std::string::npos
                                       ? prompts::kDecomposeDescription
                                       : prompts::kDecomposeTask);
            case Role::Generate: return std::string(prompts::kGenerate);
            case Role::Critique: return std::string(prompts::kCritique);
            case Role::Moderate: return std::string(prompts::kModerate);
            case Role::Embed: return "";
        }
        return "";
    }

    // Rewrites free-form model output into the wire format the shared typed
    // adapters expect.
    static std::string normalize(Role role, const PortRequest& req, const std::string& text) {
        switch (role) {
            case Role::Summarize: return "SUM: " + text;
            case Role::Judge: {
                std::string first = tokenize(text).empty() ? "" : tokenize(text).front();
                if (req.system_instructions.find("affirm") != std::string::npos) {
                    bool yes = first == "yes";
                    return std::string("JUDGE: ") + (yes ? "yes 1/1" : "no 0/1");
                }
                if (first == "fully") return "JUDGE: fully 1/1";
                if (first == "irrelevant") return "JUDGE: irrelevant 0/1";
                if (first == "partial" || first == "partially") return "JUDGE: partial 1/2";
                throw MalformedResponse("judge: " + text);
            }
            case Role::Decompose: return "DEC:\n" + text;
            case Role::Generate:
            case Role::Critique:
            case Role::Moderate: return text;
            case Role::Embed: return text;
        }
        return text;
    }

    HttpEndpointConfig cfg_;
    std::shared_ptr<HttpTransport> transport_;
};

}  // namespace hcag

// The real transport needs cpp-httplib; keep it optional so tests with fake
// transports build without it.
#if __has_include(<httplib.h>)
#include <httplib.h>

namespace hcag {

class HttplibTransport : public HttpTransport {
public:
    HttpResult post(const std::string& url, const std::string& api_key, const std::string& body,
                    int timeout_ms) override {
        auto [origin, path] = split_url(url);
        httplib::Client client(origin);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key}};
        auto res = client.Post(path, headers, body, "application/json");
        HttpResult out;
        if (!res) {
            out.transport_error = true;
            out.timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                            res.error() == httplib::Error::Read;
            out.error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    }
};

}  // namespace hcag
#endif
