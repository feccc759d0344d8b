#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "graf/kg.hpp"

namespace graf {

enum class PromptLanguage { en, ro };

PromptLanguage parse_prompt_language(std::string_view s);

/// Few-shot triplet extraction prompt with `document` in the Text slot.
std::string render_prompt(std::string_view document, PromptLanguage lang = PromptLanguage::en);

/// Recovers the Text slot from a prompt produced by render_prompt; returns
/// the whole input when it is not such a prompt.
std::string_view prompt_document(std::string_view prompt);

/// 64-bit FNV-1a of the prompt as 16 lowercase hex digits. Fixture
/// directories name canned completions "<hash>.txt".
std::string prompt_hash(std::string_view prompt);

class ClientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Synchronous text completion: prompt in, completion out. Implementations
/// used with `answer --jobs N` must be safe to call concurrently.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual std::string complete(const std::string& prompt) const = 0;
};

/// Always returns the same completion.
class CannedClient final : public CompletionClient {
public:
    explicit CannedClient(std::string completion) : completion_(std::move(completion)) {}
    std::string complete(const std::string&) const override { return completion_; }

private:
    std::string completion_;
};

/// Deterministic stand-in for an LLM: answers with the "(h;r;t)" patterns
/// embedded in the prompt's Text slot, followed by STOP.
class PatternClient final : public CompletionClient {
public:
    std::string complete(const std::string& prompt) const override;
};

/// Looks up "<dir>/<prompt_hash(prompt)>.txt".
class FixtureClient final : public CompletionClient {
public:
    explicit FixtureClient(std::filesystem::path dir);
    std::string complete(const std::string& prompt) const override;

private:
    std::filesystem::path dir_;
};

/// POSTs {"model", "prompt", ...} as JSON to an OpenAI-style completions
/// endpoint (http only). Accepts choices[0].text, choices[0].message.content,
/// "response" or "completion" in the reply.
class HttpClient final : public CompletionClient {
public:
    HttpClient(std::string url, std::string model, std::string bearer_token = {}, int timeout_seconds = 120);
    std::string complete(const std::string& prompt) const override;

private:
    std::string origin_;
    std::string path_;
    std::string model_;
    std::string token_;
    int timeout_;
};

struct ExtractionResult {
    ClaimGraph graph;
    bool empty_warning = false;
    std::size_t attempts = 0;
    std::size_t skipped_lines = 0;
};

/// Cross claim extraction: prompt over question + " " + choice, parse the
/// triplets, retry once when nothing parses.
ExtractionResult extract_claims(std::string_view question, std::string_view choice, const CompletionClient& client,
                                PromptLanguage lang = PromptLanguage::en);

/// Claim graph from the "(h;r;t)" patterns embedded in free text.
ClaimGraph stub_extract(std::string_view text);

class ClaimExtractor {
public:
    virtual ~ClaimExtractor() = default;
    virtual ExtractionResult extract(std::string_view question, std::string_view choice) const = 0;
};

class LlmClaimExtractor final : public ClaimExtractor {
public:
    LlmClaimExtractor(std::shared_ptr<const CompletionClient> client, PromptLanguage lang = PromptLanguage::en)
        : client_(std::move(client)), lang_(lang) {}
    ExtractionResult extract(std::string_view question, std::string_view choice) const override {
        return extract_claims(question, choice, *client_, lang_);
    }

private:
    std::shared_ptr<const CompletionClient> client_;
    PromptLanguage lang_;
};

class StubClaimExtractor final : public ClaimExtractor {
public:
    ExtractionResult extract(std::string_view question, std::string_view choice) const override;
};

/// Ablation: always produces an empty claim graph.
class NullClaimExtractor final : public ClaimExtractor {
public:
    ExtractionResult extract(std::string_view, std::string_view) const override { return {}; }
};

}  // namespace graf
