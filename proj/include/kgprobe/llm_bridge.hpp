#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgprobe/http.hpp"
#include "kgprobe/verbalize.hpp"

namespace kgprobe {

enum class BackendKind { http, mock_echo, mock_ignore, mock_template };

std::string_view backend_kind_name(BackendKind kind) noexcept;
std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept;

inline constexpr const char* kApiKeyEnv = "KGPROBE_API_KEY";

struct GenerationParams {
    double temperature = 0.7;
    std::size_t max_tokens = 256;
    std::size_t samples = 1;
};

struct BackendSpec {
    BackendKind kind = BackendKind::mock_echo;
    std::string endpoint;  // http only
    std::string model_name;
    GenerationParams params;
    std::string response_path = "choices/0/text";
    RetryPolicy retry;
    std::chrono::seconds timeout{120};
};

// Reads {kind, endpoint, model_name, temperature, max_tokens, samples,
// response_path, retry_attempts, retry_backoff_ms}. A missing model_name
// defaults to the kind name.
BackendSpec parse_backend_spec(const nlohmann::json& doc);

// Throws ConfigError when an http spec lacks an endpoint or the credential
// variable is unset.
void validate_backend(const BackendSpec& spec);

// FNV-1a of the full prompt text as 16 lowercase hex digits.
std::string prompt_hash(std::string_view text);

class Backend {
public:
    virtual ~Backend() = default;
    virtual const BackendSpec& spec() const = 0;
    // Returns the hypothesis text for one sample.
    virtual std::string complete(const Prompt& prompt, std::size_t sample_index, std::uint64_t seed) const = 0;
};

// Echo: one sentence listing every object string in the context.
// Ignore: a fixed paraphrase of the problem statement.
// Template: a role-aware sentence filled from the context triples, with the
// opening phrase drawn from (seed, sample_index).
std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

struct GenerationRecord {
    std::string problem_id;
    std::string condition;
    std::string model_name;
    std::size_t sample_index = 0;
    std::string prompt_hash;
    std::string hypothesis;
    std::size_t length_proxy = 0;
    std::uint64_t seed = 0;

    bool operator==(const GenerationRecord&) const = default;

    std::string key() const;
};

std::string generation_key(std::string_view problem_id, std::string_view condition, std::string_view model_name,
                           std::size_t sample_index);

void to_json(nlohmann::json& j, const GenerationRecord& r);
void from_json(const nlohmann::json& j, GenerationRecord& r);

GenerationRecord generate(const Prompt& prompt, const Backend& backend, std::size_t sample_index,
                          std::uint64_t seed = 0);
GenerationRecord generate(const Prompt& prompt, const BackendSpec& backend, std::size_t sample_index,
                          std::uint64_t seed = 0);

struct PlanEntry {
    Prompt prompt;
    std::string model_name;  // key into the backend map
    std::size_t samples = 1;
};

struct RunOptions {
    std::size_t max_in_flight = 4;
    std::uint64_t seed = 0;
    // Stop after this many new records are written, as if the process were
    // killed. Used to exercise resumption.
    std::optional<std::size_t> stop_after;
};

struct RunSummary {
    std::size_t planned = 0;
    std::size_t skipped = 0;  // already present in the output file
    std::size_t written = 0;
    std::vector<std::string> failed_keys;
    std::vector<std::string> errors;
    bool truncated_partial_line = false;
    bool stopped_early = false;

    bool complete() const noexcept { return failed_keys.empty() && !stopped_early; }
};

using BackendMap = std::map<std::string, std::shared_ptr<const Backend>>;

// Executes the plan with at most max_in_flight concurrent generations and
// appends records to `out_path` in plan order, expanding samples innermost.
// Keys already present are skipped; a torn final line left by an interrupted
// run is truncated first.
RunSummary run_experiment(const std::vector<PlanEntry>& plan, const BackendMap& backends, const std::string& out_path,
                          const RunOptions& options = {});

std::vector<GenerationRecord> read_generations(const std::string& path);

}  // namespace kgprobe
