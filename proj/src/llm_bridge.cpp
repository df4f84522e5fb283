#include "kgprobe/llm_bridge.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "kgprobe/errors.hpp"
#include "kgprobe/io.hpp"
#include "kgprobe/rng.hpp"
#include "kgprobe/text.hpp"

namespace kgprobe {

std::string_view backend_kind_name(BackendKind kind) noexcept {
    switch (kind) {
        case BackendKind::http: return "http";
        case BackendKind::mock_echo: return "mock_echo";
        case BackendKind::mock_ignore: return "mock_ignore";
        case BackendKind::mock_template: return "mock_template";
    }
    return "mock_echo";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept {
    if (name == "http") return BackendKind::http;
    if (name == "mock_echo") return BackendKind::mock_echo;
    if (name == "mock_ignore") return BackendKind::mock_ignore;
    if (name == "mock_template") return BackendKind::mock_template;
    return std::nullopt;
}

BackendSpec parse_backend_spec(const nlohmann::json& doc) {
    BackendSpec spec;
    const auto kind_name = doc.value("kind", std::string("mock_echo"));
    auto kind = parse_backend_kind(kind_name);
    if (!kind) throw ConfigError("backend: unknown kind '" + kind_name + "'");
    spec.kind = *kind;
    spec.endpoint = doc.value("endpoint", std::string());
    spec.model_name = doc.value("model_name", std::string(backend_kind_name(spec.kind)));
    spec.params.temperature = doc.value("temperature", spec.params.temperature);
    spec.params.max_tokens = doc.value("max_tokens", spec.params.max_tokens);
    spec.params.samples = doc.value("samples", spec.params.samples);
    spec.response_path = doc.value("response_path", spec.response_path);
    spec.retry.attempts = doc.value("retry_attempts", spec.retry.attempts);
    spec.retry.initial_backoff = std::chrono::milliseconds(
        doc.value("retry_backoff_ms", static_cast<long long>(spec.retry.initial_backoff.count())));
    spec.timeout = std::chrono::seconds(doc.value("timeout_s", static_cast<long long>(spec.timeout.count())));
    if (spec.params.samples == 0) throw ConfigError("backend: samples must be positive");
    if (spec.model_name.empty()) throw ConfigError("backend: model_name must not be empty");
    return spec;
}

void validate_backend(const BackendSpec& spec) {
    if (spec.kind != BackendKind::http) return;
    if (spec.endpoint.empty()) throw ConfigError("backend '" + spec.model_name + "': http requires an endpoint");
    const char* key = std::getenv(kApiKeyEnv);
    if (key == nullptr || *key == '\0')
        throw ConfigError("backend '" + spec.model_name + "': http requires " + std::string(kApiKeyEnv));
}

std::string prompt_hash(std::string_view text) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

namespace {

class EchoBackend final : public Backend {
public:
    explicit EchoBackend(BackendSpec spec) : spec_(std::move(spec)) {}
    const BackendSpec& spec() const override { return spec_; }

    std::string complete(const Prompt& prompt, std::size_t, std::uint64_t) const override {
        if (prompt.context.objects.empty())
            return "Without supplied facts, the hypothesis restates the problem: " + prompt.problem_statement;
        return "The hypothesis draws on " + join(prompt.context.objects, "; ") + ".";
    }

private:
    BackendSpec spec_;
};

class IgnoreBackend final : public Backend {
public:
    explicit IgnoreBackend(BackendSpec spec) : spec_(std::move(spec)) {}
    const BackendSpec& spec() const override { return spec_; }

    std::string complete(const Prompt& prompt, std::size_t, std::uint64_t) const override {
        return "A targeted materials modification that addresses the stated problem should improve performance: " +
               prompt.problem_statement;
    }

private:
    BackendSpec spec_;
};

class TemplateBackend final : public Backend {
public:
    explicit TemplateBackend(BackendSpec spec) : spec_(std::move(spec)) {}
    const BackendSpec& spec() const override { return spec_; }

    std::string complete(const Prompt& prompt, std::size_t sample_index, std::uint64_t seed) const override {
        static const std::vector<std::string> openers = {
            "We hypothesize that", "A testable hypothesis is that", "It is proposed that"};
        SplitMixEngine rng(derive_seed(derive_seed(seed, prompt.problem_id), static_cast<std::uint64_t>(sample_index)));
        const auto& opener = openers[static_cast<std::size_t>(uniform_index(rng, openers.size()))];

        const auto& ctx = prompt.context;
        if (ctx.triples.empty()) {
            if (!ctx.objects.empty()) return opener + " the problem turns on " + join(ctx.objects, ", ") + ".";
            return opener + " a targeted modification can resolve the following problem: " + prompt.problem_statement;
        }

        std::map<RelationRole, std::string> first;
        for (const auto& t : ctx.triples) first.try_emplace(t.role, t.object);
        auto part = [&](RelationRole role, const std::string& before, const std::string& fallback = {}) {
            auto it = first.find(role);
            return it == first.end() ? fallback : before + it->second;
        };
        std::string text = opener;
        text += part(RelationRole::intervention, " applying ", " modifying the design");
        text += part(RelationRole::component, " to the ");
        text += part(RelationRole::system, " in ");
        text += part(RelationRole::failure, " suppresses ", " changes performance");
        text += part(RelationRole::mechanism, " via ");
        text += part(RelationRole::property, ", improving ");
        text += part(RelationRole::outcome, " to achieve ");
        return text + ".";
    }

private:
    BackendSpec spec_;
};

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendSpec spec) : spec_(std::move(spec)) {
        validate_backend(spec_);
        headers_["Authorization"] = std::string("Bearer ") + std::getenv(kApiKeyEnv);
    }
    const BackendSpec& spec() const override { return spec_; }

    std::string complete(const Prompt& prompt, std::size_t, std::uint64_t) const override {
        const nlohmann::json body{{"model", spec_.model_name},
                                  {"prompt", prompt.full_text},
                                  {"temperature", spec_.params.temperature},
                                  {"max_tokens", spec_.params.max_tokens}};
        const auto response =
            with_retries(spec_.retry, [&] { return post_json(spec_.endpoint, body, headers_, spec_.timeout); });
        if (response.status < 200 || response.status >= 300)
            throw ParseError("completion endpoint returned status " + std::to_string(response.status), response.body);
        try {
            const auto doc = nlohmann::json::parse(response.body);
            return at_path(doc, spec_.response_path).get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed completion response: ") + e.what(), response.body);
        }
    }

private:
    BackendSpec spec_;
    std::map<std::string, std::string> headers_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
    switch (spec.kind) {
        case BackendKind::http: return std::make_unique<HttpBackend>(spec);
        case BackendKind::mock_echo: return std::make_unique<EchoBackend>(spec);
        case BackendKind::mock_ignore: return std::make_unique<IgnoreBackend>(spec);
        case BackendKind::mock_template: return std::make_unique<TemplateBackend>(spec);
    }
    throw ConfigError("unknown backend kind");
}

std::string generation_key(std::string_view problem_id, std::string_view condition, std::string_view model_name,
                           std::size_t sample_index) {
    std::string key;
    key.append(problem_id).append("|").append(condition).append("|").append(model_name);
    return key + "|" + std::to_string(sample_index);
}

std::string GenerationRecord::key() const { return generation_key(problem_id, condition, model_name, sample_index); }

void to_json(nlohmann::json& j, const GenerationRecord& r) {
    j = nlohmann::json{{"problem_id", r.problem_id},     {"condition", r.condition},
                       {"model_name", r.model_name},     {"sample_index", r.sample_index},
                       {"prompt_hash", r.prompt_hash},   {"hypothesis", r.hypothesis},
                       {"length_proxy", r.length_proxy}, {"seed", r.seed}};
}

void from_json(const nlohmann::json& j, GenerationRecord& r) {
    r.problem_id = j.at("problem_id").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.model_name = j.at("model_name").get<std::string>();
    r.sample_index = j.at("sample_index").get<std::size_t>();
    r.prompt_hash = j.at("prompt_hash").get<std::string>();
    r.hypothesis = j.at("hypothesis").get<std::string>();
    r.length_proxy = j.at("length_proxy").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
}

GenerationRecord generate(const Prompt& prompt, const Backend& backend, std::size_t sample_index, std::uint64_t seed) {
    GenerationRecord r;
    r.problem_id = prompt.problem_id;
    r.condition = prompt.condition;
    r.model_name = backend.spec().model_name;
    r.sample_index = sample_index;
    r.prompt_hash = prompt_hash(prompt.full_text);
    r.hypothesis = backend.complete(prompt, sample_index, seed);
    r.length_proxy = prompt.context.length_proxy;
    r.seed = seed;
    return r;
}

GenerationRecord generate(const Prompt& prompt, const BackendSpec& backend, std::size_t sample_index,
                          std::uint64_t seed) {
    return generate(prompt, *make_backend(backend), sample_index, seed);
}

namespace {

// Drops an unterminated last line and returns the keys already on disk.
std::set<std::string> prepare_output(const std::string& path, bool& truncated) {
    std::set<std::string> keys;
    truncated = false;
    if (!std::filesystem::exists(path)) {
        const auto parent = std::filesystem::path(path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        return keys;
    }
    auto content = read_file(path);
    if (!content.empty() && content.back() != '\n') {
        const auto cut = content.rfind('\n');
        content.resize(cut == std::string::npos ? 0 : cut + 1);
        std::filesystem::resize_file(path, content.size());
        truncated = true;
    }
    for (const auto& line : parse_jsonl(content)) {
        const auto key = line.get<GenerationRecord>().key();
        if (!keys.insert(key).second) throw ValidationError(path, "duplicate generation key " + key);
    }
    return keys;
}

struct Job {
    const PlanEntry* entry;
    std::shared_ptr<const Backend> backend;
    std::size_t sample;
};

struct Slot {
    bool done = false;
    std::optional<GenerationRecord> record;
    std::string error;
};

}  // namespace

RunSummary run_experiment(const std::vector<PlanEntry>& plan, const BackendMap& backends, const std::string& out_path,
                          const RunOptions& options) {
    if (plan.empty()) throw ValidationError("plan", "must not be empty");
    RunSummary summary;
    const auto existing = prepare_output(out_path, summary.truncated_partial_line);

    std::vector<Job> jobs;
    std::set<std::string> seen;
    for (const auto& entry : plan) {
        auto it = backends.find(entry.model_name);
        if (it == backends.end()) throw ConfigError("plan references unknown backend '" + entry.model_name + "'");
        if (it->second->spec().model_name != entry.model_name)
            throw ConfigError("backend registered as '" + entry.model_name + "' reports model '" +
                              it->second->spec().model_name + "'");
        for (std::size_t s = 0; s < entry.samples; ++s) {
            const auto key = generation_key(entry.prompt.problem_id, entry.prompt.condition, entry.model_name, s);
            if (!seen.insert(key).second) throw ValidationError("plan", "duplicate key " + key);
            ++summary.planned;
            if (existing.count(key)) {
                ++summary.skipped;
                continue;
            }
            jobs.push_back({&entry, it->second, s});
        }
    }
    if (jobs.empty()) return summary;

    std::vector<Slot> slots(jobs.size());
    std::mutex mutex;
    std::condition_variable ready;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};

    auto worker = [&] {
        for (;;) {
            if (stop.load()) return;
            const auto i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            Slot result;
            try {
                result.record = generate(jobs[i].entry->prompt, *jobs[i].backend, jobs[i].sample, options.seed);
            } catch (const std::exception& e) {
                result.error = e.what();
            }
            {
                std::lock_guard lock(mutex);
                slots[i] = std::move(result);
                slots[i].done = true;
            }
            ready.notify_all();
        }
    };

    const auto n_workers = std::max<std::size_t>(1, std::min(options.max_in_flight, jobs.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);

    std::ofstream out(out_path, std::ios::binary | std::ios::app);
    if (!out) {
        stop = true;
        for (auto& t : pool) t.join();
        throw Error("cannot open " + out_path + " for append");
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        Slot slot;
        {
            std::unique_lock lock(mutex);
            ready.wait(lock, [&] { return slots[i].done; });
            slot = std::move(slots[i]);
        }
        if (slot.record) {
            out << to_jsonl_line(*slot.record);
            out.flush();
            ++summary.written;
        } else {
            const auto& job = jobs[i];
            summary.failed_keys.push_back(
                generation_key(job.entry->prompt.problem_id, job.entry->prompt.condition, job.entry->model_name, job.sample));
            summary.errors.push_back(slot.error);
        }
        if (options.stop_after && summary.written >= *options.stop_after && i + 1 < jobs.size()) {
            summary.stopped_early = true;
            stop = true;
            break;
        }
    }
    stop = true;
    for (auto& t : pool) t.join();
    return summary;
}

std::vector<GenerationRecord> read_generations(const std::string& path) {
    std::vector<GenerationRecord> out;
    for (const auto& line : parse_jsonl(read_file(path))) out.push_back(line.get<GenerationRecord>());
    return out;
}

}  // namespace kgprobe
