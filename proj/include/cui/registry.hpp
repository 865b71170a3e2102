#pragma once

#include "cui/providers.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cui::providers {

enum class Role { stt, llm, tts };

std::string_view role_name(Role role);

// Which backend serves one pipeline stage, as named in the session config.
struct ProviderSelector {
    std::string provider;
    std::string model;
    std::string endpoint;

    bool operator==(const ProviderSelector&) const = default;
};

struct ProviderMeta {
    bool streaming = false;
    bool local = false;
};

// Everything a factory gets to build a configured instance for one session.
struct ResolveContext {
    ProviderSelector selector;
    std::string api_key;            // empty when the config supplies none
    nlohmann::json provider_params; // free-form tuning values
};

class ProviderRegistry {
public:
    using SttFactory =
        std::function<std::shared_ptr<SttProvider>(const ResolveContext&)>;
    using LlmFactory =
        std::function<std::shared_ptr<LlmProvider>(const ResolveContext&)>;
    using TtsFactory =
        std::function<std::shared_ptr<TtsProvider>(const ResolveContext&)>;

    void add_stt(const std::string& name, ProviderMeta meta, SttFactory make);
    void add_llm(const std::string& name, ProviderMeta meta, LlmFactory make);
    void add_tts(const std::string& name, ProviderMeta meta, TtsFactory make);

    bool has(Role role, const std::string& name) const;

    // Throws ConfigError for unknown names; factory errors pass through.
    std::shared_ptr<SttProvider> resolve_stt(const ResolveContext& ctx) const;
    std::shared_ptr<LlmProvider> resolve_llm(const ResolveContext& ctx) const;
    std::shared_ptr<TtsProvider> resolve_tts(const ResolveContext& ctx) const;

    struct Entry {
        Role role;
        std::string name;
        ProviderMeta meta;
    };

    // Sorted by role then name, for --list-providers.
    std::vector<Entry> list() const;

    // "mock" plus "openai-compatible" registered for every role.
    static ProviderRegistry with_builtins();

private:
    template <typename Factory> struct Slot {
        ProviderMeta meta;
        Factory make;
    };

    std::map<std::string, Slot<SttFactory>> stt_;
    std::map<std::string, Slot<LlmFactory>> llm_;
    std::map<std::string, Slot<TtsFactory>> tts_;
};

} // namespace cui::providers
