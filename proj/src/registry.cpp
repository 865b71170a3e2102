#include "cui/registry.hpp"

#include "cui/errors.hpp"
#include "cui/remote.hpp"

namespace cui::providers {

namespace {

[[noreturn]] void throw_unknown(Role role, const std::string& name) {
    throw ConfigError("unknown " + std::string(role_name(role)) +
                      " provider '" + name + "'");
}

} // namespace

std::string_view role_name(Role role) {
    switch (role) {
    case Role::stt: return "stt";
    case Role::llm: return "llm";
    case Role::tts: return "tts";
    }
    return "unknown";
}

void ProviderRegistry::add_stt(const std::string& name, ProviderMeta meta,
                               SttFactory make) {
    stt_[name] = {meta, std::move(make)};
}

void ProviderRegistry::add_llm(const std::string& name, ProviderMeta meta,
                               LlmFactory make) {
    llm_[name] = {meta, std::move(make)};
}

void ProviderRegistry::add_tts(const std::string& name, ProviderMeta meta,
                               TtsFactory make) {
    tts_[name] = {meta, std::move(make)};
}

bool ProviderRegistry::has(Role role, const std::string& name) const {
    switch (role) {
    case Role::stt: return stt_.contains(name);
    case Role::llm: return llm_.contains(name);
    case Role::tts: return tts_.contains(name);
    }
    return false;
}

std::shared_ptr<SttProvider>
ProviderRegistry::resolve_stt(const ResolveContext& ctx) const {
    const auto it = stt_.find(ctx.selector.provider);
    if (it == stt_.end()) throw_unknown(Role::stt, ctx.selector.provider);
    return it->second.make(ctx);
}

std::shared_ptr<LlmProvider>
ProviderRegistry::resolve_llm(const ResolveContext& ctx) const {
    const auto it = llm_.find(ctx.selector.provider);
    if (it == llm_.end()) throw_unknown(Role::llm, ctx.selector.provider);
    return it->second.make(ctx);
}

std::shared_ptr<TtsProvider>
ProviderRegistry::resolve_tts(const ResolveContext& ctx) const {
    const auto it = tts_.find(ctx.selector.provider);
    if (it == tts_.end()) throw_unknown(Role::tts, ctx.selector.provider);
    return it->second.make(ctx);
}

std::vector<ProviderRegistry::Entry> ProviderRegistry::list() const {
    std::vector<Entry> out;
    for (const auto& [name, slot] : stt_) out.push_back({Role::stt, name, slot.meta});
    for (const auto& [name, slot] : llm_) out.push_back({Role::llm, name, slot.meta});
    for (const auto& [name, slot] : tts_) out.push_back({Role::tts, name, slot.meta});
    return out;
}

ProviderRegistry ProviderRegistry::with_builtins() {
    ProviderRegistry reg;
    const ProviderMeta mock_meta{.streaming = true, .local = true};
    reg.add_stt("mock", mock_meta, [](const ResolveContext& ctx) {
        return make_mock_stt(parse_mock_params(ctx.provider_params));
    });
    reg.add_llm("mock", mock_meta, [](const ResolveContext& ctx) {
        return make_mock_llm(parse_mock_params(ctx.provider_params));
    });
    reg.add_tts("mock", mock_meta, [](const ResolveContext& ctx) {
        return make_mock_tts(parse_mock_params(ctx.provider_params));
    });

    const ProviderMeta remote_meta{.streaming = true, .local = false};
    reg.add_stt("openai-compatible", remote_meta, [](const ResolveContext& ctx) {
        return remote::make_remote_stt(remote::make_remote_options(ctx));
    });
    reg.add_llm("openai-compatible", remote_meta, [](const ResolveContext& ctx) {
        return remote::make_remote_llm(remote::make_remote_options(ctx));
    });
    reg.add_tts("openai-compatible", remote_meta, [](const ResolveContext& ctx) {
        return remote::make_remote_tts(remote::make_remote_options(ctx));
    });
    return reg;
}

} // namespace cui::providers
