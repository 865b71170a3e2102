#include "cui/config.hpp"

#include "cui/errors.hpp"
#include "cui/remote.hpp"

namespace cui::session {

namespace {

using nlohmann::json;

std::string require_string(const json& v, const char* where) {
    if (!v.is_string()) {
        throw ConfigError(std::string(where) + " must be a string");
    }
    return v.get<std::string>();
}

bool require_bool(const json& v, const char* where) {
    if (!v.is_boolean()) {
        throw ConfigError(std::string(where) + " must be a boolean");
    }
    return v.get<bool>();
}

providers::ProviderSelector parse_selector(const json& v, const char* role) {
    providers::ProviderSelector out;
    if (v.is_string()) {
        out.provider = v.get<std::string>();
    } else if (v.is_object()) {
        const auto p = v.find("provider");
        if (p == v.end()) {
            throw ConfigError(std::string(role) + ".provider is required");
        }
        out.provider = require_string(*p, (std::string(role) + ".provider").c_str());
        if (const auto m = v.find("model"); m != v.end()) {
            out.model = require_string(*m, (std::string(role) + ".model").c_str());
        }
        if (const auto e = v.find("endpoint"); e != v.end()) {
            out.endpoint =
                require_string(*e, (std::string(role) + ".endpoint").c_str());
        }
    } else {
        throw ConfigError(std::string(role) +
                          " must be an object or a provider name");
    }
    if (out.provider.empty()) {
        throw ConfigError(std::string(role) + ".provider must be non-empty");
    }
    return out;
}

AudioFormat parse_format(const json& v, const char* where) {
    if (!v.is_object()) {
        throw ConfigError(std::string(where) + " must be an object");
    }
    AudioFormat out;
    if (const auto r = v.find("sample_rate"); r != v.end()) {
        if (!r->is_number_integer()) {
            throw ConfigError(std::string(where) +
                              ".sample_rate must be an integer");
        }
        out.sample_rate = r->get<int>();
    }
    if (const auto c = v.find("channels"); c != v.end()) {
        if (!c->is_number_integer()) {
            throw ConfigError(std::string(where) +
                              ".channels must be an integer");
        }
        out.channels = c->get<int>();
    }
    if (const auto e = v.find("encoding"); e != v.end()) {
        out.encoding =
            require_string(*e, (std::string(where) + ".encoding").c_str());
    }
    validate_audio_format(out);
    return out;
}

void check_provider(const providers::ProviderRegistry& registry,
                    providers::Role role,
                    const providers::ProviderSelector& sel) {
    if (!registry.has(role, sel.provider)) {
        throw ConfigError("unknown " + std::string(role_name(role)) +
                          " provider '" + sel.provider + "'");
    }
}

} // namespace

SessionConfig parse_session_config(std::string_view payload,
                                   const providers::ProviderRegistry& registry) {
    json doc = json::parse(payload, nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError("session config is not valid JSON");
    }
    if (!doc.is_object()) {
        throw ConfigError("session config must be a JSON object");
    }

    SessionConfig out;
    if (const auto it = doc.find("session_label"); it != doc.end()) {
        out.session_label = require_string(*it, "session_label");
    }
    if (const auto it = doc.find("stt"); it != doc.end()) {
        out.stt = parse_selector(*it, "stt");
    }
    if (const auto it = doc.find("llm"); it != doc.end()) {
        out.llm = parse_selector(*it, "llm");
    }
    if (const auto it = doc.find("tts"); it != doc.end()) {
        out.tts = parse_selector(*it, "tts");
    }
    if (const auto it = doc.find("voice"); it != doc.end()) {
        out.voice = require_string(*it, "voice");
        if (out.voice.empty()) throw ConfigError("voice must be non-empty");
    }
    if (const auto it = doc.find("system_prompt"); it != doc.end()) {
        out.system_prompt = require_string(*it, "system_prompt");
    }
    if (const auto it = doc.find("history"); it != doc.end()) {
        out.history_enabled = require_bool(*it, "history");
    }
    if (const auto it = doc.find("streaming"); it != doc.end()) {
        out.streaming_enabled = require_bool(*it, "streaming");
    }
    if (const auto it = doc.find("max_history_turns"); it != doc.end()) {
        if (!it->is_number_integer() || it->get<int>() < 1) {
            throw ConfigError("max_history_turns must be a positive integer");
        }
        out.max_history_turns = it->get<std::size_t>();
    }
    if (const auto it = doc.find("audio_in"); it != doc.end()) {
        out.audio_in = parse_format(*it, "audio_in");
    }
    if (const auto it = doc.find("audio_out"); it != doc.end()) {
        out.audio_out = parse_format(*it, "audio_out");
    }
    if (const auto it = doc.find("api_keys"); it != doc.end()) {
        if (!it->is_object()) {
            throw ConfigError("api_keys must be an object");
        }
        for (const auto& [name, value] : it->items()) {
            out.api_keys[name] =
                require_string(value, ("api_keys." + name).c_str());
        }
    }
    if (const auto it = doc.find("provider_params"); it != doc.end()) {
        if (!it->is_object()) {
            throw ConfigError("provider_params must be an object");
        }
        out.provider_params = *it;
    }

    check_provider(registry, providers::Role::stt, out.stt);
    check_provider(registry, providers::Role::llm, out.llm);
    check_provider(registry, providers::Role::tts, out.tts);
    return out;
}

nlohmann::json describe_session_config(const SessionConfig& config) {
    const auto selector = [](const providers::ProviderSelector& s) {
        json v{{"provider", s.provider}};
        if (!s.model.empty()) v["model"] = s.model;
        if (!s.endpoint.empty()) v["endpoint"] = s.endpoint;
        return v;
    };
    const auto format = [](const AudioFormat& f) {
        return json{{"sample_rate", f.sample_rate},
                    {"channels", f.channels},
                    {"encoding", f.encoding}};
    };
    json keys = json::object();
    for (const auto& [name, value] : config.api_keys) {
        keys[name] = remote::redact_secret(value);
    }
    return json{{"session_label", config.session_label},
                {"stt", selector(config.stt)},
                {"llm", selector(config.llm)},
                {"tts", selector(config.tts)},
                {"voice", config.voice},
                {"system_prompt", config.system_prompt},
                {"history", config.history_enabled},
                {"streaming", config.streaming_enabled},
                {"max_history_turns", config.max_history_turns},
                {"audio_in", format(config.audio_in)},
                {"audio_out", format(config.audio_out)},
                {"api_keys", keys},
                {"provider_params", config.provider_params}};
}

} // namespace cui::session
