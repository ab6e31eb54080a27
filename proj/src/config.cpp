#include "mindtrail/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mindtrail/error.hpp"

namespace pt = boost::property_tree;

namespace mindtrail {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigError, "config field " + field + ": " + why);
}

template <typename T>
T get(const pt::ptree& section, const std::string& name, const std::string& key, T fallback) {
    auto v = section.get_optional<std::string>(key);
    if (!v) return fallback;
    if constexpr (std::is_same_v<T, std::string>) {
        return *v;
    } else {
        std::istringstream in(*v);
        T out{};
        if (!(in >> out) || !(in >> std::ws).eof()) bad("[" + name + "] " + key, "cannot parse '" + *v + "'");
        return out;
    }
}

void reject_unknown(const pt::ptree& section, const std::string& name, const std::set<std::string>& known) {
    for (const auto& [key, value] : section) {
        if (!known.contains(key)) bad("[" + name + "] " + key, "unknown key");
    }
}

}  // namespace

Config parse_config(const std::string& ini_text, const std::string& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(ini_text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("config syntax: ") + e.message() + " at line " +
                                                std::to_string(e.line()));
    }
    for (const auto& [name, section] : tree) {
        if (name != "server" && name != "llm") bad("[" + name + "]", "unknown section");
    }
    Config c;
    const pt::ptree empty;
    const auto& server = tree.get_child("server", empty);
    reject_unknown(server, "server", {"host", "port", "storage_dir", "locale", "workers", "token_env"});
    c.server.host = get(server, "server", "host", c.server.host);
    c.server.port = get(server, "server", "port", c.server.port);
    c.server.storage_dir = get(server, "server", "storage_dir", c.server.storage_dir);
    c.server.locale = get(server, "server", "locale", c.server.locale);
    c.server.workers = get(server, "server", "workers", c.server.workers);
    c.server.token_env = get(server, "server", "token_env", c.server.token_env);
    if (c.server.port < 0 || c.server.port > 65535) bad("[server] port", "must lie in [0, 65535]");
    if (c.server.workers < 1) bad("[server] workers", "must be >= 1");
    if (c.server.storage_dir.empty()) bad("[server] storage_dir", "must not be empty");
    if (c.server.locale.empty()) bad("[server] locale", "must not be empty");
    if (std::filesystem::path(c.server.storage_dir).is_relative()) {
        c.server.storage_dir = (std::filesystem::path(base_dir) / c.server.storage_dir).lexically_normal().string();
    }

    const auto& llm = tree.get_child("llm", empty);
    reject_unknown(llm, "llm",
                   {"provider", "model_name", "api_key_env", "base_url", "timeout_ms", "max_retries", "seed",
                    "temperature"});
    const auto provider = get<std::string>(llm, "llm", "provider", "mock");
    if (provider == "mock") {
        c.llm.provider = llm::ProviderConfig::Kind::mock;
    } else if (provider == "remote") {
        c.llm.provider = llm::ProviderConfig::Kind::remote;
    } else {
        bad("[llm] provider", "expected mock or remote, got '" + provider + "'");
    }
    c.llm.model_name = get(llm, "llm", "model_name", c.llm.model_name);
    c.llm.api_key_env = get(llm, "llm", "api_key_env", c.llm.api_key_env);
    c.llm.base_url = get(llm, "llm", "base_url", c.llm.base_url);
    c.llm.timeout = std::chrono::milliseconds(get<long long>(llm, "llm", "timeout_ms", c.llm.timeout.count()));
    c.llm.max_retries = get(llm, "llm", "max_retries", c.llm.max_retries);
    c.llm.seed = get(llm, "llm", "seed", c.llm.seed);
    c.llm.temperature = get(llm, "llm", "temperature", c.llm.temperature);
    if (c.llm.timeout.count() <= 0) bad("[llm] timeout_ms", "must be positive");
    if (c.llm.max_retries < 0) bad("[llm] max_retries", "must be >= 0");
    if (c.llm.temperature < 0 || c.llm.temperature > 2) bad("[llm] temperature", "must lie in [0, 2]");
    if (c.llm.provider == llm::ProviderConfig::Kind::remote) {
        if (c.llm.model_name.empty()) bad("[llm] model_name", "required for the remote provider");
        if (c.llm.api_key_env.empty()) bad("[llm] api_key_env", "required for the remote provider");
        if (c.llm.base_url.find("://") == std::string::npos) bad("[llm] base_url", "must include a scheme");
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace mindtrail
