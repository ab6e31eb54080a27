#pragma once

#include <string>

#include "mindtrail/llm.hpp"

namespace mindtrail {

struct ServerConfig {
    std::string host{"127.0.0.1"};
    int port{8080};
    std::string storage_dir{"./data"};
    std::string locale{"ko"};
    int workers{4};
    // Name of the env var holding the optional bearer token.
    std::string token_env{"MINDTRAIL_TOKEN"};
};

struct Config {
    ServerConfig server;
    llm::ProviderConfig llm;
};

/// INI file with [server] and [llm] sections. Throws ConfigError naming the
/// offending section and key. Relative storage_dir is resolved against the
/// config file's directory.
Config load_config(const std::string& path);
Config parse_config(const std::string& ini_text, const std::string& base_dir = ".");

}  // namespace mindtrail
