#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <spdlog/sinks/stdout_color_sinks.h>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mindtrail/config.hpp"
#include "mindtrail/error.hpp"
#include "mindtrail/http_server.hpp"
#include "mindtrail/metrics.hpp"
#include "mindtrail/service.hpp"
#include "mindtrail/store.hpp"
#include "mindtrail/trace.hpp"
#include "mindtrail/validate.hpp"

namespace fs = std::filesystem;
using namespace mindtrail;

namespace {

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_serve(const std::string& config_path) {
    const auto cfg = load_config(config_path);
    auto store = std::make_shared<FileStore>(cfg.server.storage_dir);
    auto gateway = std::make_shared<llm::Gateway>(cfg.llm);
    ServiceOptions opts;
    opts.default_locale = cfg.server.locale;
    opts.workers = cfg.server.workers;
    SessionService service(store, gateway, std::make_shared<SystemClock>(), std::make_shared<RandomIds>(), opts);

    HttpOptions http;
    http.host = cfg.server.host;
    http.port = cfg.server.port;
    if (const char* token = std::getenv(cfg.server.token_env.c_str())) http.bearer_token = token;

    // Signals are taken synchronously by one thread so shutdown runs outside a handler.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    HttpServer server(service, http);
    const int port = server.start();
    spdlog::info("serving on {}:{} (storage {})", http.host, port, cfg.server.storage_dir);
    std::cout << "listening on " << http.host << ":" << port << std::endl;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        spdlog::info("signal {} received, shutting down", sig);
        server.stop();
    });
    server.wait();
    service.wait_idle();
    service.shutdown();
    if (waiter.joinable()) {
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
    }
    return 0;
}

int cmd_replay(const std::string& script, const std::string& out, std::optional<std::uint64_t> seed) {
    const auto result = trace::replay_file(script, seed);
    trace::write_outputs(result, out);
    std::cout << metrics::render_table({{result.name, result.row}});
    return 0;
}

int cmd_validate(const std::string& path) {
    const auto record = parse_export(read_text(path));
    const auto findings = validate_record(record);
    if (findings.empty()) {
        std::cout << "OK " << path << ": all invariants hold\n";
        return 0;
    }
    for (const auto& f : findings) std::cout << "FAIL " << f.invariant << " at " << f.locator << ": " << f.message << "\n";
    std::cout << findings.size() << " invariant failure(s)\n";
    return 1;
}

int cmd_metrics(const std::string& dir, const std::string& format) {
    std::vector<metrics::LabeledRow> rows;
    std::vector<fs::path> exports;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") exports.push_back(entry.path());
    }
    std::sort(exports.begin(), exports.end());
    for (const auto& p : exports) {
        const auto text = read_text(p);
        // Replay also drops timeline.json next to the export; skip anything that is not one.
        const auto probe = nlohmann::json::parse(text, nullptr, false);
        if (probe.is_discarded() || !probe.is_object() || !probe.contains("session")) {
            spdlog::warn("skipping {}: not a session export", p.string());
            continue;
        }
        const auto record = parse_export(text);
        rows.push_back({p.stem().string(), metrics::usage_row(parse_session(record.document))});
    }
    FileStore store(dir);
    for (const auto& id : store.list()) {
        rows.push_back({id, metrics::usage_row(parse_session(store.load(id).document))});
    }
    std::cout << (format == "csv" ? metrics::render_csv(rows) : metrics::render_table(rows));
    return 0;
}

int cmd_export(const std::string& storage, const std::string& id, const std::string& out) {
    FileStore store(storage);
    const auto record = store.load(id);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::StorageCorrupt, "cannot write " + out);
    f << canonical_dump(export_json(record)) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mindtrail: guided reflection engine"};
    app.require_subcommand(1);
    spdlog::set_default_logger(spdlog::stderr_color_mt("mindtrail"));
    spdlog::set_level(spdlog::level::warn);

    std::string config_path;
    auto* serve = app.add_subcommand("serve", "Run the REST service");
    serve->add_option("--config", config_path, "INI config file")->required();

    std::string script, out_dir;
    std::optional<std::uint64_t> seed;
    auto* replay = app.add_subcommand("replay", "Replay a trace script against the mock provider");
    replay->add_option("--script", script, "trace script (JSON)")->required();
    replay->add_option("--out", out_dir, "output directory")->required();
    replay->add_option("--seed", seed, "mock provider seed (overrides the script)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check every invariant of an exported session");
    validate->add_option("path", validate_path, "export document")->required();

    std::string metrics_dir, format = "table";
    auto* metrics = app.add_subcommand("metrics", "Usage table for exports or a storage directory");
    metrics->add_option("--dir", metrics_dir, "directory of exports or a storage dir")->required();
    metrics->add_option("--format", format, "csv or table")->check(CLI::IsMember({"csv", "table"}));

    std::string export_id, export_out, storage_dir, export_config;
    auto* exp = app.add_subcommand("export", "Write a stored session as an export document");
    exp->add_option("--id", export_id, "session id")->required();
    exp->add_option("--out", export_out, "output path")->required();
    auto* storage_opt = exp->add_option("--storage", storage_dir, "storage directory");
    exp->add_option("--config", export_config, "config file (for storage_dir)")->excludes(storage_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*serve) {
            spdlog::set_level(spdlog::level::info);
            return cmd_serve(config_path);
        }
        if (*replay) return cmd_replay(script, out_dir, seed);
        if (*validate) return cmd_validate(validate_path);
        if (*metrics) return cmd_metrics(metrics_dir, format);
        if (*exp) {
            if (storage_dir.empty() && export_config.empty()) {
                std::cerr << "export needs --storage or --config\n";
                return 2;
            }
            if (storage_dir.empty()) storage_dir = load_config(export_config).server.storage_dir;
            return cmd_export(storage_dir, export_id, export_out);
        }
    } catch (const Error& e) {
        std::cerr << error_code_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
