#pragma once

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <string>

#include "mindtrail/llm.hpp"
#include "mindtrail/mock_provider.hpp"
#include "mindtrail/service.hpp"
#include "mindtrail/store.hpp"

namespace mindtrail::testkit {

inline const char* kJaneNarrative =
    "I retired last year and now I care for my grandson on weekdays. I love him, but the days feel long. "
    "I used to lead a team and now nobody asks for my opinion. Sometimes I wonder what my purpose is.";

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("mindtrail-ut-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

struct Harness {
    std::shared_ptr<llm::MockProvider> mock;
    std::shared_ptr<Store> store;
    std::shared_ptr<ManualClock> clock;
    std::shared_ptr<SessionService> service;

    explicit Harness(std::shared_ptr<Store> s = std::make_shared<MemoryStore>(), std::uint64_t seed = 7,
                     ServiceOptions opts = {}) {
        mock = std::make_shared<llm::MockProvider>(seed);
        store = std::move(s);
        clock = std::make_shared<ManualClock>(1'700'000'000'000);
        llm::ProviderConfig cfg;
        cfg.seed = seed;
        if (opts.workers == 4) opts.workers = 1;
        service = std::make_shared<SessionService>(store, std::make_shared<llm::Gateway>(cfg, mock), clock,
                                                   std::make_shared<SeededIds>(seed), opts);
    }
    ~Harness() { service->shutdown(); }
};

}  // namespace mindtrail::testkit
