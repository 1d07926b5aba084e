#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include <doctest.h>

#include "pirsim/config.hpp"

// Asserts that the trailing expression throws ExType whose message
// contains needle.
#define CHECK_THROWS_MSG(ExType, needle, ...)                                           \
    do {                                                                                \
        bool caught_ = false;                                                           \
        try {                                                                           \
            __VA_ARGS__;                                                                \
        } catch (const ExType& e_) {                                                    \
            caught_ = true;                                                             \
            CHECK_MESSAGE(std::string(e_.what()).find(needle) != std::string::npos,     \
                          "exception text: ", e_.what());                               \
        }                                                                               \
        CHECK_MESSAGE(caught_, "expected " #ExType);                                    \
    } while (0)

namespace pirsim_test {

inline std::string repo_dir() { return PIRSIM_REPO_DIR; }

inline std::string default_config_path() {
    return (std::filesystem::path(PIRSIM_REPO_DIR) / "configs" / "tower_default.ini").string();
}

inline pirsim::AppConfig default_config() {
    return pirsim::AppConfig::load(default_config_path());
}

// The broken geometry: each pixel pair re-centered on its lens axis.
inline pirsim::AppConfig zero_offset_config() {
    pirsim::AppConfig cfg = default_config();
    for (auto& ch : cfg.tower.channels) {
        double h = ch.pair.positive_rect.height();
        double vo = 0.0;
        if (ch.name == "A" || ch.name == "C" || ch.name == "L1" || ch.name == "R1")
            vo = -h / 2;
        else
            vo = h / 2;
        double dv = vo - ch.pair.vertical_offset_m;
        ch.pair.positive_rect = ch.pair.positive_rect.shifted(0.0, dv);
        ch.pair.negative_rect = ch.pair.negative_rect.shifted(0.0, dv);
        ch.pair.vertical_offset_m = vo;
    }
    return cfg;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("pirsim_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace pirsim_test
