#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "pirsim/scene.hpp"

namespace pirsim::io {

inline constexpr const char* kEventHeader = "A,B,C,D,L1,L2,R1,R2";

std::filesystem::path event_csv_path(const std::filesystem::path& dir, int id);
std::filesystem::path event_meta_path(const std::filesystem::path& dir, int id);

// 1024 rows x 8 columns, header A,...,R2, volts at 9 significant digits.
void write_event_csv(const std::filesystem::path& path, const scene::Event& ev);
scene::Event read_event_csv(const std::filesystem::path& path);

void write_event_meta(const std::filesystem::path& path, const scene::EventMeta& meta);
scene::EventMeta read_event_meta(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const scene::DatasetManifest& m);
scene::DatasetManifest read_manifest(const std::filesystem::path& path);

// One row per event: event_id, label, e8[8], rho_max, c60[60] = 71 columns.
struct FeatureRow {
    std::string event_id;
    std::string label;
    std::array<double, 8> e8{};
    double rho_max = 0.0;
    std::array<double, 60> c60{};
    std::vector<std::string> flags;
};

struct FeatureFile {
    std::string source_hash;  // run hash of the dataset the rows came from
    std::string config_hash;
    uint64_t seed = 0;
    std::vector<FeatureRow> rows;
};

std::string feature_header();
void write_features_csv(const std::filesystem::path& path, const FeatureFile& f);
FeatureFile read_features_csv(const std::filesystem::path& path);

}  // namespace pirsim::io
