#include "pirsim/event_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pirsim/util.hpp"

namespace pirsim {

std::string format_double(double v, int significant_digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
    return buf;
}

}  // namespace pirsim

namespace pirsim::io {

using nlohmann::json;

namespace {

std::string id_string(int id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", id);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::filesystem::path event_csv_path(const std::filesystem::path& dir, int id) {
    return dir / ("event_" + id_string(id) + ".csv");
}

std::filesystem::path event_meta_path(const std::filesystem::path& dir, int id) {
    return dir / ("event_" + id_string(id) + ".json");
}

void write_event_csv(const std::filesystem::path& path, const scene::Event& ev) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write event file: " + path.string());
    out << kEventHeader << "\n";
    const size_t n = ev.channels[0].size();
    for (size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 8; ++c) {
            if (c) out << ',';
            out << format_double(ev.channels[static_cast<size_t>(c)][i], 9);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

scene::Event read_event_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open event file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != split_csv(kEventHeader))
        throw DataError("bad event header in " + path.string());
    scene::Event ev;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 8)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": expected 8 columns, got " + std::to_string(cells.size()));
        for (int c = 0; c < 8; ++c) {
            try {
                size_t pos = 0;
                double v = std::stod(cells[static_cast<size_t>(c)], &pos);
                if (pos != cells[static_cast<size_t>(c)].size()) throw std::invalid_argument("");
                ev.channels[static_cast<size_t>(c)].push_back(v);
            } catch (...) {
                throw DataError(path.string() + ":" + std::to_string(lineno) +
                                ": bad numeric value '" + cells[static_cast<size_t>(c)] + "'");
            }
        }
    }
    if (ev.channels[0].size() < 8) throw DataError("event file too short: " + path.string());
    return ev;
}

void write_event_meta(const std::filesystem::path& path, const scene::EventMeta& meta) {
    json j;
    j["label"] = meta.label;
    j["speed_mps"] = meta.speed_mps;
    j["theta_rad"] = meta.theta_rad;
    j["range_m"] = meta.range_m;
    j["seed"] = meta.seed;
    j["scene_id"] = meta.scene_id;
    j["flags"] = meta.flags;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write metadata file: " + path.string());
    out << j.dump(2) << "\n";
}

scene::EventMeta read_event_meta(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open metadata file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("bad metadata " + path.string() + ": " + e.what());
    }
    scene::EventMeta m;
    m.label = j.at("label").get<std::string>();
    m.speed_mps = j.at("speed_mps").get<double>();
    m.theta_rad = j.at("theta_rad").get<double>();
    m.range_m = j.at("range_m").get<double>();
    m.seed = j.at("seed").get<uint64_t>();
    m.scene_id = j.at("scene_id").get<int>();
    m.flags = j.at("flags").get<std::vector<std::string>>();
    return m;
}

void write_manifest(const std::filesystem::path& path, const scene::DatasetManifest& m) {
    json j;
    j["format_version"] = m.format_version;
    j["seed"] = m.seed;
    j["config_hash"] = m.config_hash;
    j["run_hash"] = m.run_hash;
    j["counts"] = {{"human", m.counts[0]}, {"animal", m.counts[1]}, {"clutter", m.counts[2]}};
    json events = json::array();
    for (const auto& e : m.events)
        events.push_back({{"id", e.id}, {"label", e.label}, {"csv", e.csv}, {"meta", e.meta}});
    j["events"] = events;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write manifest: " + path.string());
    out << j.dump(2) << "\n";
}

scene::DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open manifest: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("bad manifest " + path.string() + ": " + e.what());
    }
    scene::DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    m.seed = j.at("seed").get<uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.run_hash = j.at("run_hash").get<std::string>();
    m.counts = {j.at("counts").at("human").get<int>(), j.at("counts").at("animal").get<int>(),
                j.at("counts").at("clutter").get<int>()};
    for (const auto& e : j.at("events"))
        m.events.push_back({e.at("id").get<int>(), e.at("label").get<std::string>(),
                            e.at("csv").get<std::string>(), e.at("meta").get<std::string>()});
    return m;
}

std::string feature_header() {
    std::string h = "event_id,label";
    for (const char* ch : {"a", "b", "c", "d", "l1", "l2", "r1", "r2"})
        h += std::string(",e8_") + ch;
    h += ",rho_max";
    const char* params[5] = {"a", "m", "omega", "c", "d"};
    for (const char* ch : {"A", "B", "C", "D"})
        for (int k = 0; k < 3; ++k)
            for (const char* p : params)
                h += std::string(",") + ch + std::to_string(k) + "_" + p;
    return h;
}

void write_features_csv(const std::filesystem::path& path, const FeatureFile& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write feature file: " + path.string());
    out << "# config_hash=" << f.config_hash << " source_hash=" << f.source_hash
        << " seed=" << f.seed << "\n";
    for (const auto& row : f.rows)
        for (const auto& flag : row.flags)
            out << "# flag " << row.event_id << "=" << flag << "\n";
    out << feature_header() << "\n";
    for (const auto& row : f.rows) {
        out << row.event_id << ',' << row.label;
        for (double v : row.e8) out << ',' << format_double(v, 12);
        out << ',' << format_double(row.rho_max, 12);
        for (double v : row.c60) out << ',' << format_double(v, 12);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

FeatureFile read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open feature file: " + path.string());
    FeatureFile f;
    std::vector<std::pair<std::string, std::string>> pending_flags;
    std::string line;
    int lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                if (tok.rfind("config_hash=", 0) == 0) f.config_hash = tok.substr(12);
                if (tok.rfind("source_hash=", 0) == 0) f.source_hash = tok.substr(12);
                if (tok.rfind("seed=", 0) == 0) f.seed = std::stoull(tok.substr(5));
                if (tok == "flag") {
                    std::string rest;
                    ss >> rest;
                    size_t eq = rest.find('=');
                    if (eq != std::string::npos)
                        pending_flags.emplace_back(rest.substr(0, eq), rest.substr(eq + 1));
                }
            }
            continue;
        }
        auto cells = split_csv(line);
        if (!saw_header) {
            if (line != feature_header())
                throw DataError(path.string() + ": unexpected feature header");
            saw_header = true;
            continue;
        }
        if (cells.size() != 71)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": expected 71 columns, got " + std::to_string(cells.size()));
        FeatureRow row;
        row.event_id = cells[0];
        row.label = cells[1];
        auto num = [&](size_t i) {
            try {
                return std::stod(cells[i]);
            } catch (...) {
                throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad value '" +
                                cells[i] + "'");
            }
        };
        for (int i = 0; i < 8; ++i) row.e8[static_cast<size_t>(i)] = num(static_cast<size_t>(2 + i));
        row.rho_max = num(10);
        for (int i = 0; i < 60; ++i)
            row.c60[static_cast<size_t>(i)] = num(static_cast<size_t>(11 + i));
        f.rows.push_back(std::move(row));
    }
    if (!saw_header) throw DataError(path.string() + ": missing feature header");
    for (const auto& [id, flag] : pending_flags)
        for (auto& row : f.rows)
            if (row.event_id == id) row.flags.push_back(flag);
    return f;
}

}  // namespace pirsim::io
