#include "pirsim/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "pirsim/util.hpp"

namespace pirsim {

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct Section {
    std::map<std::string, Entry> kv;
    int line = 0;
    bool used = false;
};

struct RawConfig {
    std::string origin;
    std::map<std::string, Section> sections;

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
    }
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

RawConfig tokenize(const std::string& text, const std::string& origin) {
    RawConfig raw;
    raw.origin = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') raw.fail(lineno, "malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) raw.fail(lineno, "empty section name");
            if (raw.sections.count(section)) raw.fail(lineno, "duplicate section [" + section + "]");
            raw.sections[section].line = lineno;
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos) raw.fail(lineno, "expected key = value");
        if (section.empty()) raw.fail(lineno, "key outside of any section");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) raw.fail(lineno, "empty key");
        auto& sec = raw.sections[section];
        if (sec.kv.count(key)) raw.fail(lineno, "duplicate key " + key);
        sec.kv[key] = {value, lineno, false};
    }
    return raw;
}

class SectionReader {
public:
    SectionReader(RawConfig& raw, const std::string& name) : raw_(raw), name_(name) {
        auto it = raw.sections.find(name);
        sec_ = it == raw.sections.end() ? nullptr : &it->second;
        if (sec_) sec_->used = true;
    }

    bool exists() const { return sec_ != nullptr; }

    std::string get_string(const std::string& key) {
        Entry& e = entry(key);
        return e.value;
    }

    double get_double(const std::string& key) {
        Entry& e = entry(key);
        try {
            size_t pos = 0;
            double v = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            raw_.fail(e.line, "key " + key + ": expected a number, got '" + e.value + "'");
        }
    }

    double get_double(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        return get_double(key);
    }

    int get_int(const std::string& key) {
        Entry& e = entry(key);
        try {
            size_t pos = 0;
            int v = std::stoi(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            raw_.fail(e.line, "key " + key + ": expected an integer, got '" + e.value + "'");
        }
    }

    int get_int(const std::string& key, int fallback) {
        if (!has(key)) return fallback;
        return get_int(key);
    }

    std::vector<double> get_doubles(const std::string& key) {
        Entry& e = entry(key);
        std::istringstream ss(e.value);
        std::vector<double> out;
        double v;
        while (ss >> v) out.push_back(v);
        if (!ss.eof()) raw_.fail(e.line, "key " + key + ": expected a list of numbers");
        if (out.empty()) raw_.fail(e.line, "key " + key + ": empty list");
        return out;
    }

    bool has(const std::string& key) {
        if (!sec_) return false;
        auto it = sec_->kv.find(key);
        if (it == sec_->kv.end()) return false;
        return true;
    }

private:
    Entry& entry(const std::string& key) {
        if (!sec_) throw ConfigError(raw_.origin + ": missing required section [" + name_ + "]");
        auto it = sec_->kv.find(key);
        if (it == sec_->kv.end())
            raw_.fail(sec_->line, "section [" + name_ + "] is missing key " + key);
        it->second.used = true;
        return it->second;
    }

    RawConfig& raw_;
    std::string name_;
    Section* sec_;
};

optics::PixelPair read_pixel_pair(SectionReader& sec) {
    double w = sec.get_double("element_width_m");
    double h = sec.get_double("element_height_m");
    double gap = sec.get_double("element_gap_m", 0.0);
    double vo = sec.get_double("vertical_offset_m");
    std::string side = sec.has("positive_side") ? sec.get_string("positive_side") : "left";
    if (w <= 0 || h <= 0 || gap < 0) throw ConfigError("pixel elements must have positive size");
    Rect2 left{-(gap / 2 + w), vo - h / 2, -gap / 2, vo + h / 2};
    Rect2 right{gap / 2, vo - h / 2, gap / 2 + w, vo + h / 2};
    optics::PixelPair pair;
    pair.vertical_offset_m = vo;
    if (side == "left") {
        pair.positive_rect = left;
        pair.negative_rect = right;
    } else if (side == "right") {
        pair.positive_rect = right;
        pair.negative_rect = left;
    } else {
        throw ConfigError("positive_side must be 'left' or 'right'");
    }
    return pair;
}

}  // namespace

AppConfig AppConfig::parse(const std::string& text, const std::string& origin) {
    RawConfig raw = tokenize(text, origin);
    AppConfig cfg;
    cfg.raw_text = text;
    cfg.config_hash = to_hex(fnv1a64(text));

    SectionReader tower(raw, "tower");
    cfg.tower.config_version = tower.get_int("config_version");
    cfg.tower.sample_rate_hz = tower.get_double("sample_rate_hz");
    cfg.tower.samples_per_event = tower.get_int("samples_per_event");

    for (auto& [name, sec] : raw.sections) {
        if (name.rfind("lens.", 0) != 0) continue;
        std::string id = name.substr(5);
        SectionReader r(raw, name);
        optics::LensSystem lens;
        lens.id = id;
        std::string kind = r.get_string("kind");
        if (kind == "spot")
            lens.kind = optics::LensSystem::Kind::spot;
        else if (kind == "multi")
            lens.kind = optics::LensSystem::Kind::multi;
        else
            raw.fail(sec.line, "lens kind must be 'spot' or 'multi'");
        lens.focal_length_m = r.get_double("focal_length_m");
        lens.aperture_area_m2 = r.get_double("aperture_area_m2");
        lens.transmission = r.get_double("transmission");
        lens.filter_fraction = r.get_double("filter_fraction");
        lens.mount_x_m = r.get_double("mount_x_m");
        lens.mount_height_m = r.get_double("mount_height_m");
        for (double deg : r.get_doubles("lenslet_azimuths_deg"))
            lens.lenslet_azimuths_rad.push_back(deg * M_PI / 180.0);
        cfg.tower.lenses[id] = std::move(lens);
    }

    for (const char* name : optics::kChannelOrder) {
        std::string key = std::string("channel.") + name;
        SectionReader r(raw, key);
        if (!r.exists()) continue;
        optics::ChannelConfig ch;
        ch.name = name;
        ch.lens_id = r.get_string("lens");
        try {
            ch.pair = read_pixel_pair(r);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ": [" + key + "]: " + e.what());
        }
        cfg.tower.channels.push_back(std::move(ch));
    }

    SectionReader resp(raw, "sensor_response");
    cfg.response.k1 = resp.get_double("k1_v_per_w_s");
    cfg.response.k2 = resp.get_double("k2_per_s");
    cfg.response.k3 = resp.get_double("k3_v_per_w_s");
    cfg.response.k4 = resp.get_double("k4_per_s");
    cfg.response.gain = resp.get_double("gain", 1.0);
    cfg.response.clip_low_v = resp.get_double("clip_low_v");
    cfg.response.clip_high_v = resp.get_double("clip_high_v");
    cfg.response.dc_offset_v = resp.get_double("dc_offset_v");
    cfg.response.noise_std_v = resp.get_double("noise_std_v");

    SectionReader rad(raw, "radiometry");
    cfg.radiometry.tau = rad.get_double("tau");
    cfg.radiometry.sigma = rad.get_double("sigma_w_m2_k4", 5.670374419e-8);
    cfg.radiometry.t_background_k = rad.get_double("t_background_k");

    SectionReader gen(raw, "scene");
    if (gen.exists()) {
        GeneratorParams& g = cfg.gen;
        g.grid_resolution_per_m = gen.get_double("grid_resolution_per_m", g.grid_resolution_per_m);
        g.event_window_fraction = gen.get_double("event_window_fraction", g.event_window_fraction);
        auto pair2 = [&](const char* key, double& lo, double& hi) {
            if (!gen.has(key)) return;
            auto v = gen.get_doubles(key);
            if (v.size() != 2 || v[0] > v[1])
                throw ConfigError(origin + ": [scene] " + key + " wants 'lo hi'");
            lo = v[0];
            hi = v[1];
        };
        pair2("human_height_range_m", g.human_height_min_m, g.human_height_max_m);
        pair2("animal_height_range_m", g.animal_height_min_m, g.animal_height_max_m);
        pair2("speed_range_mps", g.speed_min_mps, g.speed_max_mps);
        g.theta_max_rad = gen.get_double("theta_max_rad", g.theta_max_rad);
        pair2("range_band_m", g.range_min_m, g.range_max_m);
        pair2("intruder_t_obj_range_k", g.intruder_t_obj_min_k, g.intruder_t_obj_max_k);
        pair2("clutter_dt_range_k", g.clutter_dt_min_k, g.clutter_dt_max_k);
        g.shrub_count_min = gen.get_int("shrub_count_min", g.shrub_count_min);
        g.shrub_count_max = gen.get_int("shrub_count_max", g.shrub_count_max);
        pair2("sway_amplitude_range_m", g.sway_amplitude_min_m, g.sway_amplitude_max_m);
        pair2("sway_freq_range_hz", g.sway_freq_min_hz, g.sway_freq_max_hz);
        pair2("shrub_semi_xy_range_m", g.shrub_semi_xy_min_m, g.shrub_semi_xy_max_m);
        pair2("shrub_semi_z_range_m", g.shrub_semi_z_min_m, g.shrub_semi_z_max_m);
        pair2("shrub_center_z_range_m", g.shrub_center_z_min_m, g.shrub_center_z_max_m);
        g.shrub_x_max_m = gen.get_double("shrub_x_max_m", g.shrub_x_max_m);
        g.gust_count_min = gen.get_int("gust_count_min", g.gust_count_min);
        g.gust_count_max = gen.get_int("gust_count_max", g.gust_count_max);
        pair2("gust_sigma_range_s", g.gust_sigma_min_s, g.gust_sigma_max_s);
        pair2("gust_weight_range", g.gust_weight_min, g.gust_weight_max);
        g.agc_target_fraction = gen.get_double("agc_target_fraction", g.agc_target_fraction);
        g.agc_max_gain = gen.get_double("agc_max_gain", g.agc_max_gain);
    }

    // Strict schema: anything not consumed is an error.
    for (const auto& [sname, sec] : raw.sections) {
        if (!sec.used) raw.fail(sec.line, "unknown section [" + sname + "]");
        for (const auto& [key, entry] : sec.kv)
            if (!entry.used) raw.fail(entry.line, "unknown key " + key + " in [" + sname + "]");
    }

    cfg.tower.validate();
    cfg.response.validate();
    return cfg;
}

AppConfig AppConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

}  // namespace pirsim
