#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pirsim/classifier.hpp"
#include "pirsim/config.hpp"
#include "pirsim/event_io.hpp"
#include "pirsim/features.hpp"
#include "pirsim/scene.hpp"
#include "pirsim/util.hpp"

namespace fs = std::filesystem;
using namespace pirsim;

namespace {

struct GlobalOpts {
    std::string config_path = "configs/tower_default.ini";
    uint64_t seed = 1;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    std::string out;
};

void parallel_for(int total, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || total <= 1) {
        for (int i = 0; i < total; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    std::exception_ptr err;
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= total) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < std::min(jobs, total); ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

int cmd_simulate(const GlobalOpts& g, int human, int animal, int clutter) {
    if (g.out.empty()) throw UsageError("simulate: --out directory is required");
    AppConfig cfg = AppConfig::load(g.config_path);
    scene::DatasetRequest req{human, animal, clutter, g.seed};
    scene::DatasetManifest m = scene::generate_dataset(req, cfg, g.out, g.jobs);
    int flagged = 0;
    for (const auto& e : m.events) {
        auto meta = io::read_event_meta(fs::path(g.out) / e.meta);
        if (!meta.flags.empty()) ++flagged;
    }
    std::cout << "dataset: " << g.out << "\n"
              << "events: " << m.events.size() << " (human " << m.counts[0] << ", animal "
              << m.counts[1] << ", clutter " << m.counts[2] << ")\n"
              << "flagged events: " << flagged << "\n"
              << "config_hash: " << m.config_hash << "\n"
              << "run_hash: " << m.run_hash << "\n";
    return 0;
}

int cmd_featurize(const GlobalOpts& g, const std::string& dataset) {
    if (g.out.empty()) throw UsageError("featurize: --out file is required");
    scene::DatasetManifest m = io::read_manifest(fs::path(dataset) / "dataset.json");
    io::FeatureFile ff;
    ff.config_hash = m.config_hash;
    ff.source_hash = m.run_hash;
    ff.seed = m.seed;
    ff.rows.resize(m.events.size());
    parallel_for(static_cast<int>(m.events.size()), g.jobs, [&](int i) {
        const auto& item = m.events[static_cast<size_t>(i)];
        scene::Event ev = io::read_event_csv(fs::path(dataset) / item.csv);
        ev.meta = io::read_event_meta(fs::path(dataset) / item.meta);
        features::FeatureVector f = features::extract_features(ev);
        io::FeatureRow& row = ff.rows[static_cast<size_t>(i)];
        row.event_id = fs::path(item.csv).stem().string();
        row.label = ev.meta.label;
        row.e8 = f.e8;
        row.rho_max = f.rho_max;
        row.c60 = f.c60;
        row.flags = f.flags;
    });
    io::write_features_csv(g.out, ff);
    std::cout << "features: " << g.out << " (" << ff.rows.size() << " rows)\n";
    return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& features_path, const std::string& mode,
                 int folds, const std::string& model_out) {
    io::FeatureFile ff = io::read_features_csv(features_path);
    nlohmann::json out_json;
    if (mode == "pipeline") {
        auto res = classifier::train_pipeline(ff, classifier::default_grid(), folds, g.seed);
        std::cout << res.report.render_table();
        out_json = nlohmann::json::parse(res.report.to_json());
        out_json["stage1_cv"] = nlohmann::json::parse(res.stage1_cv.to_json());
        out_json["stage2_cv"] = nlohmann::json::parse(res.stage2_cv.to_json());
        if (!model_out.empty()) {
            std::ofstream mo(model_out, std::ios::binary);
            if (!mo) throw DataError("cannot write model file: " + model_out);
            mo << res.pipeline.to_json() << "\n";
            std::cout << "model: " << model_out << "\n";
        }
    } else {
        classifier::FeatureSet fset;
        if (mode == "e8")
            fset = classifier::FeatureSet::e8;
        else if (mode == "e8+rho")
            fset = classifier::FeatureSet::e8_rho;
        else if (mode == "c60")
            fset = classifier::FeatureSet::c60;
        else
            throw UsageError("evaluate: mode must be one of e8, e8+rho, c60, pipeline");
        auto labels3 = classifier::three_class_labels(ff);
        std::vector<int> bin(labels3.size());
        for (size_t i = 0; i < labels3.size(); ++i) bin[i] = labels3[i] == 2 ? 0 : 1;
        auto x = classifier::feature_matrix(ff, fset);
        auto rep = classifier::kfold_cv(x, bin, folds, classifier::default_grid(), g.seed,
                                        std::string("intruder vs clutter (") +
                                            classifier::to_string(fset) + ")",
                                        {"Clutter", "Intruder"});
        std::cout << rep.render_table();
        out_json = nlohmann::json::parse(rep.to_json());
    }
    out_json["config_hash"] = ff.config_hash;
    out_json["feature_source_hash"] = ff.source_hash;
    if (!g.out.empty()) {
        std::ofstream out(g.out, std::ios::binary);
        if (!out) throw DataError("cannot write report: " + g.out);
        out << out_json.dump(2) << "\n";
        std::cout << "report: " << g.out << "\n";
    }
    return 0;
}

int cmd_inspect(const GlobalOpts& g, const std::string& event_path) {
    scene::Event ev = io::read_event_csv(event_path);
    fs::path meta_path = fs::path(event_path);
    meta_path.replace_extension(".json");
    if (fs::exists(meta_path)) ev.meta = io::read_event_meta(meta_path);

    auto e8 = features::energy_features(ev);
    std::cout << "event: " << event_path << "  label: " << ev.meta.label << "\n";
    for (int c = 0; c < 8; ++c) {
        const auto& v = ev.channels[static_cast<size_t>(c)];
        double lo = v[0], hi = v[0];
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        std::cout << "  " << optics::kChannelOrder[static_cast<size_t>(c)] << ": n=" << v.size()
                  << " min=" << format_double(lo, 6) << " max=" << format_double(hi, 6)
                  << " energy=" << format_double(e8[static_cast<size_t>(c)], 6) << "\n";
    }
    auto rho = features::rho_max(ev);
    std::cout << "rho_max: " << format_double(rho.value, 6) << " (lag " << rho.lag
              << " samples; positive lag = left-to-right)\n";

    AppConfig cfg = AppConfig::load(g.config_path);
    auto thresholds = features::calibrate_thresholds(cfg, g.seed);
    auto verdict = features::truth_table_inference({e8[0], e8[1], e8[2], e8[3]}, thresholds);
    std::cout << "truth-table verdict: " << features::to_string(verdict) << "\n";

    nlohmann::json decs = nlohmann::json::array();
    std::vector<std::vector<std::complex<double>>> recons(4);
    std::vector<std::vector<std::complex<double>>> analytic(4);
    for (int c = 0; c < 4; ++c) {
        const auto& v = ev.channels[static_cast<size_t>(c)];
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        std::vector<double> centered(v.size());
        for (size_t i = 0; i < v.size(); ++i) centered[i] = v[i] - mean;
        analytic[static_cast<size_t>(c)] = chirplet::analytic_signal(centered);
        auto dec = chirplet::decompose(analytic[static_cast<size_t>(c)]);
        dec.channel = optics::kChannelOrder[static_cast<size_t>(c)];
        recons[static_cast<size_t>(c)] =
            chirplet::reconstruct(dec, static_cast<int>(analytic[static_cast<size_t>(c)].size()));
        double snr = chirplet::reconstruction_snr_db(analytic[static_cast<size_t>(c)],
                                                     recons[static_cast<size_t>(c)]);
        std::cout << "  chirplet " << dec.channel << ": residual_energy="
                  << format_double(dec.residual_energy, 6) << " snr_db=" << format_double(snr, 6)
                  << "\n";
        decs.push_back(nlohmann::json::parse(chirplet::decomposition_json(dec)));
    }

    if (!g.out.empty()) {
        fs::create_directories(g.out);
        {
            std::ofstream out(fs::path(g.out) / "chirplets.json", std::ios::binary);
            out << decs.dump(2) << "\n";
        }
        std::ofstream out(fs::path(g.out) / "reconstruction.csv", std::ios::binary);
        out << "n,A,A_recon,B,B_recon,C,C_recon,D,D_recon\n";
        size_t n = analytic[0].size();
        for (size_t i = 0; i < n; ++i) {
            out << i;
            for (int c = 0; c < 4; ++c)
                out << ',' << format_double(analytic[static_cast<size_t>(c)][i].real(), 9) << ','
                    << format_double(recons[static_cast<size_t>(c)][i].real(), 9);
            out << '\n';
        }
        std::cout << "wrote " << g.out << "/chirplets.json and reconstruction.csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PIR sensor-array simulation and intruder-classification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--config", g.config_path, "tower/scene configuration file")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "base RNG seed stamped into all artifacts")
        ->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads (results independent of this)")
        ->capture_default_str();
    app.add_option("--out", g.out, "output path (directory or file, per subcommand)");

    auto* sim = app.add_subcommand("simulate", "generate a labeled synthetic event dataset");
    int n_human = 0, n_animal = 0, n_clutter = 0;
    sim->add_option("--human", n_human, "number of human events");
    sim->add_option("--animal", n_animal, "number of animal events");
    sim->add_option("--clutter", n_clutter, "number of clutter events");

    auto* feat = app.add_subcommand("featurize", "extract E8/rho_max/C60 features from a dataset");
    std::string dataset;
    feat->add_option("--dataset", dataset, "dataset directory")->required();

    auto* eval = app.add_subcommand("evaluate", "cross-validate classifiers on a feature file");
    std::string features_path, mode = "c60", model_out;
    int folds = 5;
    eval->add_option("--features", features_path, "feature CSV file")->required();
    eval->add_option("--mode", mode, "e8 | e8+rho | c60 | pipeline")->capture_default_str();
    eval->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    eval->add_option("--model-out", model_out, "write the trained pipeline model (pipeline mode)");

    auto* insp = app.add_subcommand("inspect", "dump signals, features and chirplets of one event");
    std::string event_path;
    insp->add_option("--event", event_path, "event CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 4;
    }

    try {
        if (sim->parsed()) return cmd_simulate(g, n_human, n_animal, n_clutter);
        if (feat->parsed()) return cmd_featurize(g, dataset);
        if (eval->parsed()) return cmd_evaluate(g, features_path, mode, folds, model_out);
        if (insp->parsed()) return cmd_inspect(g, event_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
