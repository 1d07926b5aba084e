#include "pirsim/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pirsim/rng.hpp"
#include "pirsim/util.hpp"

namespace pirsim::classifier {

using nlohmann::json;

std::vector<GridPoint> default_grid() {
    std::vector<GridPoint> grid;
    for (int gexp = -7; gexp <= 3; ++gexp)
        for (int cexp = -3; cexp <= 10; ++cexp)
            grid.push_back({{svm::Kernel::Type::rbf, std::pow(2.0, gexp)}, std::pow(2.0, cexp)});
    for (int cexp = -3; cexp <= 10; ++cexp)
        grid.push_back({{svm::Kernel::Type::linear, 0.0}, std::pow(2.0, cexp)});
    return grid;
}

namespace {

// Deterministic Fisher-Yates over index list.
void shuffle_indices(std::vector<int>& idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
        std::swap(idx[i - 1], idx[j]);
    }
}

// Stratified fold assignment: per class, shuffled then dealt round-robin.
std::vector<int> fold_assignment(const std::vector<int>& labels, int n_classes, int k,
                                 uint64_t seed) {
    std::vector<int> fold(labels.size(), -1);
    Rng rng(derive_seed(seed, 0xf01d));
    for (int cls = 0; cls < n_classes; ++cls) {
        std::vector<int> idx;
        for (size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(static_cast<int>(i));
        if (static_cast<int>(idx.size()) < k)
            throw UsageError("cross-validation: class " + std::to_string(cls) + " has " +
                             std::to_string(idx.size()) + " examples, needs >= " +
                             std::to_string(k));
        shuffle_indices(idx, rng);
        for (size_t p = 0; p < idx.size(); ++p)
            fold[static_cast<size_t>(idx[p])] = static_cast<int>(p % static_cast<size_t>(k));
    }
    return fold;
}

struct FoldCache {
    std::vector<int> train_idx, test_idx;
    std::vector<int> ytr;                      // +-1
    std::vector<std::vector<double>> d2_tt, d2_te;    // squared distances (standardized)
    std::vector<std::vector<double>> dot_tt, dot_te;  // dot products (standardized)
};

FoldCache build_fold_cache(const std::vector<std::vector<double>>& x,
                           const std::vector<int>& labels, const std::vector<int>& fold, int f,
                           bool want_rbf, bool want_linear) {
    FoldCache fc;
    for (size_t i = 0; i < x.size(); ++i)
        (fold[i] == f ? fc.test_idx : fc.train_idx).push_back(static_cast<int>(i));
    const size_t dim = x[0].size();
    const size_t ntr = fc.train_idx.size(), nte = fc.test_idx.size();

    std::vector<double> mean(dim, 0.0), stdev(dim, 0.0);
    for (int i : fc.train_idx)
        for (size_t d = 0; d < dim; ++d) mean[d] += x[static_cast<size_t>(i)][d];
    for (auto& m : mean) m /= static_cast<double>(ntr);
    for (int i : fc.train_idx)
        for (size_t d = 0; d < dim; ++d) {
            double z = x[static_cast<size_t>(i)][d] - mean[d];
            stdev[d] += z * z;
        }
    for (auto& s : stdev) s = s > 0.0 ? std::sqrt(s / static_cast<double>(ntr)) : 1.0;

    auto standardized = [&](int i) {
        std::vector<double> z(dim);
        for (size_t d = 0; d < dim; ++d) z[d] = (x[static_cast<size_t>(i)][d] - mean[d]) / stdev[d];
        return z;
    };
    std::vector<std::vector<double>> xtr(ntr), xte(nte);
    for (size_t i = 0; i < ntr; ++i) xtr[i] = standardized(fc.train_idx[i]);
    for (size_t i = 0; i < nte; ++i) xte[i] = standardized(fc.test_idx[i]);
    fc.ytr.resize(ntr);
    for (size_t i = 0; i < ntr; ++i)
        fc.ytr[i] = labels[static_cast<size_t>(fc.train_idx[i])] == 1 ? 1 : -1;

    auto fill = [&](const std::vector<std::vector<double>>& a,
                    const std::vector<std::vector<double>>& b, bool d2,
                    std::vector<std::vector<double>>& out) {
        out.assign(a.size(), std::vector<double>(b.size()));
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) {
                double acc = 0.0;
                for (size_t d = 0; d < dim; ++d) {
                    if (d2) {
                        double z = a[i][d] - b[j][d];
                        acc += z * z;
                    } else {
                        acc += a[i][d] * b[j][d];
                    }
                }
                out[i][j] = acc;
            }
    };
    if (want_rbf) {
        fill(xtr, xtr, true, fc.d2_tt);
        fill(xte, xtr, true, fc.d2_te);
    }
    if (want_linear) {
        fill(xtr, xtr, false, fc.dot_tt);
        fill(xte, xtr, false, fc.dot_te);
    }
    return fc;
}

struct FoldEval {
    std::vector<std::vector<int>> confusion;  // true x pred
};

FoldEval eval_fold(const FoldCache& fc, const std::vector<int>& labels, const GridPoint& gp,
                   int n_classes) {
    const bool rbf = gp.kernel.type == svm::Kernel::Type::rbf;
    const auto& tt = rbf ? fc.d2_tt : fc.dot_tt;
    const auto& te = rbf ? fc.d2_te : fc.dot_te;
    const size_t ntr = fc.train_idx.size();
    std::vector<std::vector<double>> gram(ntr, std::vector<double>(ntr));
    for (size_t i = 0; i < ntr; ++i)
        for (size_t j = 0; j < ntr; ++j)
            gram[i][j] = rbf ? std::exp(-gp.kernel.gamma * tt[i][j]) : tt[i][j];
    svm::TrainOptions opts;
    svm::SmoResult sol = svm::smo_solve(gram, fc.ytr, gp.c, opts);

    FoldEval ev;
    ev.confusion.assign(static_cast<size_t>(n_classes),
                        std::vector<int>(static_cast<size_t>(n_classes), 0));
    for (size_t t = 0; t < fc.test_idx.size(); ++t) {
        double f = sol.bias;
        for (size_t i = 0; i < ntr; ++i) {
            if (sol.alpha[i] == 0.0) continue;
            double k = rbf ? std::exp(-gp.kernel.gamma * te[t][i]) : te[t][i];
            f += sol.alpha[i] * fc.ytr[i] * k;
        }
        int pred = f >= 0.0 ? 1 : 0;
        int truth = labels[static_cast<size_t>(fc.test_idx[t])];
        ev.confusion[static_cast<size_t>(truth)][static_cast<size_t>(pred)]++;
    }
    return ev;
}

double pct(double num, double den) { return den > 0 ? 100.0 * num / den : 0.0; }

json grid_point_json(const GridPoint& gp) {
    return json{{"kernel", gp.kernel.name()}, {"gamma", gp.kernel.gamma}, {"C", gp.c}};
}

GridPoint grid_point_from_json(const json& j) {
    GridPoint gp;
    gp.kernel.type = j.at("kernel").get<std::string>() == "linear" ? svm::Kernel::Type::linear
                                                                   : svm::Kernel::Type::rbf;
    gp.kernel.gamma = j.at("gamma").get<double>();
    gp.c = j.at("C").get<double>();
    return gp;
}

std::string describe(const GridPoint& gp) {
    std::ostringstream ss;
    ss << gp.kernel.name();
    if (gp.kernel.type == svm::Kernel::Type::rbf) ss << " gamma=" << gp.kernel.gamma;
    ss << " C=" << gp.c;
    return ss.str();
}

}  // namespace

CvReport kfold_cv(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                  int k, const std::vector<GridPoint>& grid, uint64_t seed,
                  const std::string& task, const std::vector<std::string>& class_names) {
    if (x.empty() || x.size() != labels.size()) throw UsageError("kfold_cv: bad inputs");
    if (k < 2) throw UsageError("kfold_cv: folds must be >= 2");
    if (grid.empty()) throw UsageError("kfold_cv: empty hyperparameter grid");
    const int n_classes = static_cast<int>(class_names.size());
    std::vector<int> fold = fold_assignment(labels, n_classes, k, seed);

    bool want_rbf = false, want_linear = false;
    for (const auto& gp : grid)
        (gp.kernel.type == svm::Kernel::Type::rbf ? want_rbf : want_linear) = true;

    std::vector<FoldCache> caches;
    caches.reserve(static_cast<size_t>(k));
    for (int f = 0; f < k; ++f)
        caches.push_back(build_fold_cache(x, labels, fold, f, want_rbf, want_linear));

    CvReport rep;
    rep.task = task;
    rep.folds = k;
    rep.seed = seed;
    rep.class_names = class_names;
    rep.selection_note =
        "hyperparameters selected by maximum average total accuracy on the same folds "
        "(no nested cross-validation)";

    double best_avg = -1.0;
    size_t best_gi = 0;
    std::vector<std::vector<FoldEval>> all(grid.size());
    for (size_t gi = 0; gi < grid.size(); ++gi) {
        double total_acc = 0.0;
        all[gi].reserve(static_cast<size_t>(k));
        for (int f = 0; f < k; ++f) {
            FoldEval ev = eval_fold(caches[static_cast<size_t>(f)], labels, grid[gi], n_classes);
            int correct = 0, count = 0;
            for (int t = 0; t < n_classes; ++t)
                for (int p = 0; p < n_classes; ++p) {
                    count += ev.confusion[static_cast<size_t>(t)][static_cast<size_t>(p)];
                    if (t == p) correct += ev.confusion[static_cast<size_t>(t)][static_cast<size_t>(p)];
                }
            total_acc += pct(correct, count);
            all[gi].push_back(std::move(ev));
        }
        double avg = total_acc / k;
        rep.grid_scores.push_back({grid[gi], avg});
        if (avg > best_avg) {
            best_avg = avg;
            best_gi = gi;
        }
    }

    rep.chosen = grid[best_gi];
    rep.chosen_avg_total = best_avg;
    rep.per_class.assign(static_cast<size_t>(n_classes), {1e9, 0.0});
    rep.total = {1e9, 0.0};
    for (int f = 0; f < k; ++f) {
        const auto& conf = all[best_gi][static_cast<size_t>(f)].confusion;
        rep.fold_confusions.push_back(conf);
        int correct = 0, count = 0;
        for (int cls = 0; cls < n_classes; ++cls) {
            int row = 0;
            for (int p = 0; p < n_classes; ++p)
                row += conf[static_cast<size_t>(cls)][static_cast<size_t>(p)];
            double acc = pct(conf[static_cast<size_t>(cls)][static_cast<size_t>(cls)], row);
            auto& st = rep.per_class[static_cast<size_t>(cls)];
            st.min_acc = std::min(st.min_acc, acc);
            st.avg_acc += acc / k;
            correct += conf[static_cast<size_t>(cls)][static_cast<size_t>(cls)];
            count += row;
        }
        double acc = pct(correct, count);
        rep.total.min_acc = std::min(rep.total.min_acc, acc);
        rep.total.avg_acc += acc / k;
    }
    return rep;
}

std::string CvReport::to_json() const {
    json j;
    j["task"] = task;
    j["folds"] = folds;
    j["seed"] = seed;
    j["selection_note"] = selection_note;
    j["chosen"] = grid_point_json(chosen);
    j["chosen_avg_total"] = chosen_avg_total;
    json per = json::object();
    for (size_t c = 0; c < class_names.size(); ++c)
        per[class_names[c]] = {{"min_acc", per_class[c].min_acc}, {"avg_acc", per_class[c].avg_acc}};
    j["per_class"] = per;
    j["total"] = {{"min_acc", total.min_acc}, {"avg_acc", total.avg_acc}};
    j["fold_confusions"] = fold_confusions;
    json gs = json::array();
    for (const auto& g : grid_scores) {
        json e = grid_point_json(g.point);
        e["avg_total"] = g.avg_total;
        gs.push_back(e);
    }
    j["grid"] = gs;
    return j.dump(2);
}

std::string CvReport::render_table() const {
    std::ostringstream ss;
    ss << task << "  (" << folds << "-fold CV, seed " << seed << ")\n";
    char line[160];
    std::snprintf(line, sizeof(line), "  %-10s %18s %18s\n", "", "Minimum Accuracy %",
                  "Average Accuracy %");
    ss << line;
    for (size_t c = 0; c < class_names.size(); ++c) {
        std::snprintf(line, sizeof(line), "  %-10s %18.1f %18.1f\n", class_names[c].c_str(),
                      per_class[c].min_acc, per_class[c].avg_acc);
        ss << line;
    }
    std::snprintf(line, sizeof(line), "  %-10s %18.1f %18.1f\n", "Total", total.min_acc,
                  total.avg_acc);
    ss << line;
    ss << "  chosen: " << describe(chosen) << "\n";
    return ss.str();
}

const char* to_string(FeatureSet fs) {
    switch (fs) {
        case FeatureSet::e8: return "e8";
        case FeatureSet::e8_rho: return "e8+rho";
        case FeatureSet::c60: return "c60";
    }
    return "?";
}

std::vector<std::vector<double>> feature_matrix(const io::FeatureFile& f, FeatureSet fs) {
    std::vector<std::vector<double>> x;
    x.reserve(f.rows.size());
    for (const auto& row : f.rows) {
        std::vector<double> v;
        if (fs == FeatureSet::e8 || fs == FeatureSet::e8_rho)
            v.assign(row.e8.begin(), row.e8.end());
        if (fs == FeatureSet::e8_rho) v.push_back(row.rho_max);
        if (fs == FeatureSet::c60) v.assign(row.c60.begin(), row.c60.end());
        x.push_back(std::move(v));
    }
    return x;
}

std::vector<int> three_class_labels(const io::FeatureFile& f) {
    std::vector<int> labels;
    labels.reserve(f.rows.size());
    for (const auto& row : f.rows) {
        if (row.label == "human")
            labels.push_back(0);
        else if (row.label == "animal")
            labels.push_back(1);
        else if (row.label == "clutter")
            labels.push_back(2);
        else
            throw DataError("unknown label '" + row.label + "' for event " + row.event_id);
    }
    return labels;
}

int TrainedPipeline::classify(std::span<const double> c60, std::span<const double> e8) const {
    if (stage1.predict(c60) < 0) return 2;
    return stage2.predict(e8) > 0 ? 0 : 1;
}

std::string TrainedPipeline::to_json() const {
    json j;
    j["stage1"] = json::parse(stage1.to_json());
    j["stage2"] = json::parse(stage2.to_json());
    j["stage1_grid"] = grid_point_json(stage1_grid);
    j["stage2_grid"] = grid_point_json(stage2_grid);
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    return j.dump(2);
}

TrainedPipeline TrainedPipeline::from_json(const std::string& text) {
    json j = json::parse(text);
    TrainedPipeline p;
    p.stage1 = svm::SvmModel::from_json(j.at("stage1").dump());
    p.stage2 = svm::SvmModel::from_json(j.at("stage2").dump());
    p.stage1_grid = grid_point_from_json(j.at("stage1_grid"));
    p.stage2_grid = grid_point_from_json(j.at("stage2_grid"));
    p.config_hash = j.at("config_hash").get<std::string>();
    p.seed = j.at("seed").get<uint64_t>();
    return p;
}

std::string PipelineReport::to_json() const {
    json j;
    j["folds"] = folds;
    j["seed"] = seed;
    j["selection_note"] = selection_note;
    j["stage1"] = grid_point_json(stage1);
    j["stage2"] = grid_point_json(stage2);
    const char* names[5] = {"Clutter", "Intruder", "Human", "Animal", "Overall"};
    json table = json::object();
    for (int r = 0; r < 5; ++r)
        table[names[r]] = {{"min_acc", rows[static_cast<size_t>(r)].min_acc},
                           {"avg_acc", rows[static_cast<size_t>(r)].avg_acc}};
    j["accuracy"] = table;
    j["fold_confusions"] = fold_confusions;
    j["confusion_order"] = {"human", "animal", "clutter"};
    return j.dump(2);
}

std::string PipelineReport::render_table() const {
    std::ostringstream ss;
    ss << "2-step pipeline: stage 1 = C60 intruder vs clutter, stage 2 = E8 human vs animal\n";
    char line[160];
    std::snprintf(line, sizeof(line), "  %-10s %18s %18s\n", "", "Minimum Accuracy %",
                  "Average Accuracy %");
    ss << line;
    const char* names[5] = {"Clutter", "Intruder", "Human", "Animal", "Overall"};
    for (int r = 0; r < 5; ++r) {
        std::snprintf(line, sizeof(line), "  %-10s %18.1f %18.1f\n", names[r],
                      rows[static_cast<size_t>(r)].min_acc, rows[static_cast<size_t>(r)].avg_acc);
        ss << line;
    }
    ss << "  stage 1: " << describe(stage1) << "\n  stage 2: " << describe(stage2) << "\n";
    return ss.str();
}

PipelineResult train_pipeline(const io::FeatureFile& features, const std::vector<GridPoint>& grid,
                              int folds, uint64_t seed) {
    const auto labels3 = three_class_labels(features);
    const auto c60 = feature_matrix(features, FeatureSet::c60);
    const auto e8 = feature_matrix(features, FeatureSet::e8);
    const size_t n = labels3.size();

    // Stage 1: intruder (human or animal) vs clutter on c60.
    std::vector<int> bin1(n);
    for (size_t i = 0; i < n; ++i) bin1[i] = labels3[i] == 2 ? 0 : 1;
    PipelineResult out;
    out.stage1_cv = kfold_cv(c60, bin1, folds, grid, seed, "stage 1: intruder vs clutter (C60)",
                             {"Clutter", "Intruder"});

    // Stage 2: human vs animal on e8, intruder events only.
    std::vector<std::vector<double>> e8_intr;
    std::vector<int> bin2;
    for (size_t i = 0; i < n; ++i) {
        if (labels3[i] == 2) continue;
        e8_intr.push_back(e8[i]);
        bin2.push_back(labels3[i] == 0 ? 1 : 0);
    }
    out.stage2_cv = kfold_cv(e8_intr, bin2, folds, grid, seed, "stage 2: human vs animal (E8)",
                             {"Animal", "Human"});

    const GridPoint gp1 = out.stage1_cv.chosen;
    const GridPoint gp2 = out.stage2_cv.chosen;

    // Composed 3-class evaluation on shared stratified folds.
    std::vector<int> fold = fold_assignment(labels3, 3, folds, seed);
    PipelineReport rep;
    rep.folds = folds;
    rep.seed = seed;
    rep.stage1 = gp1;
    rep.stage2 = gp2;
    rep.selection_note =
        "stage hyperparameters selected independently per stage on the same folds";
    for (auto& r : rep.rows) r.min_acc = 1e9;

    std::vector<std::string> ids;
    for (const auto& row : features.rows) ids.push_back(row.event_id);

    for (int f = 0; f < folds; ++f) {
        std::vector<std::vector<double>> c60_tr, e8_tr2;
        std::vector<int> y1_tr, y2_tr;
        std::vector<std::string> names1, names2;
        for (size_t i = 0; i < n; ++i) {
            if (fold[i] == f) continue;
            c60_tr.push_back(c60[i]);
            y1_tr.push_back(bin1[i] == 1 ? 1 : -1);
            names1.push_back(ids[i]);
            if (labels3[i] != 2) {
                e8_tr2.push_back(e8[i]);
                y2_tr.push_back(labels3[i] == 0 ? 1 : -1);
                names2.push_back(ids[i]);
            }
        }
        svm::SvmModel s1 = svm::train_svm(c60_tr, y1_tr, gp1.kernel, gp1.c, {}, &names1);
        svm::SvmModel s2 = svm::train_svm(e8_tr2, y2_tr, gp2.kernel, gp2.c, {}, &names2);

        std::vector<std::vector<int>> conf(3, std::vector<int>(3, 0));
        for (size_t i = 0; i < n; ++i) {
            if (fold[i] != f) continue;
            int pred = s1.predict(c60[i]) < 0 ? 2 : (s2.predict(e8[i]) > 0 ? 0 : 1);
            conf[static_cast<size_t>(labels3[i])][static_cast<size_t>(pred)]++;
        }
        rep.fold_confusions.push_back(conf);

        auto row_total = [&](int t) {
            return conf[static_cast<size_t>(t)][0] + conf[static_cast<size_t>(t)][1] +
                   conf[static_cast<size_t>(t)][2];
        };
        double clutter_acc = pct(conf[2][2], row_total(2));
        double intr_correct = conf[0][0] + conf[0][1] + conf[1][0] + conf[1][1];
        double intruder_acc = pct(intr_correct, row_total(0) + row_total(1));
        double human_acc = pct(conf[0][0], row_total(0));
        double animal_acc = pct(conf[1][1], row_total(1));
        double overall_acc =
            pct(conf[0][0] + conf[1][1] + conf[2][2], row_total(0) + row_total(1) + row_total(2));
        const double accs[5] = {clutter_acc, intruder_acc, human_acc, animal_acc, overall_acc};
        for (int r = 0; r < 5; ++r) {
            rep.rows[static_cast<size_t>(r)].min_acc =
                std::min(rep.rows[static_cast<size_t>(r)].min_acc, accs[r]);
            rep.rows[static_cast<size_t>(r)].avg_acc += accs[r] / folds;
        }
    }

    // Final models on the full dataset.
    std::vector<int> y1(n);
    for (size_t i = 0; i < n; ++i) y1[i] = bin1[i] == 1 ? 1 : -1;
    std::vector<int> y2;
    std::vector<std::vector<double>> e8_all2;
    for (size_t i = 0; i < n; ++i) {
        if (labels3[i] == 2) continue;
        e8_all2.push_back(e8[i]);
        y2.push_back(labels3[i] == 0 ? 1 : -1);
    }
    out.pipeline.stage1 = svm::train_svm(c60, y1, gp1.kernel, gp1.c, {}, &ids);
    out.pipeline.stage2 = svm::train_svm(e8_all2, y2, gp2.kernel, gp2.c);
    out.pipeline.stage1_grid = gp1;
    out.pipeline.stage2_grid = gp2;
    out.pipeline.config_hash = features.config_hash;
    out.pipeline.seed = seed;
    out.report = rep;
    return out;
}

}  // namespace pirsim::classifier
