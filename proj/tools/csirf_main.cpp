// Command-line workbench: synthesize populations and datasets, train the
// two-stage identifier, run the LS baseline, and emit comparison artifacts.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "csirf/config.hpp"
#include "csirf/dataset.hpp"
#include "csirf/devices.hpp"
#include "csirf/errors.hpp"
#include "csirf/ls.hpp"
#include "csirf/nn/train.hpp"
#include "csirf/report.hpp"
#include "csirf/svg.hpp"

namespace fs = std::filesystem;
using csirf::RunConfig;
using nlohmann::json;

namespace {

struct GlobalArgs {
    std::string preset = "desk";
    std::string config_path;
    std::string out_dir = "out";
    int64_t seed = -1;
};

RunConfig make_config(const GlobalArgs& g) {
    RunConfig cfg = RunConfig::from_preset(g.preset);
    if (!g.config_path.empty()) cfg.apply(csirf::load_json_file(g.config_path));
    if (g.seed >= 0) {
        const auto s = static_cast<uint64_t>(g.seed);
        cfg.population_seed = s;
        cfg.dataset_seed = s + 1;
        cfg.split_seed = s + 2;
        cfg.train.seed = s + 3;
        cfg.distances.seed = s + 4;
    }
    cfg.validate();
    return cfg;
}

std::string out_path(const GlobalArgs& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

std::string hex64(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<uint64_t> subset_indices(const csirf::DatasetSplit& split, const std::string& name) {
    if (name == "train") return split.train;
    if (name == "val") return split.val;
    if (name == "test") return split.test;
    throw csirf::config_error("unknown subset: " + name);
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw csirf::data_error("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
    if (!os) throw csirf::data_error("write failed: " + path);
}

json history_json(const csirf::nn::ModelCheckpoint& ckpt) {
    return {{"kind", ckpt.kind},
            {"epochs_run", ckpt.epochs_run},
            {"best_epoch", ckpt.best_epoch},
            {"val_loss", ckpt.val_loss_history},
            {"val_metric", ckpt.val_metric_history}};
}

std::vector<csirf::FingerprintEstimate> extract_subset(
    const std::vector<csirf::DatasetRecord>& records, const std::vector<uint64_t>& indices,
    const csirf::LsConfig& lcfg) {
    std::vector<csirf::FingerprintEstimate> ests;
    ests.reserve(indices.size());
    for (uint64_t i : indices) {
        if (i >= records.size()) throw csirf::data_error("split index out of range");
        csirf::FingerprintEstimate e = csirf::extract_fingerprint_ls(records[i].csi, lcfg);
        e.source_label = records[i].label;
        e.condition_tag = to_string(records[i].channel_tag);
        ests.push_back(std::move(e));
    }
    return ests;
}

int run(int argc, char** argv) {
    CLI::App app{"CSI radio-fingerprint identification workbench"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--preset", g.preset, "configuration preset: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--config", g.config_path, "JSON config file with overrides");
    app.add_option("--out", g.out_dir, "output directory (default: out)");
    app.add_option("--seed", g.seed, "base seed overriding all stage seeds");

    // gen-population
    auto* gp = app.add_subcommand("gen-population", "synthesize a device population");
    int gp_devices = -1, gp_order = -1;
    double gp_scale = -1.0;
    std::string gp_profile;
    gp->add_option("--devices", gp_devices, "number of devices");
    gp->add_option("--scale", gp_scale, "fingerprint RMS scale");
    gp->add_option("--profile", gp_profile, "gaussian or smooth");
    gp->add_option("--order", gp_order, "identifiability order (protected tap span)");

    // gen-dataset
    auto* gd = app.add_subcommand("gen-dataset", "build the augmented dataset grid");
    std::string gd_population, gd_name = "dataset.csf";
    int gd_realizations = -1;
    bool gd_flat = false;
    gd->add_option("--population", gd_population, "population file (default <out>/population.csp)");
    gd->add_option("--realizations", gd_realizations, "realizations per grid cell");
    gd->add_option("--name", gd_name, "output dataset file name");
    gd->add_flag("--flat", gd_flat,
                 "unaugmented dataset: bare device responses, single condition, no noise");

    // split
    auto* sp = app.add_subcommand("split", "stratified train/val/test split");
    std::string sp_dataset;
    sp->add_option("--dataset", sp_dataset, "dataset file")->required();

    // extract-ls
    auto* xl = app.add_subcommand("extract-ls", "run LS fingerprint extraction over a dataset");
    std::string xl_dataset;
    uint64_t xl_limit = 0;
    xl->add_option("--dataset", xl_dataset, "dataset file")->required();
    xl->add_option("--limit", xl_limit, "stop after N records (0 = all)");

    // distances
    auto* di = app.add_subcommand("distances", "fingerprint distance study");
    std::string di_dataset, di_population;
    di->add_option("--dataset", di_dataset, "dataset file")->required();
    di->add_option("--population", di_population, "population file")->required();

    // train
    auto* tr = app.add_subcommand("train", "train the identifier");
    std::string tr_dataset, tr_split, tr_stage1, tr_variant = "full";
    int tr_stage = 0;
    bool tr_freeze = false;
    tr->add_option("--dataset", tr_dataset, "dataset file")->required();
    tr->add_option("--split", tr_split, "split file")->required();
    tr->add_option("--stage", tr_stage, "1 (contrastive) or 2 (classifier)")->required();
    tr->add_option("--stage1-ckpt", tr_stage1, "stage-1 checkpoint (stage 2, variant full)");
    tr->add_option("--variant", tr_variant, "full or no_scl (stage 2 initialization)");
    tr->add_flag("--freeze-encoder", tr_freeze, "keep encoder fixed during stage 2");

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a split subset");
    std::string ev_method = "deepcrf", ev_ckpt, ev_dataset, ev_split, ev_subset = "test";
    ev->add_option("--method", ev_method, "deepcrf or ls_baseline")
        ->check(CLI::IsMember({"deepcrf", "ls_baseline"}));
    ev->add_option("--ckpt", ev_ckpt, "checkpoint (ls_baseline trains one when omitted)");
    ev->add_option("--dataset", ev_dataset, "dataset file")->required();
    ev->add_option("--split", ev_split, "split file")->required();
    ev->add_option("--subset", ev_subset, "train, val, or test");

    // ablate
    auto* ab = app.add_subcommand("ablate", "train and compare the ablation variants");
    std::string ab_dataset, ab_split, ab_flat_dataset, ab_flat_split;
    std::vector<std::string> ab_variants{"full", "no_scl", "no_da", "no_da_no_scl"};
    ab->add_option("--dataset", ab_dataset, "augmented dataset")->required();
    ab->add_option("--split", ab_split, "split of the augmented dataset")->required();
    ab->add_option("--flat-dataset", ab_flat_dataset, "unaugmented dataset (no_da variants)");
    ab->add_option("--flat-split", ab_flat_split, "split of the unaugmented dataset");
    ab->add_option("--variants", ab_variants, "subset of variants to run");

    // export-embeddings
    auto* ex = app.add_subcommand("export-embeddings", "dump encoder/projection embeddings");
    std::string ex_ckpt, ex_dataset, ex_split, ex_subset = "test";
    uint64_t ex_limit = 0;
    ex->add_option("--ckpt", ex_ckpt, "checkpoint")->required();
    ex->add_option("--dataset", ex_dataset, "dataset file")->required();
    ex->add_option("--split", ex_split, "split file")->required();
    ex->add_option("--subset", ex_subset, "train, val, or test");
    ex->add_option("--limit", ex_limit, "cap the number of rows (0 = all)");

    CLI11_PARSE(app, argc, argv);
    RunConfig cfg = make_config(g);

    if (gp->parsed()) {
        if (gp_devices > 0) cfg.n_devices = gp_devices;
        if (gp_scale >= 0.0) cfg.fingerprint_scale = gp_scale;
        if (!gp_profile.empty()) cfg.profile = csirf::profile_from_string(gp_profile);
        if (gp_order > 0) cfg.identifiability_order = gp_order;
        cfg.head.n_classes = cfg.n_devices;
        cfg.validate();
        const auto pop = csirf::generate_population(cfg.n_devices, cfg.profile,
                                                    cfg.fingerprint_scale,
                                                    cfg.identifiability_order,
                                                    cfg.population_seed);
        const std::string path = out_path(g, "population.csp");
        csirf::save_population(path, pop);
        const json info = {{"path", path},
                           {"n_devices", pop.size()},
                           {"scale", pop.scale},
                           {"profile", to_string(pop.profile)},
                           {"identifiability_order", pop.identifiability_order},
                           {"seed", pop.seed},
                           {"hash", hex64(csirf::population_hash(pop))},
                           {"min_interclass_distance", csirf::min_interclass_distance(pop)}};
        std::cout << info.dump(2) << "\n";
        return 0;
    }

    if (gd->parsed()) {
        const std::string pop_path =
            gd_population.empty() ? out_path(g, "population.csp") : gd_population;
        const auto pop = csirf::load_population(pop_path);
        csirf::BuildOptions opts = cfg.build;
        if (gd_realizations > 0) opts.n_realizations = gd_realizations;
        std::vector<csirf::ChannelModelSpec> conditions = csirf::ChannelModelSpec::standard_six();
        if (gd_flat) {
            opts.augment = false;
            opts.snr_grid_db = {40.0};
            conditions = {csirf::ChannelModelSpec::preset(csirf::ChannelModel::ModelB, true)};
        }
        auto built = csirf::build_dataset(pop, conditions, opts, cfg.dataset_seed);
        const std::string path = out_path(g, gd_name);
        json manifest = built.manifest;
        manifest["file"] = csirf::write_records(path, built.records);
        manifest["population_file"] = pop_path;
        write_json_file(path + ".manifest.json", manifest);
        std::cout << manifest.dump(2) << "\n";
        return 0;
    }

    if (sp->parsed()) {
        const auto records = csirf::read_records(sp_dataset);
        const auto split = csirf::split_dataset(records, cfg.fractions, cfg.split_seed,
                                                cfg.min_stratum_size);
        const std::string path = out_path(g, "split.css");
        csirf::save_split(path, split);
        if (!split.stratified)
            std::cerr << "warning: strata too small; fell back to a global split\n";
        const json info = {{"path", path},
                           {"train", split.train.size()},
                           {"val", split.val.size()},
                           {"test", split.test.size()},
                           {"stratified", split.stratified}};
        std::cout << info.dump(2) << "\n";
        return 0;
    }

    if (xl->parsed()) {
        const auto records = csirf::read_records(xl_dataset);
        const std::string path = out_path(g, "ls_estimates.csv");
        std::ofstream os(path);
        if (!os) throw csirf::data_error("cannot open for writing: " + path);
        const int width = cfg.ls.grid->count();
        os << "index,label,channel,snr_db,faded";
        for (int k = 0; k < width; ++k) os << ",re" << k << ",im" << k;
        os << '\n';
        os.precision(9);
        uint64_t done = 0;
        for (size_t i = 0; i < records.size(); ++i) {
            if (xl_limit && done >= xl_limit) break;
            const auto est = csirf::extract_fingerprint_ls(records[i].csi, cfg.ls);
            os << i << ',' << records[i].label << ',' << to_string(records[i].channel_tag) << ','
               << records[i].snr_db << ',' << est.faded_count();
            for (const auto& v : est.values) os << ',' << v.real() << ',' << v.imag();
            os << '\n';
            ++done;
        }
        if (!os) throw csirf::data_error("write failed: " + path);
        std::cout << "wrote " << done << " estimates to " << path << "\n";
        return 0;
    }

    if (di->parsed()) {
        const auto pop = csirf::load_population(di_population);
        const auto records = csirf::read_records(di_dataset);
        const auto result = csirf::run_distance_study(pop, records, cfg.ls, cfg.distances);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        const std::string csv = out_path(g, "distances.csv");
        csirf::write_distance_csv(csv, result.summaries);
        csirf::write_distance_box_svg(out_path(g, "distances.svg"),
                                      "Pairwise fingerprint distances", result.summaries);
        for (const auto& r : result.summaries)
            std::printf("%-10s %-5s median %.6f  [%.6f, %.6f]  pairs %llu\n",
                        r.condition_tag.c_str(), r.kind.c_str(), r.median, r.min, r.max,
                        static_cast<unsigned long long>(r.n_pairs));
        std::cout << "wrote " << csv << "\n";
        return 0;
    }

    if (tr->parsed()) {
        const auto records = csirf::read_records(tr_dataset);
        const auto split = csirf::load_split(tr_split);
        csirf::nn::ModelCheckpoint ckpt;
        std::string name;
        if (tr_stage == 1) {
            ckpt = csirf::nn::train_stage1(records, split, cfg.encoder, cfg.head, cfg.train);
            name = "stage1.ckpt";
        } else if (tr_stage == 2) {
            const csirf::Variant variant = csirf::variant_from_string(tr_variant);
            csirf::nn::ModelCheckpoint stage1;
            const csirf::nn::ModelCheckpoint* s1 = nullptr;
            if (variant == csirf::Variant::Full || variant == csirf::Variant::NoDa) {
                const std::string s1_path =
                    tr_stage1.empty() ? out_path(g, "stage1.ckpt") : tr_stage1;
                stage1 = csirf::nn::load_checkpoint(s1_path);
                s1 = &stage1;
            }
            ckpt = csirf::nn::train_stage2(records, split, cfg.encoder, cfg.head, cfg.train, s1,
                                           tr_freeze);
            name = "stage2_" + tr_variant + ".ckpt";
        } else {
            throw csirf::config_error("train: --stage must be 1 or 2");
        }
        const std::string path = out_path(g, name);
        csirf::nn::save_checkpoint(path, ckpt);
        write_json_file(path + ".history.json", history_json(ckpt));
        json info = history_json(ckpt);
        info["path"] = path;
        info["hash"] = hex64(csirf::nn::checkpoint_hash(ckpt));
        std::cout << info.dump(2) << "\n";
        return 0;
    }

    if (ev->parsed()) {
        const auto records = csirf::read_records(ev_dataset);
        const auto split = csirf::load_split(ev_split);
        const auto indices = subset_indices(split, ev_subset);
        csirf::MetricsReport rep;
        if (ev_method == "deepcrf") {
            if (ev_ckpt.empty()) throw csirf::config_error("eval: --ckpt required for deepcrf");
            rep = csirf::run_eval_deep(csirf::nn::load_checkpoint(ev_ckpt), records, indices,
                                       cfg.eval);
        } else {
            csirf::nn::ModelCheckpoint ls_ckpt;
            if (ev_ckpt.empty()) {
                csirf::LsClassifierConfig lcc;
                lcc.n_classes = cfg.head.n_classes;
                lcc.seed = cfg.train.seed;
                const auto train_est = extract_subset(records, split.train, cfg.ls);
                const auto val_est = extract_subset(records, split.val, cfg.ls);
                ls_ckpt = csirf::train_ls_classifier(train_est, val_est, lcc);
                const std::string lp = out_path(g, "ls_classifier.ckpt");
                csirf::nn::save_checkpoint(lp, ls_ckpt);
                std::cerr << "trained LS classifier -> " << lp << "\n";
            } else {
                ls_ckpt = csirf::nn::load_checkpoint(ev_ckpt);
            }
            rep = csirf::run_eval_ls(ls_ckpt, cfg.ls, records, indices, cfg.eval);
        }
        const std::string base = "metrics_" + ev_method;
        csirf::write_metrics_json(out_path(g, base + ".json"), rep);
        csirf::write_confusion_csv(out_path(g, base + "_confusion.csv"), rep);
        std::map<std::string, std::map<double, double>> curves{{rep.method, rep.accuracy_by_snr}};
        csirf::write_snr_accuracy_csv(out_path(g, base + "_by_snr.csv"), curves);
        csirf::write_snr_accuracy_svg(out_path(g, base + "_by_snr.svg"),
                                      "Accuracy vs SNR (" + rep.method + ")", curves);
        std::printf("method=%s subset=%s n=%llu overall_accuracy=%.4f\n", rep.method.c_str(),
                    ev_subset.c_str(), static_cast<unsigned long long>(rep.n_evaluated),
                    rep.overall_accuracy);
        for (const auto& [snr, acc] : rep.accuracy_by_snr)
            std::printf("  snr %5.1f dB  accuracy %.4f\n", snr, acc);
        return 0;
    }

    if (ab->parsed()) {
        const auto records = csirf::read_records(ab_dataset);
        const auto split = csirf::load_split(ab_split);
        std::vector<csirf::DatasetRecord> flat_records;
        csirf::DatasetSplit flat_split;
        if (!ab_flat_dataset.empty()) {
            flat_records = csirf::read_records(ab_flat_dataset);
            if (ab_flat_split.empty())
                throw csirf::config_error("ablate: --flat-split required with --flat-dataset");
            flat_split = csirf::load_split(ab_flat_split);
        }
        std::vector<csirf::Variant> variants;
        for (const auto& v : ab_variants) variants.push_back(csirf::variant_from_string(v));
        const auto result =
            csirf::run_ablation(records, split, flat_records, flat_split, cfg, variants);
        csirf::write_ablation_csv(out_path(g, "ablation.csv"), result);
        std::map<std::string, std::map<double, double>> curves = result.accuracy;
        csirf::write_snr_accuracy_svg(out_path(g, "ablation.svg"),
                                      "Ablation: accuracy vs SNR", curves);
        for (const auto& [name, ckpt] : result.checkpoints)
            csirf::nn::save_checkpoint(out_path(g, "ablate_" + name + ".ckpt"), ckpt);
        write_json_file(out_path(g, "ablation_meta.json"), result.meta);
        for (const auto& [name, curve] : result.accuracy) {
            std::printf("%-14s", name.c_str());
            for (const auto& [snr, acc] : curve) std::printf("  %.1f:%.4f", snr, acc);
            std::printf("\n");
        }
        return 0;
    }

    if (ex->parsed()) {
        const auto records = csirf::read_records(ex_dataset);
        const auto split = csirf::load_split(ex_split);
        auto indices = subset_indices(split, ex_subset);
        if (ex_limit && indices.size() > ex_limit) indices.resize(ex_limit);
        auto model = csirf::nn::DeepModel::from_checkpoint(csirf::nn::load_checkpoint(ex_ckpt));
        const csirf::nn::FeatureCache cache(records, csirf::SubcarrierGrid::wifi20());
        const auto dump =
            csirf::nn::compute_embeddings(model, cache, indices, cfg.eval.batch_size);
        const std::string path = out_path(g, "embeddings.csv");
        csirf::write_embeddings_csv(path, records, indices, dump);
        std::cout << "wrote " << indices.size() << " embeddings to " << path << "\n";
        return 0;
    }

    throw csirf::config_error("no subcommand selected");
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const csirf::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const csirf::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const csirf::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
