#include "csirf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "csirf/errors.hpp"
#include "csirf/svg.hpp"

namespace csirf {

namespace {

std::string snr_key(double snr_db) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", snr_db);
    return buf;
}

int centidb(double snr_db) { return static_cast<int>(std::lround(snr_db * 100.0)); }

std::string hex64(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}


} // namespace

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json by_snr = nlohmann::json::object();
    for (const auto& [snr, acc] : accuracy_by_snr) by_snr[snr_key(snr)] = acc;
    return {{"method", method},
            {"overall_accuracy", overall_accuracy},
            {"report_snr_db", report_snr_db},
            {"accuracy_by_channel", accuracy_by_channel},
            {"accuracy_by_snr", by_snr},
            {"confusion", confusion},
            {"precision", precision},
            {"recall", recall},
            {"n_evaluated", n_evaluated},
            {"meta", meta}};
}

MetricsReport evaluate_predictions(const std::vector<DatasetRecord>& records,
                                   const std::vector<uint64_t>& indices,
                                   const std::vector<int>& predictions, int n_classes,
                                   double report_snr_db, const std::string& method) {
    if (indices.empty()) throw data_error("evaluate: no indices");
    if (indices.size() != predictions.size())
        throw data_error("evaluate: prediction count mismatch");
    if (n_classes < 2) throw config_error("evaluate: n_classes must be >= 2");

    MetricsReport rep;
    rep.method = method;
    rep.report_snr_db = report_snr_db;
    rep.n_evaluated = indices.size();
    rep.confusion.assign(static_cast<size_t>(n_classes),
                         std::vector<uint64_t>(static_cast<size_t>(n_classes), 0));

    std::map<std::string, std::pair<uint64_t, uint64_t>> chan; // correct, total
    std::map<double, std::pair<uint64_t, uint64_t>> by_snr;
    const int want_centidb = centidb(report_snr_db);
    uint64_t correct = 0;
    for (size_t i = 0; i < indices.size(); ++i) {
        const uint64_t idx = indices[i];
        if (idx >= records.size()) throw data_error("evaluate: index out of range");
        const auto& r = records[idx];
        const int t = r.label, p = predictions[i];
        if (t < 0 || t >= n_classes) throw data_error("evaluate: true label out of range");
        if (p < 0 || p >= n_classes) throw data_error("evaluate: prediction out of range");
        ++rep.confusion[static_cast<size_t>(t)][static_cast<size_t>(p)];
        const bool ok = (t == p);
        correct += ok;
        auto& s = by_snr[r.snr_db];
        ++s.second;
        s.first += ok;
        if (centidb(r.snr_db) == want_centidb) {
            auto& c = chan[to_string(r.channel_tag)];
            ++c.second;
            c.first += ok;
        }
    }
    rep.overall_accuracy = static_cast<double>(correct) / static_cast<double>(indices.size());
    for (const auto& [tag, cnt] : chan)
        rep.accuracy_by_channel[tag] =
            static_cast<double>(cnt.first) / static_cast<double>(cnt.second);
    for (const auto& [snr, cnt] : by_snr)
        rep.accuracy_by_snr[snr] = static_cast<double>(cnt.first) / static_cast<double>(cnt.second);

    rep.precision.assign(static_cast<size_t>(n_classes), 0.0);
    rep.recall.assign(static_cast<size_t>(n_classes), 0.0);
    for (int k = 0; k < n_classes; ++k) {
        uint64_t col = 0, row = 0;
        for (int j = 0; j < n_classes; ++j) {
            col += rep.confusion[static_cast<size_t>(j)][static_cast<size_t>(k)];
            row += rep.confusion[static_cast<size_t>(k)][static_cast<size_t>(j)];
        }
        const uint64_t tp = rep.confusion[static_cast<size_t>(k)][static_cast<size_t>(k)];
        rep.precision[static_cast<size_t>(k)] =
            col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        rep.recall[static_cast<size_t>(k)] =
            row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    }
    return rep;
}

MetricsReport run_eval_deep(const nn::ModelCheckpoint& ckpt,
                            const std::vector<DatasetRecord>& records,
                            const std::vector<uint64_t>& indices, const EvalOptions& opts) {
    nn::DeepModel model = nn::DeepModel::from_checkpoint(ckpt);
    if (!model.classifier) throw data_error("eval: checkpoint has no classifier head");
    const nn::FeatureCache cache(records, SubcarrierGrid::wifi20());
    const std::vector<int> pred = nn::predict_labels(model, cache, indices, opts.batch_size);
    MetricsReport rep = evaluate_predictions(records, indices, pred, model.hcfg.n_classes,
                                             opts.report_snr_db, "deepcrf");
    // Reports must be regenerable byte-identically, so no wall-clock fields.
    rep.meta = {{"checkpoint_kind", ckpt.kind},
                {"checkpoint_hash", hex64(nn::checkpoint_hash(ckpt))},
                {"epochs_run", ckpt.epochs_run},
                {"best_epoch", ckpt.best_epoch}};
    return rep;
}

MetricsReport run_eval_ls(const nn::ModelCheckpoint& ls_ckpt, const LsConfig& lcfg,
                          const std::vector<DatasetRecord>& records,
                          const std::vector<uint64_t>& indices, const EvalOptions& opts) {
    lcfg.validate();
    std::vector<FingerprintEstimate> ests;
    ests.reserve(indices.size());
    for (uint64_t idx : indices) {
        if (idx >= records.size()) throw data_error("eval: index out of range");
        FingerprintEstimate e = extract_fingerprint_ls(records[idx].csi, lcfg);
        e.source_label = records[idx].label;
        ests.push_back(std::move(e));
    }
    const std::vector<int> pred = ls_classifier_predict(ls_ckpt, ests);
    const int n_classes = ls_ckpt.config.at("n_classes").get<int>();
    MetricsReport rep = evaluate_predictions(records, indices, pred, n_classes,
                                             opts.report_snr_db, "ls_baseline");
    rep.meta = {{"checkpoint_kind", ls_ckpt.kind},
                {"checkpoint_hash", hex64(nn::checkpoint_hash(ls_ckpt))},
                {"num_taps", lcfg.num_taps}};
    return rep;
}

void write_metrics_json(const std::string& path, const MetricsReport& report) {
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for writing: " + path);
    os << report.to_json().dump(2) << "\n";
    if (!os) throw data_error("write failed: " + path);
}

void write_confusion_csv(const std::string& path, const MetricsReport& report) {
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for writing: " + path);
    const size_t K = report.confusion.size();
    os << "true\\pred";
    for (size_t k = 0; k < K; ++k) os << ',' << k;
    os << '\n';
    for (size_t t = 0; t < K; ++t) {
        os << t;
        for (size_t p = 0; p < K; ++p) os << ',' << report.confusion[t][p];
        os << '\n';
    }
    if (!os) throw data_error("write failed: " + path);
}

void write_snr_accuracy_csv(const std::string& path,
                            const std::map<std::string, std::map<double, double>>& by_method) {
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for writing: " + path);
    os << "method,snr_db,accuracy\n";
    os.precision(10);
    for (const auto& [method, curve] : by_method)
        for (const auto& [snr, acc] : curve)
            os << method << ',' << snr << ',' << acc << '\n';
    if (!os) throw data_error("write failed: " + path);
}

void write_snr_accuracy_svg(const std::string& path, const std::string& title,
                            const std::map<std::string, std::map<double, double>>& by_method) {
    std::vector<svg::Series> series;
    for (const auto& [method, curve] : by_method) {
        svg::Series s;
        s.name = method;
        for (const auto& [snr, acc] : curve) s.points.emplace_back(snr, acc);
        series.push_back(std::move(s));
    }
    svg::write_file(path, svg::line_chart(title, "SNR (dB)", "accuracy", series));
}

DistanceStudyResult run_distance_study(const DevicePopulation& pop,
                                       const std::vector<DatasetRecord>& records,
                                       const LsConfig& lcfg, const DistanceStudyOptions& opts) {
    lcfg.validate();
    if (pop.size() < 2) throw data_error("distance study: population too small");
    if (opts.n_ref_per_device < 2)
        throw config_error("distance study: n_ref_per_device must be >= 2");
    if (opts.denoise_count < 1) throw config_error("distance study: denoise_count must be >= 1");
    if (opts.max_per_condition < 2)
        throw config_error("distance study: max_per_condition must be >= 2");

    std::vector<FingerprintEstimate> ests;
    const NoiseSpec noise = NoiseSpec::at(opts.report_snr_db);
    const CsiVector flat(pop.grid,
                         std::vector<cdouble>(static_cast<size_t>(pop.grid->count()), 1.0));

    // Clean reference: repeated flat-channel measurements, averaged, then
    // extracted.
    for (int d = 0; d < pop.size(); ++d) {
        const auto& fp = pop.fingerprints[static_cast<size_t>(d)];
        for (int r = 0; r < opts.n_ref_per_device; ++r) {
            RandomStream rng(opts.seed,
                             static_cast<uint64_t>(d) * static_cast<uint64_t>(opts.n_ref_per_device) +
                                 static_cast<uint64_t>(r));
            std::vector<CsiVector> reps;
            reps.reserve(static_cast<size_t>(opts.denoise_count));
            for (int m = 0; m < opts.denoise_count; ++m)
                reps.push_back(compose_csi(flat, fp, noise, rng));
            FingerprintEstimate e = extract_fingerprint_ls(denoise_average(reps), lcfg);
            e.source_label = fp.device_id;
            e.condition_tag = "LoS-ref";
            ests.push_back(std::move(e));
        }
    }

    // Multipath conditions straight from the dataset at the report SNR.
    const int want = centidb(opts.report_snr_db);
    std::map<std::pair<int, uint8_t>, int> taken;
    for (const auto& rec : records) {
        if (centidb(rec.snr_db) != want) continue;
        auto& count = taken[{rec.label, static_cast<uint8_t>(rec.channel_tag)}];
        if (count >= opts.max_per_condition) continue;
        ++count;
        FingerprintEstimate e = extract_fingerprint_ls(rec.csi, lcfg);
        e.source_label = rec.label;
        e.condition_tag = to_string(rec.channel_tag);
        ests.push_back(std::move(e));
    }

    DistanceStudyResult out;
    for (const char* required : {"B-NLoS", "C-NLoS"}) {
        const bool present = std::any_of(ests.begin(), ests.end(), [&](const auto& e) {
            return e.condition_tag == required;
        });
        if (!present)
            out.warnings.push_back(std::string("condition ") + required + " missing at " +
                                   snr_key(opts.report_snr_db) + " dB; partial output");
    }
    out.summaries = distance_study(ests);
    return out;
}

void write_distance_box_svg(const std::string& path, const std::string& title,
                            const std::vector<DistanceSummary>& rows) {
    std::vector<svg::Box> boxes;
    for (const auto& r : rows)
        boxes.push_back(svg::Box{r.condition_tag + " " + r.kind, r.min, r.q1, r.median, r.q3,
                                 r.max});
    svg::write_file(path, svg::box_plot(title, "pairwise distance", boxes));
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoScl: return "no_scl";
        case Variant::NoDa: return "no_da";
        case Variant::NoDaNoScl: return "no_da_no_scl";
    }
    throw config_error("unknown variant value");
}

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no_scl") return Variant::NoScl;
    if (s == "no_da") return Variant::NoDa;
    if (s == "no_da_no_scl") return Variant::NoDaNoScl;
    throw config_error("unknown variant: " + s);
}

AblationResult run_ablation(const std::vector<DatasetRecord>& records, const DatasetSplit& split,
                            const std::vector<DatasetRecord>& flat_records,
                            const DatasetSplit& flat_split, const RunConfig& cfg,
                            const std::vector<Variant>& variants) {
    if (variants.empty()) throw config_error("ablation: no variants requested");
    cfg.validate();
    AblationResult out;
    out.meta = {{"config", cfg.to_json()}};
    const nn::FeatureCache test_cache(records, SubcarrierGrid::wifi20());

    for (Variant v : variants) {
        const bool use_flat = (v == Variant::NoDa || v == Variant::NoDaNoScl);
        const bool use_scl = (v == Variant::Full || v == Variant::NoDa);
        const auto& train_records = use_flat ? flat_records : records;
        const auto& train_split = use_flat ? flat_split : split;
        if (use_flat && flat_records.empty())
            throw data_error("ablation: variant " + to_string(v) + " needs an unaugmented dataset");

        nn::ModelCheckpoint stage2;
        if (use_scl) {
            const nn::ModelCheckpoint stage1 =
                nn::train_stage1(train_records, train_split, cfg.encoder, cfg.head, cfg.train);
            stage2 = nn::train_stage2(train_records, train_split, cfg.encoder, cfg.head, cfg.train,
                                      &stage1, false);
        } else {
            stage2 = nn::train_stage2(train_records, train_split, cfg.encoder, cfg.head, cfg.train,
                                      nullptr, false);
        }

        nn::DeepModel model = nn::DeepModel::from_checkpoint(stage2);
        const std::vector<int> pred =
            nn::predict_labels(model, test_cache, split.test, cfg.eval.batch_size);
        const MetricsReport rep = evaluate_predictions(records, split.test, pred,
                                                       cfg.head.n_classes,
                                                       cfg.eval.report_snr_db, to_string(v));
        out.accuracy[to_string(v)] = rep.accuracy_by_snr;
        out.meta[to_string(v)] = {{"epochs_run", stage2.epochs_run},
                                  {"best_epoch", stage2.best_epoch},
                                  {"overall_accuracy", rep.overall_accuracy}};
        out.checkpoints[to_string(v)] = std::move(stage2);
    }
    return out;
}

void write_ablation_csv(const std::string& path, const AblationResult& result) {
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for writing: " + path);
    os << "variant,snr_db,accuracy\n";
    os.precision(10);
    for (const auto& [name, curve] : result.accuracy)
        for (const auto& [snr, acc] : curve) os << name << ',' << snr << ',' << acc << '\n';
    if (!os) throw data_error("write failed: " + path);
}

void write_embeddings_csv(const std::string& path, const std::vector<DatasetRecord>& records,
                          const std::vector<uint64_t>& indices, const nn::EmbeddingDump& dump) {
    if (dump.encoder_out.size() != indices.size())
        throw data_error("embeddings: dump size mismatch");
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for writing: " + path);
    const size_t E = dump.encoder_out.empty() ? 0 : dump.encoder_out.front().size();
    const size_t P = dump.projected.empty() ? 0 : dump.projected.front().size();
    os << "index,label,channel,snr_db";
    for (size_t e = 0; e < E; ++e) os << ",e" << e;
    for (size_t p = 0; p < P; ++p) os << ",p" << p;
    os << '\n';
    char buf[48];
    for (size_t i = 0; i < indices.size(); ++i) {
        const auto& r = records[indices[i]];
        std::snprintf(buf, sizeof(buf), "%.2f", r.snr_db);
        os << indices[i] << ',' << r.label << ',' << to_string(r.channel_tag) << ',' << buf;
        for (float v : dump.encoder_out[i]) {
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
            os << ',' << buf;
        }
        if (!dump.projected.empty())
            for (float v : dump.projected[i]) {
                std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
                os << ',' << buf;
            }
        os << '\n';
    }
    if (!os) throw data_error("write failed: " + path);
}

} // namespace csirf
