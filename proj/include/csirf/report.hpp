#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csirf/config.hpp"
#include "csirf/dataset.hpp"
#include "csirf/ls.hpp"
#include "csirf/nn/train.hpp"

namespace csirf {

/// Test-set metrics: overall accuracy, per-channel accuracy at the report
/// SNR, accuracy by SNR over all channels, confusion counts, per-class
/// precision/recall. The confusion trace over its total equals the overall
/// accuracy by construction.
struct MetricsReport {
    std::string method;
    double overall_accuracy = 0.0;
    double report_snr_db = 40.0;
    std::map<std::string, double> accuracy_by_channel;
    std::map<double, double> accuracy_by_snr;
    std::vector<std::vector<uint64_t>> confusion;
    std::vector<double> precision, recall;
    uint64_t n_evaluated = 0;
    nlohmann::json meta;

    nlohmann::json to_json() const;
};

MetricsReport evaluate_predictions(const std::vector<DatasetRecord>& records,
                                   const std::vector<uint64_t>& indices,
                                   const std::vector<int>& predictions, int n_classes,
                                   double report_snr_db, const std::string& method);

MetricsReport run_eval_deep(const nn::ModelCheckpoint& ckpt,
                            const std::vector<DatasetRecord>& records,
                            const std::vector<uint64_t>& indices, const EvalOptions& opts);

MetricsReport run_eval_ls(const nn::ModelCheckpoint& ls_ckpt, const LsConfig& lcfg,
                          const std::vector<DatasetRecord>& records,
                          const std::vector<uint64_t>& indices, const EvalOptions& opts);

void write_metrics_json(const std::string& path, const MetricsReport& report);
void write_confusion_csv(const std::string& path, const MetricsReport& report);
void write_snr_accuracy_csv(const std::string& path,
                            const std::map<std::string, std::map<double, double>>& by_method);
void write_snr_accuracy_svg(const std::string& path, const std::string& title,
                            const std::map<std::string, std::map<double, double>>& by_method);

/// Fingerprint separability study. Multipath conditions come from dataset
/// records at the report SNR; the clean LoS reference is synthesized from
/// the population (averaged noisy flat-channel measurements, then LS
/// extraction), standing in for the denoised anechoic captures a hardware
/// testbed would provide.
struct DistanceStudyResult {
    std::vector<DistanceSummary> summaries;
    std::vector<std::string> warnings;
};

DistanceStudyResult run_distance_study(const DevicePopulation& pop,
                                       const std::vector<DatasetRecord>& records,
                                       const LsConfig& lcfg, const DistanceStudyOptions& opts);

void write_distance_box_svg(const std::string& path, const std::string& title,
                            const std::vector<DistanceSummary>& rows);

/// Training-variant grid for the ablation table. Variants:
/// full (both stages on augmented data), no_scl (classifier stage only),
/// no_da (both stages on unaugmented data), no_da_no_scl.
enum class Variant { Full, NoScl, NoDa, NoDaNoScl };
std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct AblationResult {
    // variant name -> snr -> accuracy on the shared multipath test split
    std::map<std::string, std::map<double, double>> accuracy;
    std::map<std::string, nn::ModelCheckpoint> checkpoints;
    nlohmann::json meta;
};

AblationResult run_ablation(const std::vector<DatasetRecord>& records, const DatasetSplit& split,
                            const std::vector<DatasetRecord>& flat_records,
                            const DatasetSplit& flat_split, const RunConfig& cfg,
                            const std::vector<Variant>& variants);

void write_ablation_csv(const std::string& path, const AblationResult& result);

void write_embeddings_csv(const std::string& path, const std::vector<DatasetRecord>& records,
                          const std::vector<uint64_t>& indices, const nn::EmbeddingDump& dump);

} // namespace csirf
