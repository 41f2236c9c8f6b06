#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "csirf/dataset.hpp"
#include "csirf/devices.hpp"
#include "csirf/ls.hpp"
#include "csirf/nn/model.hpp"
#include "csirf/nn/train.hpp"

namespace csirf {

nlohmann::json load_json_file(const std::string& path);

/// Dotted-path lookup ("train.lr"). Returns nullptr when any segment is
/// missing.
const nlohmann::json* json_get(const nlohmann::json& root, const std::string& dotted_path);

struct DistanceStudyOptions {
    double report_snr_db = 40.0;
    int n_ref_per_device = 20;
    int denoise_count = 100;
    int max_per_condition = 20;
    uint64_t seed = 99;
};

struct EvalOptions {
    double report_snr_db = 40.0;
    int batch_size = 256;
};

/// Bundle of every knob a run needs; presets pin the two supported scales
/// and a JSON config may override individual keys.
struct RunConfig {
    std::string preset = "desk";

    int n_devices = 19;
    double fingerprint_scale = 0.03;
    FingerprintProfile profile = FingerprintProfile::Smooth;
    int identifiability_order = 9;
    uint64_t population_seed = 42;

    BuildOptions build;
    uint64_t dataset_seed = 1;

    SplitFractions fractions;
    uint64_t split_seed = 2;
    int min_stratum_size = 10;

    nn::EncoderConfig encoder;
    nn::HeadConfig head;
    nn::TrainConfig train;

    LsConfig ls;
    EvalOptions eval;
    DistanceStudyOptions distances;

    static RunConfig from_preset(const std::string& name);
    /// Applies overrides from a JSON object; unknown keys are rejected.
    void apply(const nlohmann::json& overrides);
    void validate() const;
    nlohmann::json to_json() const;
};

} // namespace csirf
