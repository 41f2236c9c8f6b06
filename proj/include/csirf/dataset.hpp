#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csirf/channel.hpp"
#include "csirf/devices.hpp"
#include "csirf/signal.hpp"

namespace csirf {

/// One labeled CSI measurement. Values are quantized to the f32 grid (and
/// SNR to centi-dB) at creation time, so serialization round-trips exactly.
struct DatasetRecord {
    CsiVector csi;
    int label = 0;
    ChannelTag channel_tag = ChannelTag::B_LoS;
    double snr_db = 0.0;
    uint32_t realization_id = 0;
};

CsiVector quantize_csi_f32(const CsiVector& c);
double quantize_snr_centidb(double snr_db);

/// Channel- and noise-level augmentation of a device-bearing CSI sample:
/// multiply by a fresh multipath response, then add noise at the requested
/// SNR relative to the augmented signal's empirical power.
CsiVector augment_sample(const CsiVector& device_csi, const MultipathChannel& channel,
                         const NoiseSpec& noise, RandomStream& rng);

struct BuildOptions {
    std::vector<double> snr_grid_db{5, 10, 15, 20, 25, 30, 35, 40};
    int n_realizations = 50;
    uint64_t max_records = 2'000'000;
    /// When false the channel/noise stage is skipped: records carry the bare
    /// device response (single realization per SNR slot still emitted so the
    /// grid shape is preserved).
    bool augment = true;
};

struct BuiltDataset {
    std::vector<DatasetRecord> records;
    nlohmann::json manifest;
};

uint64_t dataset_grid_size(int n_devices, int n_conditions, int n_snrs, int n_realizations);

/// Deterministic dataset synthesis over the full grid
/// (device x channel condition x SNR x realization). Each grid tuple gets
/// its own random stream derived from (seed, flat tuple index), so any
/// subset is reproducible independently of build order.
BuiltDataset build_dataset(const DevicePopulation& pop,
                           const std::vector<ChannelModelSpec>& conditions,
                           const BuildOptions& opts, uint64_t seed);

struct SplitFractions {
    double train = 0.8, val = 0.1, test = 0.1;
    void validate() const;
};

struct DatasetSplit {
    std::vector<uint64_t> train, val, test;
    SplitFractions fractions;
    bool stratified = true;
    uint64_t seed = 0;
};

/// Stratified split over (label, channel tag, SNR) cells with largest-
/// remainder rounding (ties broken train > val > test). Falls back to a
/// single global split when any cell is smaller than min_stratum_size.
DatasetSplit split_dataset(const std::vector<DatasetRecord>& records,
                           const SplitFractions& fractions, uint64_t seed,
                           int min_stratum_size = 10);

void save_split(const std::string& path, const DatasetSplit& split);
DatasetSplit load_split(const std::string& path);

/// Record container format "CSF1": fixed header, then fixed-width records
/// (label u16, tag u8, SNR centi-dB i16, realization u32, 52 x f32 re/im),
/// little-endian.
nlohmann::json write_records(const std::string& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_records(const std::string& path);

uint64_t records_hash(const std::vector<DatasetRecord>& records);

} // namespace csirf
