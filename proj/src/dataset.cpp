#include "csirf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "csirf/errors.hpp"
#include "csirf/hash.hpp"
#include "csirf/io.hpp"

namespace csirf {

namespace {
constexpr char kRecordsMagic[5] = "CSF1";
constexpr uint16_t kRecordsVersion = 1;
constexpr char kSplitMagic[5] = "CSS1";
constexpr uint16_t kSplitVersion = 1;
} // namespace

namespace {

// The volatile store blocks the optimizer from folding the f32 round-trip
// away (seen with gcc 11 at -O3); the narrowing must really happen or the
// serialized bytes would not match the in-memory values.
double narrow_f32(double x) {
    volatile float f = static_cast<float>(x);
    return static_cast<double>(f);
}

} // namespace

CsiVector quantize_csi_f32(const CsiVector& c) {
    std::vector<cdouble> q(c.values.size());
    for (size_t i = 0; i < q.size(); ++i)
        q[i] = cdouble(narrow_f32(c.values[i].real()), narrow_f32(c.values[i].imag()));
    return CsiVector(c.grid, std::move(q));
}

double quantize_snr_centidb(double snr_db) {
    const double centi = std::round(snr_db * 100.0);
    if (centi < -32768.0 || centi > 32767.0) throw config_error("snr out of representable range");
    return centi / 100.0;
}

CsiVector augment_sample(const CsiVector& device_csi, const MultipathChannel& channel,
                         const NoiseSpec& noise, RandomStream& rng) {
    if (!(*device_csi.grid == *channel.freq_response.grid))
        throw data_error("augment_sample: grid mismatch");
    std::vector<cdouble> y(device_csi.values.size());
    for (size_t i = 0; i < y.size(); ++i)
        y[i] = channel.freq_response.values[i] * device_csi.values[i];
    return add_awgn(CsiVector(device_csi.grid, std::move(y)), noise, rng);
}

uint64_t dataset_grid_size(int n_devices, int n_conditions, int n_snrs, int n_realizations) {
    if (n_devices < 1 || n_conditions < 1 || n_snrs < 1 || n_realizations < 1)
        throw config_error("dataset_grid_size: all grid dimensions must be positive");
    return static_cast<uint64_t>(n_devices) * static_cast<uint64_t>(n_conditions) *
           static_cast<uint64_t>(n_snrs) * static_cast<uint64_t>(n_realizations);
}

BuiltDataset build_dataset(const DevicePopulation& pop,
                           const std::vector<ChannelModelSpec>& conditions,
                           const BuildOptions& opts, uint64_t seed) {
    if (pop.size() < 2) throw config_error("build_dataset: population needs >= 2 devices");
    if (!pop.grid) throw config_error("build_dataset: population has no grid");
    if (conditions.empty()) throw config_error("build_dataset: no channel conditions");
    if (opts.snr_grid_db.empty()) throw config_error("build_dataset: empty SNR grid");
    if (opts.n_realizations < 1) throw config_error("build_dataset: n_realizations must be >= 1");
    for (const auto& c : conditions) c.validate();
    for (double s : opts.snr_grid_db) NoiseSpec::at(s).validate();

    const uint64_t total =
        dataset_grid_size(pop.size(), static_cast<int>(conditions.size()),
                          static_cast<int>(opts.snr_grid_db.size()), opts.n_realizations);
    if (total > opts.max_records)
        throw config_error("build_dataset: grid of " + std::to_string(total) +
                           " records exceeds cap of " + std::to_string(opts.max_records));

    const uint64_t C = conditions.size(), Q = opts.snr_grid_db.size(),
                   R = static_cast<uint64_t>(opts.n_realizations);

    BuiltDataset out;
    out.records.reserve(total);
    for (int d = 0; d < pop.size(); ++d) {
        const auto& fp = pop.fingerprints[static_cast<size_t>(d)];
        std::vector<cdouble> base_vals(fp.deviations.size());
        for (size_t k = 0; k < base_vals.size(); ++k)
            base_vals[k] = cdouble(1.0, 0.0) + fp.deviations[k];
        const CsiVector base(pop.grid, base_vals);
        for (uint64_t ci = 0; ci < C; ++ci) {
            const auto& cond = conditions[ci];
            for (uint64_t qi = 0; qi < Q; ++qi) {
                const double snr = quantize_snr_centidb(opts.snr_grid_db[qi]);
                for (uint64_t ri = 0; ri < R; ++ri) {
                    const uint64_t idx = ((static_cast<uint64_t>(d) * C + ci) * Q + qi) * R + ri;
                    DatasetRecord rec;
                    rec.label = fp.device_id;
                    rec.channel_tag = cond.tag();
                    rec.snr_db = snr;
                    rec.realization_id = static_cast<uint32_t>(ri);
                    if (opts.augment) {
                        RandomStream rng(seed, idx);
                        const MultipathChannel ch = sample_channel(cond, rng, pop.grid);
                        rec.csi = quantize_csi_f32(augment_sample(base, ch, NoiseSpec::at(snr), rng));
                    } else {
                        rec.csi = quantize_csi_f32(base);
                    }
                    out.records.push_back(std::move(rec));
                }
            }
        }
    }

    nlohmann::json tags = nlohmann::json::array();
    for (const auto& c : conditions) tags.push_back(to_string(c.tag()));
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(population_hash(pop)));
    out.manifest = {{"format", "CSF1"},
                    {"n_devices", pop.size()},
                    {"n_subcarriers", pop.grid->count()},
                    {"conditions", tags},
                    {"snr_grid_db", opts.snr_grid_db},
                    {"n_realizations", opts.n_realizations},
                    {"seed", seed},
                    {"augment", opts.augment},
                    {"record_count", total},
                    {"population_hash", std::string(hash_hex)},
                    {"fingerprint_scale", pop.scale},
                    {"fingerprint_profile", to_string(pop.profile)},
                    {"identifiability_order", pop.identifiability_order}};
    return out;
}

void SplitFractions::validate() const {
    if (train < 0 || val < 0 || test < 0)
        throw config_error("split fractions must be non-negative");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw config_error("split fractions must sum to 1");
}

namespace {

struct Alloc {
    size_t train, val, test;
};

Alloc largest_remainder(size_t n, const SplitFractions& f) {
    const double want[3] = {f.train * static_cast<double>(n), f.val * static_cast<double>(n),
                            f.test * static_cast<double>(n)};
    size_t base[3];
    double rem[3];
    size_t used = 0;
    for (int i = 0; i < 3; ++i) {
        base[i] = static_cast<size_t>(want[i]);
        rem[i] = want[i] - static_cast<double>(base[i]);
        used += base[i];
    }
    // Ties go to train, then val, then test.
    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3, [&](int a, int b) { return rem[a] > rem[b]; });
    for (size_t left = n - used, j = 0; left > 0; --left, ++j) ++base[order[j % 3]];
    return Alloc{base[0], base[1], base[2]};
}

void fisher_yates(std::vector<uint64_t>& v, RandomStream& rng) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

} // namespace

DatasetSplit split_dataset(const std::vector<DatasetRecord>& records,
                           const SplitFractions& fractions, uint64_t seed, int min_stratum_size) {
    fractions.validate();
    if (records.empty()) throw data_error("split_dataset: no records");
    if (min_stratum_size < 1) throw config_error("split_dataset: min_stratum_size must be >= 1");

    using Key = std::tuple<int, uint8_t, int>;
    std::map<Key, std::vector<uint64_t>> strata;
    for (uint64_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const int centidb = static_cast<int>(std::lround(r.snr_db * 100.0));
        strata[Key{r.label, static_cast<uint8_t>(r.channel_tag), centidb}].push_back(i);
    }

    bool stratified = true;
    for (const auto& [key, idxs] : strata)
        if (idxs.size() < static_cast<size_t>(min_stratum_size)) {
            stratified = false;
            break;
        }

    DatasetSplit split;
    split.fractions = fractions;
    split.stratified = stratified;
    split.seed = seed;

    const auto assign = [&](std::vector<uint64_t> idxs, uint64_t stream) {
        RandomStream rng(seed, stream);
        fisher_yates(idxs, rng);
        const Alloc a = largest_remainder(idxs.size(), fractions);
        split.train.insert(split.train.end(), idxs.begin(), idxs.begin() + a.train);
        split.val.insert(split.val.end(), idxs.begin() + a.train, idxs.begin() + a.train + a.val);
        split.test.insert(split.test.end(), idxs.begin() + a.train + a.val, idxs.end());
    };

    if (stratified) {
        uint64_t ordinal = 0;
        for (auto& [key, idxs] : strata) assign(std::move(idxs), ordinal++);
    } else {
        std::vector<uint64_t> all(records.size());
        for (uint64_t i = 0; i < all.size(); ++i) all[i] = i;
        assign(std::move(all), 0);
    }

    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

void save_split(const std::string& path, const DatasetSplit& split) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for writing: " + path);
    io::write_bytes(os, kSplitMagic, 4);
    io::write_pod<uint16_t>(os, kSplitVersion);
    io::write_pod<uint8_t>(os, split.stratified ? 1 : 0);
    io::write_pod<uint8_t>(os, 0);
    io::write_pod<uint64_t>(os, split.seed);
    io::write_pod<double>(os, split.fractions.train);
    io::write_pod<double>(os, split.fractions.val);
    io::write_pod<double>(os, split.fractions.test);
    io::write_pod<uint64_t>(os, split.train.size());
    io::write_pod<uint64_t>(os, split.val.size());
    io::write_pod<uint64_t>(os, split.test.size());
    for (const auto* v : {&split.train, &split.val, &split.test})
        for (uint64_t i : *v) io::write_pod<uint64_t>(os, i);
    if (!os) throw data_error("write failed: " + path);
}

DatasetSplit load_split(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open split file: " + path);
    io::expect_magic(is, kSplitMagic, "split");
    const auto version = io::read_pod<uint16_t>(is, "split version");
    if (version != kSplitVersion)
        throw data_error("split: unsupported version " + std::to_string(version));
    DatasetSplit split;
    split.stratified = io::read_pod<uint8_t>(is, "stratified flag") != 0;
    io::read_pod<uint8_t>(is, "reserved");
    split.seed = io::read_pod<uint64_t>(is, "seed");
    split.fractions.train = io::read_pod<double>(is, "train fraction");
    split.fractions.val = io::read_pod<double>(is, "val fraction");
    split.fractions.test = io::read_pod<double>(is, "test fraction");
    const auto nt = io::read_pod<uint64_t>(is, "train count");
    const auto nv = io::read_pod<uint64_t>(is, "val count");
    const auto ns = io::read_pod<uint64_t>(is, "test count");
    split.train.resize(nt);
    split.val.resize(nv);
    split.test.resize(ns);
    for (auto* v : {&split.train, &split.val, &split.test})
        for (auto& i : *v) i = io::read_pod<uint64_t>(is, "split index");
    if (is.peek() != std::ifstream::traits_type::eof())
        throw data_error("split: trailing bytes after payload");
    return split;
}

namespace {

void serialize_records(std::ostream& os, const std::vector<DatasetRecord>& records) {
    const auto wifi = SubcarrierGrid::wifi20();
    const uint16_t n_sub = static_cast<uint16_t>(wifi->count());
    io::write_bytes(os, kRecordsMagic, 4);
    io::write_pod<uint16_t>(os, kRecordsVersion);
    io::write_pod<uint16_t>(os, n_sub);
    io::write_pod<uint64_t>(os, records.size());
    for (const auto& r : records) {
        if (!(*r.csi.grid == *wifi))
            throw data_error("write_records: record grid is not the 20 MHz layout");
        if (r.label < 0 || r.label > 0xffff) throw data_error("write_records: label out of range");
        const double centi = std::round(r.snr_db * 100.0);
        if (centi < -32768.0 || centi > 32767.0)
            throw data_error("write_records: snr out of range");
        io::write_pod<uint16_t>(os, static_cast<uint16_t>(r.label));
        io::write_pod<uint8_t>(os, static_cast<uint8_t>(r.channel_tag));
        io::write_pod<int16_t>(os, static_cast<int16_t>(centi));
        io::write_pod<uint32_t>(os, r.realization_id);
        for (const auto& x : r.csi.values) {
            io::write_pod<float>(os, static_cast<float>(x.real()));
            io::write_pod<float>(os, static_cast<float>(x.imag()));
        }
    }
}

} // namespace

nlohmann::json write_records(const std::string& path, const std::vector<DatasetRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for writing: " + path);
    serialize_records(os, records);
    if (!os) throw data_error("write failed: " + path);
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(records_hash(records)));
    return {{"path", path},
            {"record_count", records.size()},
            {"n_subcarriers", SubcarrierGrid::wifi20()->count()},
            {"content_hash", std::string(hash_hex)}};
}

std::vector<DatasetRecord> read_records(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open dataset: " + path);
    io::expect_magic(is, kRecordsMagic, "dataset");
    const auto version = io::read_pod<uint16_t>(is, "dataset version");
    if (version != kRecordsVersion)
        throw data_error("dataset: unsupported version " + std::to_string(version));
    const auto n_sub = io::read_pod<uint16_t>(is, "subcarrier count");
    const auto wifi = SubcarrierGrid::wifi20();
    if (n_sub != wifi->count())
        throw data_error("dataset: unsupported subcarrier count " + std::to_string(n_sub));
    const auto count = io::read_pod<uint64_t>(is, "record count");

    std::vector<DatasetRecord> records;
    records.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        DatasetRecord r;
        r.label = io::read_pod<uint16_t>(is, "label");
        const auto tag = io::read_pod<uint8_t>(is, "channel tag");
        if (tag > 5) throw data_error("dataset: unknown channel tag " + std::to_string(tag));
        r.channel_tag = static_cast<ChannelTag>(tag);
        r.snr_db = static_cast<double>(io::read_pod<int16_t>(is, "snr")) / 100.0;
        r.realization_id = io::read_pod<uint32_t>(is, "realization id");
        std::vector<cdouble> vals(n_sub);
        for (auto& x : vals) {
            const float re = io::read_pod<float>(is, "csi value");
            const float im = io::read_pod<float>(is, "csi value");
            x = cdouble(re, im);
        }
        r.csi = CsiVector(wifi, std::move(vals));
        records.push_back(std::move(r));
    }
    if (is.peek() != std::ifstream::traits_type::eof())
        throw data_error("dataset: trailing bytes after records");
    return records;
}

uint64_t records_hash(const std::vector<DatasetRecord>& records) {
    std::ostringstream ss(std::ios::binary);
    serialize_records(ss, records);
    const std::string bytes = ss.str();
    return fnv1a64(bytes.data(), bytes.size());
}

} // namespace csirf
