#include "csirf/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "csirf/hash.hpp"
#include "csirf/io.hpp"

namespace csirf::nn {

namespace {

constexpr char kMagic[5] = "CKPT";
constexpr uint16_t kVersion = 1;

void serialize(std::ostream& os, const ModelCheckpoint& ckpt) {
    io::write_bytes(os, kMagic, 4);
    io::write_pod<uint16_t>(os, kVersion);
    io::write_string(os, ckpt.kind);
    const std::string cfg = ckpt.config.dump();
    io::write_pod<uint32_t>(os, static_cast<uint32_t>(cfg.size()));
    io::write_bytes(os, cfg.data(), cfg.size());
    io::write_pod<uint32_t>(os, static_cast<uint32_t>(ckpt.blobs.size()));
    for (const auto& b : ckpt.blobs) {
        io::write_string(os, b.name);
        io::write_pod<uint8_t>(os, static_cast<uint8_t>(b.shape.size()));
        for (int d : b.shape) io::write_pod<uint32_t>(os, static_cast<uint32_t>(d));
        io::write_pod<uint64_t>(os, b.data.size());
        io::write_bytes(os, b.data.data(), b.data.size() * sizeof(float));
    }
    io::write_pod<uint32_t>(os, static_cast<uint32_t>(ckpt.epochs_run));
    io::write_pod<int32_t>(os, ckpt.best_epoch);
    io::write_pod<uint32_t>(os, static_cast<uint32_t>(ckpt.val_loss_history.size()));
    for (double v : ckpt.val_loss_history) io::write_pod<double>(os, v);
    io::write_pod<uint32_t>(os, static_cast<uint32_t>(ckpt.val_metric_history.size()));
    for (double v : ckpt.val_metric_history) io::write_pod<double>(os, v);
}

} // namespace

void save_checkpoint(const std::string& path, const ModelCheckpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for writing: " + path);
    serialize(os, ckpt);
    if (!os) throw data_error("write failed: " + path);
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open checkpoint: " + path);
    io::expect_magic(is, kMagic, "checkpoint");
    const auto version = io::read_pod<uint16_t>(is, "checkpoint version");
    if (version != kVersion)
        throw data_error("checkpoint: unsupported version " + std::to_string(version));
    ModelCheckpoint ckpt;
    ckpt.kind = io::read_string(is, "checkpoint kind");
    const auto cfg_len = io::read_pod<uint32_t>(is, "config length");
    std::string cfg(cfg_len, '\0');
    if (cfg_len) io::read_bytes(is, cfg.data(), cfg_len, "config json");
    try {
        ckpt.config = nlohmann::json::parse(cfg);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("checkpoint: bad config json: ") + e.what());
    }
    const auto n_blobs = io::read_pod<uint32_t>(is, "blob count");
    ckpt.blobs.resize(n_blobs);
    for (auto& b : ckpt.blobs) {
        b.name = io::read_string(is, "blob name");
        const auto ndim = io::read_pod<uint8_t>(is, "blob rank");
        b.shape.resize(ndim);
        int64_t expect = 1;
        for (auto& d : b.shape) {
            d = static_cast<int>(io::read_pod<uint32_t>(is, "blob dim"));
            expect *= d;
        }
        const auto count = io::read_pod<uint64_t>(is, "blob size");
        if (static_cast<int64_t>(count) != expect)
            throw data_error("checkpoint: blob size does not match shape for " + b.name);
        b.data.resize(count);
        if (count) io::read_bytes(is, b.data.data(), count * sizeof(float), "blob data");
    }
    ckpt.epochs_run = static_cast<int>(io::read_pod<uint32_t>(is, "epochs"));
    ckpt.best_epoch = io::read_pod<int32_t>(is, "best epoch");
    ckpt.val_loss_history.resize(io::read_pod<uint32_t>(is, "loss history length"));
    for (auto& v : ckpt.val_loss_history) v = io::read_pod<double>(is, "loss history");
    ckpt.val_metric_history.resize(io::read_pod<uint32_t>(is, "metric history length"));
    for (auto& v : ckpt.val_metric_history) v = io::read_pod<double>(is, "metric history");
    if (is.peek() != std::ifstream::traits_type::eof())
        throw data_error("checkpoint: trailing bytes after payload");
    return ckpt;
}

uint64_t checkpoint_hash(const ModelCheckpoint& ckpt) {
    std::ostringstream ss(std::ios::binary);
    serialize(ss, ckpt);
    const std::string bytes = ss.str();
    return fnv1a64(bytes.data(), bytes.size());
}

} // namespace csirf::nn
