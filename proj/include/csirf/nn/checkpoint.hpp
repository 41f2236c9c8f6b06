#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csirf/errors.hpp"
#include "csirf/nn/layers.hpp"

namespace csirf::nn {

struct NamedBlob {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

/// Serialized model state: a config snapshot, named parameter blobs (f32),
/// and the validation history of the run that produced it. Binary format
/// "CKPT", little-endian, versioned.
struct ModelCheckpoint {
    std::string kind;
    nlohmann::json config;
    std::vector<NamedBlob> blobs;
    int epochs_run = 0;
    int best_epoch = -1;
    std::vector<double> val_loss_history;
    std::vector<double> val_metric_history;

    const NamedBlob* find(const std::string& name) const {
        for (const auto& b : blobs)
            if (b.name == name) return &b;
        return nullptr;
    }
};

void save_checkpoint(const std::string& path, const ModelCheckpoint& ckpt);
ModelCheckpoint load_checkpoint(const std::string& path);
uint64_t checkpoint_hash(const ModelCheckpoint& ckpt);

/// Snapshots every registered tensor (trainable and buffers) into blobs.
template <typename T>
void snapshot_params(Layer<T>& layer, const std::string& prefix, ModelCheckpoint& ckpt) {
    for (const auto& p : collect_all(layer, prefix)) {
        NamedBlob b;
        b.name = p.name;
        b.shape = p.tensor->shape;
        b.data.resize(p.tensor->data.size());
        for (size_t i = 0; i < b.data.size(); ++i)
            b.data[i] = static_cast<float>(p.tensor->data[i]);
        ckpt.blobs.push_back(std::move(b));
    }
}

/// Restores every registered tensor from blobs; missing names or shape
/// mismatches are data errors.
template <typename T>
void restore_params(Layer<T>& layer, const std::string& prefix, const ModelCheckpoint& ckpt) {
    for (const auto& p : collect_all(layer, prefix)) {
        const NamedBlob* b = ckpt.find(p.name);
        if (!b) throw data_error("checkpoint: missing parameter " + p.name);
        if (b->shape != p.tensor->shape)
            throw data_error("checkpoint: shape mismatch for " + p.name);
        for (size_t i = 0; i < b->data.size(); ++i)
            p.tensor->data[i] = static_cast<T>(b->data[i]);
    }
}

} // namespace csirf::nn
