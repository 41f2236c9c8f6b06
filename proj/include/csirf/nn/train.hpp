#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "csirf/dataset.hpp"
#include "csirf/nn/adam.hpp"
#include "csirf/nn/checkpoint.hpp"
#include "csirf/nn/loss.hpp"
#include "csirf/nn/model.hpp"

namespace csirf::nn {

struct TrainConfig {
    double lr = 1e-4;
    double weight_decay = 1e-5;
    int batch_size = 512;
    int patience = 10;
    double tau = 0.07;
    int max_epochs = 200;
    uint64_t seed = 1;
    bool verbose = false;

    void validate() const {
        if (lr <= 0) throw config_error("train: lr must be positive");
        if (weight_decay < 0) throw config_error("train: weight_decay must be >= 0");
        if (batch_size < 2) throw config_error("train: batch_size must be >= 2");
        if (patience < 1) throw config_error("train: patience must be >= 1");
        if (tau <= 0) throw config_error("train: tau must be positive");
        if (max_epochs < 1) throw config_error("train: max_epochs must be >= 1");
    }

    static TrainConfig desk() {
        TrainConfig c;
        c.batch_size = 64;
        c.max_epochs = 40;
        return c;
    }
    static TrainConfig paper() { return TrainConfig{}; }
};

/// Stops when the validation loss has not strictly improved for `patience`
/// consecutive epochs. Epochs are 0-indexed in observation order.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {
        if (patience < 1) throw config_error("early stopper: patience must be >= 1");
    }

    bool observe(double val) {
        const int epoch = seen_++;
        if (val < best_) {
            best_ = val;
            best_epoch_ = epoch;
            since_best_ = 0;
        } else {
            ++since_best_;
        }
        return since_best_ >= patience_;
    }

    double best() const { return best_; }
    int best_epoch() const { return best_epoch_; }
    int epochs_seen() const { return seen_; }
    bool improved_last() const { return since_best_ == 0 && seen_ > 0; }

private:
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = -1;
    int seen_ = 0;
    int since_best_ = 0;
};

/// Amplitude/phase feature rows for a record set, cached once so epoch loops
/// only gather.
class FeatureCache {
public:
    FeatureCache(const std::vector<DatasetRecord>& records, GridPtr grid);

    int width() const { return width_; }
    /// Gathers rows into a [B,1,2,width] batch.
    Tensor<float> gather(const std::vector<uint64_t>& indices, size_t offset, size_t count) const;
    std::vector<int> labels(const std::vector<uint64_t>& indices, size_t offset,
                            size_t count) const;

private:
    int width_;
    std::vector<float> rows_; // n x (2*width)
    std::vector<int> labels_;
};

std::vector<uint64_t> shuffled_indices(const std::vector<uint64_t>& base, RandomStream& rng);

struct DeepModel {
    EncoderConfig ecfg;
    HeadConfig hcfg;
    std::unique_ptr<Encoder<float>> encoder;
    std::unique_ptr<ProjectionHead<float>> projection;
    std::unique_ptr<Classifier<float>> classifier;

    static DeepModel from_checkpoint(const ModelCheckpoint& ckpt);
};

nlohmann::json encoder_config_json(const EncoderConfig& c);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);
nlohmann::json head_config_json(const HeadConfig& c);
HeadConfig head_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Contrastive pre-training of encoder + projection head.
ModelCheckpoint train_stage1(const std::vector<DatasetRecord>& records, const DatasetSplit& split,
                             const EncoderConfig& ecfg, const HeadConfig& hcfg,
                             const TrainConfig& tcfg);

/// Cross-entropy training of the classifier. When stage1 is given, the
/// encoder starts from its weights; otherwise it starts from random
/// initialization. freeze_encoder keeps the encoder in inference mode with
/// no updates (its checkpoint blobs stay bit-identical to stage 1).
ModelCheckpoint train_stage2(const std::vector<DatasetRecord>& records, const DatasetSplit& split,
                             const EncoderConfig& ecfg, const HeadConfig& hcfg,
                             const TrainConfig& tcfg, const ModelCheckpoint* stage1,
                             bool freeze_encoder);

/// Argmax class predictions in eval mode, batched.
std::vector<int> predict_labels(DeepModel& model, const FeatureCache& cache,
                                const std::vector<uint64_t>& indices, int batch_size);

/// Embeddings (encoder output) and, when the projection head is present,
/// projected embeddings for the given records.
struct EmbeddingDump {
    std::vector<std::vector<float>> encoder_out;
    std::vector<std::vector<float>> projected;
};
EmbeddingDump compute_embeddings(DeepModel& model, const FeatureCache& cache,
                                 const std::vector<uint64_t>& indices, int batch_size);

} // namespace csirf::nn
