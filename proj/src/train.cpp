#include "csirf/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace csirf::nn {

FeatureCache::FeatureCache(const std::vector<DatasetRecord>& records, GridPtr grid) {
    if (!grid) throw config_error("feature cache: null grid");
    width_ = grid->count();
    rows_.resize(records.size() * static_cast<size_t>(2 * width_));
    labels_.resize(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!(*r.csi.grid == *grid)) throw data_error("feature cache: record grid mismatch");
        const AmpPhaseMatrix ap = amp_phase_split(r.csi);
        float* row = rows_.data() + i * static_cast<size_t>(2 * width_);
        for (int k = 0; k < width_; ++k) {
            row[k] = static_cast<float>(ap.amplitude[static_cast<size_t>(k)]);
            row[width_ + k] = static_cast<float>(ap.phase[static_cast<size_t>(k)]);
        }
        labels_[i] = r.label;
    }
}

Tensor<float> FeatureCache::gather(const std::vector<uint64_t>& indices, size_t offset,
                                   size_t count) const {
    Tensor<float> x({static_cast<int>(count), 1, 2, width_});
    const size_t stride = static_cast<size_t>(2 * width_);
    for (size_t r = 0; r < count; ++r) {
        const uint64_t idx = indices[offset + r];
        if (idx * stride + stride > rows_.size())
            throw data_error("feature cache: index out of range");
        std::copy_n(rows_.data() + idx * stride, stride, x.data.data() + r * stride);
    }
    return x;
}

std::vector<int> FeatureCache::labels(const std::vector<uint64_t>& indices, size_t offset,
                                      size_t count) const {
    std::vector<int> y(count);
    for (size_t r = 0; r < count; ++r) y[r] = labels_[indices[offset + r]];
    return y;
}

std::vector<uint64_t> shuffled_indices(const std::vector<uint64_t>& base, RandomStream& rng) {
    std::vector<uint64_t> v = base;
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
    return v;
}

nlohmann::json encoder_config_json(const EncoderConfig& c) {
    return {{"input_height", c.input_height}, {"input_width", c.input_width},
            {"stem_channels", c.stem_channels}, {"block_widths", c.block_widths},
            {"blocks_per_stage", c.blocks_per_stage}, {"embed_dim", c.embed_dim}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    EncoderConfig c;
    try {
        c.input_height = j.at("input_height").get<int>();
        c.input_width = j.at("input_width").get<int>();
        c.stem_channels = j.at("stem_channels").get<int>();
        c.block_widths = j.at("block_widths").get<std::vector<int>>();
        c.blocks_per_stage = j.at("blocks_per_stage").get<int>();
        c.embed_dim = j.at("embed_dim").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("encoder config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json head_config_json(const HeadConfig& c) {
    return {{"embed_dim", c.embed_dim}, {"projection_dim", c.projection_dim},
            {"n_classes", c.n_classes}};
}

HeadConfig head_config_from_json(const nlohmann::json& j) {
    HeadConfig c;
    try {
        c.embed_dim = j.at("embed_dim").get<int>();
        c.projection_dim = j.at("projection_dim").get<int>();
        c.n_classes = j.at("n_classes").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("head config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json train_config_json(const TrainConfig& c) {
    return {{"lr", c.lr}, {"weight_decay", c.weight_decay}, {"batch_size", c.batch_size},
            {"patience", c.patience}, {"tau", c.tau}, {"max_epochs", c.max_epochs},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    try {
        c.lr = j.at("lr").get<double>();
        c.weight_decay = j.at("weight_decay").get<double>();
        c.batch_size = j.at("batch_size").get<int>();
        c.patience = j.at("patience").get<int>();
        c.tau = j.at("tau").get<double>();
        c.max_epochs = j.at("max_epochs").get<int>();
        c.seed = j.at("seed").get<uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

DeepModel DeepModel::from_checkpoint(const ModelCheckpoint& ckpt) {
    DeepModel m;
    if (!ckpt.config.contains("encoder"))
        throw data_error("checkpoint has no encoder config");
    m.ecfg = encoder_config_from_json(ckpt.config.at("encoder"));
    m.hcfg = head_config_from_json(ckpt.config.at("head"));
    m.encoder = std::make_unique<Encoder<float>>(m.ecfg);
    restore_params<float>(*m.encoder, "encoder", ckpt);
    bool has_proj = false, has_cls = false;
    for (const auto& b : ckpt.blobs) {
        has_proj |= b.name.rfind("projection.", 0) == 0;
        has_cls |= b.name.rfind("classifier.", 0) == 0;
    }
    if (has_proj) {
        m.projection = std::make_unique<ProjectionHead<float>>(m.hcfg);
        restore_params<float>(*m.projection, "projection", ckpt);
    }
    if (has_cls) {
        m.classifier = std::make_unique<Classifier<float>>(m.hcfg);
        restore_params<float>(*m.classifier, "classifier", ckpt);
    }
    return m;
}

namespace {

constexpr uint64_t kInitStream = 0xA11;
constexpr uint64_t kClassifierInitStream = 0xC15;
constexpr uint64_t kEpochStreamBase = 0xE0000;

void check_split_labels(const std::vector<DatasetRecord>& records, const DatasetSplit& split,
                        int n_classes) {
    for (const auto* part : {&split.train, &split.val}) {
        if (part->empty()) throw data_error("training: empty train or val split");
        for (uint64_t i : *part) {
            if (i >= records.size()) throw data_error("training: split index out of range");
            const int y = records[i].label;
            if (y < 0 || y >= n_classes)
                throw data_error("training: label " + std::to_string(y) +
                                 " outside [0, n_classes)");
        }
    }
}

std::vector<NamedBlob> snapshot_blobs(Layer<float>& enc, const char* enc_prefix,
                                      Layer<float>* head, const char* head_prefix) {
    ModelCheckpoint tmp;
    snapshot_params<float>(enc, enc_prefix, tmp);
    if (head) snapshot_params<float>(*head, head_prefix, tmp);
    return std::move(tmp.blobs);
}

} // namespace

ModelCheckpoint train_stage1(const std::vector<DatasetRecord>& records, const DatasetSplit& split,
                             const EncoderConfig& ecfg, const HeadConfig& hcfg,
                             const TrainConfig& tcfg) {
    ecfg.validate();
    hcfg.validate();
    tcfg.validate();
    if (hcfg.embed_dim != ecfg.embed_dim)
        throw config_error("stage1: head embed_dim must match encoder embed_dim");
    check_split_labels(records, split, hcfg.n_classes);

    const auto grid = SubcarrierGrid::wifi20();
    const FeatureCache cache(records, grid);

    Encoder<float> encoder(ecfg);
    ProjectionHead<float> projection(hcfg);
    RandomStream init_rng(tcfg.seed, kInitStream);
    encoder.init(init_rng);
    projection.init(init_rng);

    std::vector<ParamRef<float>> params = collect_all<float>(encoder, "encoder");
    projection.collect_params("projection", params);
    AdamConfig acfg;
    acfg.lr = tcfg.lr;
    acfg.weight_decay = tcfg.weight_decay;
    Adam<float> opt(params, acfg);
    EarlyStopper stopper(tcfg.patience);

    std::vector<double> loss_hist;
    std::vector<NamedBlob> best;
    const size_t bs = static_cast<size_t>(tcfg.batch_size);
    int epochs = 0;
    for (int epoch = 0; epoch < tcfg.max_epochs; ++epoch) {
        RandomStream shuffle_rng(tcfg.seed, kEpochStreamBase + static_cast<uint64_t>(epoch));
        const std::vector<uint64_t> order = shuffled_indices(split.train, shuffle_rng);
        size_t used = 0;
        for (size_t off = 0; off + 2 <= order.size(); off += bs) {
            const size_t n = std::min(bs, order.size() - off);
            if (n < 2) break;
            auto x = cache.gather(order, off, n);
            auto y = cache.labels(order, off, n);
            auto z = projection.forward(encoder.forward(x, true), true);
            LossResult<float> loss;
            try {
                loss = supcon_loss(z, y, tcfg.tau);
            } catch (const data_error&) {
                continue; // batch had no positive pair anywhere; skip it
            }
            if (!std::isfinite(loss.value))
                throw numeric_error("stage1 diverged: non-finite loss at epoch " +
                                    std::to_string(epoch));
            opt.zero_grad();
            encoder.backward(projection.backward(loss.grad));
            opt.step();
            ++used;
        }
        if (used == 0) throw numeric_error("stage1: no trainable batch in epoch");

        double val_loss = 0.0;
        double val_n = 0.0;
        for (size_t off = 0; off + 2 <= split.val.size(); off += bs) {
            const size_t n = std::min(bs, split.val.size() - off);
            if (n < 2) break;
            auto x = cache.gather(split.val, off, n);
            auto y = cache.labels(split.val, off, n);
            auto z = projection.forward(encoder.forward(x, false), false);
            try {
                val_loss += supcon_loss(z, y, tcfg.tau).value * static_cast<double>(n);
                val_n += static_cast<double>(n);
            } catch (const data_error&) {
                continue;
            }
        }
        if (val_n == 0.0) throw numeric_error("stage1: validation produced no usable batch");
        val_loss /= val_n;
        loss_hist.push_back(val_loss);
        ++epochs;
        if (tcfg.verbose)
            std::fprintf(stderr, "[stage1] epoch %d val_loss %.6f\n", epoch, val_loss);

        const bool stop = stopper.observe(val_loss);
        if (stopper.improved_last())
            best = snapshot_blobs(encoder, "encoder", &projection, "projection");
        if (stop) break;
    }

    ModelCheckpoint ckpt;
    ckpt.kind = "stage1";
    ckpt.config = {{"stage", 1},
                   {"encoder", encoder_config_json(ecfg)},
                   {"head", head_config_json(hcfg)},
                   {"train", train_config_json(tcfg)}};
    ckpt.blobs = std::move(best);
    ckpt.epochs_run = epochs;
    ckpt.best_epoch = stopper.best_epoch();
    ckpt.val_loss_history = std::move(loss_hist);
    return ckpt;
}

ModelCheckpoint train_stage2(const std::vector<DatasetRecord>& records, const DatasetSplit& split,
                             const EncoderConfig& ecfg, const HeadConfig& hcfg,
                             const TrainConfig& tcfg, const ModelCheckpoint* stage1,
                             bool freeze_encoder) {
    ecfg.validate();
    hcfg.validate();
    tcfg.validate();
    if (hcfg.embed_dim != ecfg.embed_dim)
        throw config_error("stage2: head embed_dim must match encoder embed_dim");
    if (freeze_encoder && !stage1)
        throw config_error("stage2: freeze_encoder requires a stage-1 checkpoint");
    check_split_labels(records, split, hcfg.n_classes);

    const auto grid = SubcarrierGrid::wifi20();
    const FeatureCache cache(records, grid);

    Encoder<float> encoder(ecfg);
    Classifier<float> classifier(hcfg);
    if (stage1) {
        if (stage1->kind != "stage1")
            throw data_error("stage2: expected a stage-1 checkpoint, got " + stage1->kind);
        const nlohmann::json want = encoder_config_json(ecfg);
        if (stage1->config.contains("encoder") && stage1->config.at("encoder") != want)
            throw config_error("stage2: encoder config differs from stage-1 checkpoint");
        restore_params<float>(encoder, "encoder", *stage1);
    } else {
        RandomStream enc_rng(tcfg.seed, kInitStream);
        encoder.init(enc_rng);
    }
    RandomStream cls_rng(tcfg.seed, kClassifierInitStream);
    classifier.init(cls_rng);

    std::vector<ParamRef<float>> params;
    if (!freeze_encoder) encoder.collect_params("encoder", params);
    classifier.collect_params("classifier", params);
    AdamConfig acfg;
    acfg.lr = tcfg.lr;
    acfg.weight_decay = tcfg.weight_decay;
    Adam<float> opt(params, acfg);
    EarlyStopper stopper(tcfg.patience);

    const bool enc_training = !freeze_encoder;
    std::vector<double> loss_hist, acc_hist;
    std::vector<NamedBlob> best;
    const size_t bs = static_cast<size_t>(tcfg.batch_size);
    int epochs = 0;
    for (int epoch = 0; epoch < tcfg.max_epochs; ++epoch) {
        RandomStream shuffle_rng(tcfg.seed, kEpochStreamBase + static_cast<uint64_t>(epoch));
        const std::vector<uint64_t> order = shuffled_indices(split.train, shuffle_rng);
        for (size_t off = 0; off < order.size(); off += bs) {
            const size_t n = std::min(bs, order.size() - off);
            if (enc_training && n < 2) break; // batch norm needs batch statistics
            auto x = cache.gather(order, off, n);
            auto y = cache.labels(order, off, n);
            auto logits = classifier.forward(encoder.forward(x, enc_training), true);
            auto loss = cross_entropy_loss(logits, y);
            if (!std::isfinite(loss.value))
                throw numeric_error("stage2 diverged: non-finite loss at epoch " +
                                    std::to_string(epoch));
            opt.zero_grad();
            auto g = classifier.backward(loss.grad);
            if (!freeze_encoder) encoder.backward(g);
            opt.step();
        }

        double val_loss = 0.0;
        int correct = 0;
        for (size_t off = 0; off < split.val.size(); off += bs) {
            const size_t n = std::min(bs, split.val.size() - off);
            auto x = cache.gather(split.val, off, n);
            auto y = cache.labels(split.val, off, n);
            auto logits = classifier.forward(encoder.forward(x, false), false);
            val_loss += cross_entropy_loss(logits, y).value * static_cast<double>(n);
            for (size_t r = 0; r < n; ++r) {
                const float* row = logits.data.data() + r * static_cast<size_t>(hcfg.n_classes);
                int arg = 0;
                for (int k = 1; k < hcfg.n_classes; ++k)
                    if (row[k] > row[arg]) arg = k;
                if (arg == y[r]) ++correct;
            }
        }
        val_loss /= static_cast<double>(split.val.size());
        const double val_acc = static_cast<double>(correct) / static_cast<double>(split.val.size());
        loss_hist.push_back(val_loss);
        acc_hist.push_back(val_acc);
        ++epochs;
        if (tcfg.verbose)
            std::fprintf(stderr, "[stage2] epoch %d val_loss %.6f val_acc %.4f\n", epoch,
                         val_loss, val_acc);

        const bool stop = stopper.observe(val_loss);
        if (stopper.improved_last())
            best = snapshot_blobs(encoder, "encoder", &classifier, "classifier");
        if (stop) break;
    }

    ModelCheckpoint ckpt;
    ckpt.kind = "stage2";
    ckpt.config = {{"stage", 2},
                   {"encoder", encoder_config_json(ecfg)},
                   {"head", head_config_json(hcfg)},
                   {"train", train_config_json(tcfg)},
                   {"from_stage1", stage1 != nullptr},
                   {"freeze_encoder", freeze_encoder}};
    ckpt.blobs = std::move(best);
    ckpt.epochs_run = epochs;
    ckpt.best_epoch = stopper.best_epoch();
    ckpt.val_loss_history = std::move(loss_hist);
    ckpt.val_metric_history = std::move(acc_hist);
    return ckpt;
}

std::vector<int> predict_labels(DeepModel& model, const FeatureCache& cache,
                                const std::vector<uint64_t>& indices, int batch_size) {
    if (!model.encoder || !model.classifier)
        throw data_error("predict: checkpoint lacks encoder or classifier");
    if (batch_size < 1) throw config_error("predict: batch_size must be >= 1");
    std::vector<int> out(indices.size(), 0);
    const int K = model.hcfg.n_classes;
    for (size_t off = 0; off < indices.size(); off += static_cast<size_t>(batch_size)) {
        const size_t n = std::min<size_t>(batch_size, indices.size() - off);
        auto x = cache.gather(indices, off, n);
        auto logits = model.classifier->forward(model.encoder->forward(x, false), false);
        for (size_t r = 0; r < n; ++r) {
            const float* row = logits.data.data() + r * static_cast<size_t>(K);
            int arg = 0;
            for (int k = 1; k < K; ++k)
                if (row[k] > row[arg]) arg = k;
            out[off + r] = arg;
        }
    }
    return out;
}

EmbeddingDump compute_embeddings(DeepModel& model, const FeatureCache& cache,
                                 const std::vector<uint64_t>& indices, int batch_size) {
    if (!model.encoder) throw data_error("embeddings: checkpoint lacks encoder");
    if (batch_size < 1) throw config_error("embeddings: batch_size must be >= 1");
    EmbeddingDump dump;
    dump.encoder_out.reserve(indices.size());
    if (model.projection) dump.projected.reserve(indices.size());
    for (size_t off = 0; off < indices.size(); off += static_cast<size_t>(batch_size)) {
        const size_t n = std::min<size_t>(batch_size, indices.size() - off);
        auto x = cache.gather(indices, off, n);
        auto r = model.encoder->forward(x, false);
        const int E = r.dim(1);
        for (size_t i = 0; i < n; ++i)
            dump.encoder_out.emplace_back(r.data.begin() + static_cast<long>(i) * E,
                                          r.data.begin() + static_cast<long>(i + 1) * E);
        if (model.projection) {
            auto z = model.projection->forward(r, false);
            const int P = z.dim(1);
            for (size_t i = 0; i < n; ++i)
                dump.projected.emplace_back(z.data.begin() + static_cast<long>(i) * P,
                                            z.data.begin() + static_cast<long>(i + 1) * P);
        }
    }
    return dump;
}

} // namespace csirf::nn
