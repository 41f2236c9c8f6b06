#pragma once

#include <memory>
#include <string>
#include <vector>

#include "csirf/errors.hpp"
#include "csirf/nn/layers.hpp"

namespace csirf::nn {

/// Geometry of the CSI encoder. Input is [B, 1, 2, n_subcarriers] with the
/// amplitude row on top and the phase row below; the second stem kernel is
/// exactly 2x3 so it collapses the two rows in one step.
struct EncoderConfig {
    int input_height = 2;
    int input_width = 52;
    int stem_channels = 64;
    std::vector<int> block_widths{64, 128, 256, 512};
    int blocks_per_stage = 2;
    int embed_dim = 512;

    void validate() const {
        if (input_height != 2) throw config_error("encoder: input height must be 2");
        if (input_width < 4) throw config_error("encoder: input width too small");
        if (stem_channels <= 0) throw config_error("encoder: stem_channels must be positive");
        if (block_widths.empty()) throw config_error("encoder: block_widths empty");
        for (int w : block_widths)
            if (w <= 0) throw config_error("encoder: block width must be positive");
        if (blocks_per_stage <= 0) throw config_error("encoder: blocks_per_stage must be positive");
        if (embed_dim != block_widths.back())
            throw config_error("encoder: embed_dim must equal final block width");
        int w = input_width;
        for (size_t s = 1; s < block_widths.size(); ++s) w = (w + 1) / 2;
        if (w < 1) throw config_error("encoder: too many downsampling stages for input width");
    }

    static EncoderConfig desk() {
        EncoderConfig c;
        c.stem_channels = 32;
        c.block_widths = {32, 64};
        c.blocks_per_stage = 1;
        c.embed_dim = 64;
        return c;
    }
    static EncoderConfig paper() { return EncoderConfig{}; }
};

struct HeadConfig {
    int embed_dim = 512;
    int projection_dim = 128;
    int n_classes = 19;

    void validate() const {
        if (embed_dim <= 0 || projection_dim <= 0)
            throw config_error("head: dimensions must be positive");
        if (n_classes < 2) throw config_error("head: need at least 2 classes");
    }
};

/// Residual CNN over the subcarrier axis: two stem convolutions (1x3 then
/// 2x3, each with batch norm and GELU), stages of residual blocks with
/// stride-2 downsampling between stages, then global average pooling to the
/// embedding.
template <typename T>
class Encoder final : public Layer<T> {
public:
    explicit Encoder(const EncoderConfig& cfg) : cfg_(cfg) {
        cfg.validate();
        stem1_ = std::make_unique<Conv2d<T>>(1, cfg.stem_channels, 1, 3, 1, 1, 0, 1);
        stem1_bn_ = std::make_unique<BatchNorm<T>>(cfg.stem_channels);
        stem2_ = std::make_unique<Conv2d<T>>(cfg.stem_channels, cfg.stem_channels, 2, 3, 1, 1, 0, 1);
        stem2_bn_ = std::make_unique<BatchNorm<T>>(cfg.stem_channels);
        int in_ch = cfg.stem_channels;
        for (size_t s = 0; s < cfg.block_widths.size(); ++s) {
            const int width = cfg.block_widths[s];
            for (int b = 0; b < cfg.blocks_per_stage; ++b) {
                const int stride = (s > 0 && b == 0) ? 2 : 1;
                blocks_.push_back(std::make_unique<ResidualBlock<T>>(in_ch, width, stride));
                in_ch = width;
            }
        }
    }

    const EncoderConfig& config() const { return cfg_; }

    void init(RandomStream& rng) override {
        stem1_->init(rng);
        stem2_->init(rng);
        for (auto& b : blocks_) b->init(rng);
    }

    Tensor<T> forward(const Tensor<T>& x, bool training) override {
        if (x.shape.size() != 4 || x.dim(1) != 1 || x.dim(2) != cfg_.input_height ||
            x.dim(3) != cfg_.input_width)
            throw config_error("encoder: expected [B,1," + std::to_string(cfg_.input_height) +
                               "," + std::to_string(cfg_.input_width) + "], got " +
                               shape_str(x.shape));
        Tensor<T> h = stem1_gelu_.forward(stem1_bn_->forward(stem1_->forward(x, training), training),
                                          training);
        h = stem2_gelu_.forward(stem2_bn_->forward(stem2_->forward(h, training), training),
                                training);
        for (auto& b : blocks_) h = b->forward(h, training);
        return pool_.forward(h, training);
    }

    Tensor<T> backward(const Tensor<T>& gy) override {
        Tensor<T> g = pool_.backward(gy);
        for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) g = (*it)->backward(g);
        g = stem2_->backward(stem2_bn_->backward(stem2_gelu_.backward(g)));
        g = stem1_->backward(stem1_bn_->backward(stem1_gelu_.backward(g)));
        return g;
    }

    void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
        stem1_->collect_params(prefix + ".stem1.conv", out);
        stem1_bn_->collect_params(prefix + ".stem1.bn", out);
        stem2_->collect_params(prefix + ".stem2.conv", out);
        stem2_bn_->collect_params(prefix + ".stem2.bn", out);
        for (size_t i = 0; i < blocks_.size(); ++i)
            blocks_[i]->collect_params(prefix + ".block" + std::to_string(i), out);
    }

private:
    EncoderConfig cfg_;
    std::unique_ptr<Conv2d<T>> stem1_, stem2_;
    std::unique_ptr<BatchNorm<T>> stem1_bn_, stem2_bn_;
    Gelu<T> stem1_gelu_, stem2_gelu_;
    std::vector<std::unique_ptr<ResidualBlock<T>>> blocks_;
    GlobalAvgPool<T> pool_;
};

/// Contrastive projection head: single linear map onto the unit sphere.
template <typename T>
class ProjectionHead final : public Layer<T> {
public:
    explicit ProjectionHead(const HeadConfig& cfg)
        : lin_(cfg.embed_dim, cfg.projection_dim) {
        cfg.validate();
    }

    void init(RandomStream& rng) override { lin_.init(rng); }

    Tensor<T> forward(const Tensor<T>& x, bool training) override {
        return norm_.forward(lin_.forward(x, training), training);
    }
    Tensor<T> backward(const Tensor<T>& gy) override {
        return lin_.backward(norm_.backward(gy));
    }
    void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
        lin_.collect_params(prefix + ".linear", out);
    }
    int64_t guard_hits() const { return norm_.guard_hits(); }

private:
    Linear<T> lin_;
    L2NormalizeRows<T> norm_;
};

template <typename T>
class Classifier final : public Layer<T> {
public:
    explicit Classifier(const HeadConfig& cfg) : lin_(cfg.embed_dim, cfg.n_classes) {
        cfg.validate();
    }

    void init(RandomStream& rng) override { lin_.init(rng); }

    Tensor<T> forward(const Tensor<T>& x, bool training) override {
        return lin_.forward(x, training);
    }
    Tensor<T> backward(const Tensor<T>& gy) override { return lin_.backward(gy); }
    void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) override {
        lin_.collect_params(prefix + ".linear", out);
    }

private:
    Linear<T> lin_;
};

template <typename T>
inline std::vector<ParamRef<T>> collect_all(Layer<T>& layer, const std::string& prefix) {
    std::vector<ParamRef<T>> out;
    layer.collect_params(prefix, out);
    return out;
}

} // namespace csirf::nn
