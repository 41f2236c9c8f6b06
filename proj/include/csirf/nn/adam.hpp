#pragma once

#include <cmath>
#include <vector>

#include "csirf/errors.hpp"
#include "csirf/nn/layers.hpp"

namespace csirf::nn {

struct AdamConfig {
    double lr = 1e-4;
    double weight_decay = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        if (lr <= 0.0) throw config_error("adam: lr must be positive");
        if (weight_decay < 0.0) throw config_error("adam: weight_decay must be >= 0");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw config_error("adam: betas must lie in [0,1)");
        if (eps <= 0.0) throw config_error("adam: eps must be positive");
    }
};

/// Adam with coupled L2 weight decay (decay added to the raw gradient before
/// the moment updates). Moments are kept per parameter tensor, in the order
/// the tensors were registered.
template <typename T>
class Adam {
public:
    Adam(std::vector<ParamRef<T>> params, const AdamConfig& cfg) : cfg_(cfg) {
        cfg.validate();
        for (auto& p : params)
            if (p.trainable) params_.push_back(p);
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i].tensor->data.size(), 0.0);
            v_[i].assign(params_[i].tensor->data.size(), 0.0);
        }
    }

    int64_t steps() const { return t_; }
    const std::vector<ParamRef<T>>& params() const { return params_; }

    void zero_grad() {
        for (auto& p : params_) p.tensor->zero_grad();
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& tensor = *params_[i].tensor;
            if (tensor.grad.size() != tensor.data.size())
                throw numeric_error("adam: missing gradient for " + params_[i].name);
            auto& m = m_[i];
            auto& v = v_[i];
            for (size_t k = 0; k < tensor.data.size(); ++k) {
                double g = static_cast<double>(tensor.grad[k]);
                if (!std::isfinite(g))
                    throw numeric_error("adam: non-finite gradient in " + params_[i].name);
                g += cfg_.weight_decay * static_cast<double>(tensor.data[k]);
                m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g;
                v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g * g;
                const double mhat = m[k] / bc1;
                const double vhat = v[k] / bc2;
                tensor.data[k] = static_cast<T>(static_cast<double>(tensor.data[k]) -
                                                cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
            }
        }
    }

private:
    AdamConfig cfg_;
    std::vector<ParamRef<T>> params_;
    std::vector<std::vector<double>> m_, v_;
    int64_t t_ = 0;
};

} // namespace csirf::nn
