#include "csirf/ls.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "csirf/errors.hpp"
#include "csirf/nn/train.hpp"

namespace csirf {

void LsConfig::validate() const {
    if (!grid) throw config_error("ls: null grid");
    grid->validate();
    if (num_taps < 1 || num_taps > grid->count())
        throw config_error("ls: num_taps must lie in [1, subcarrier count]");
    if (!(fade_epsilon > 0.0)) throw config_error("ls: fade_epsilon must be positive");
}

CsiVector denoise_average(const std::vector<CsiVector>& measurements) {
    if (measurements.empty()) throw data_error("denoise_average: no measurements");
    const auto& first = measurements.front();
    std::vector<cdouble> acc(first.values.size(), cdouble(0.0, 0.0));
    for (const auto& m : measurements) {
        if (!(*m.grid == *first.grid))
            throw data_error("denoise_average: mixed subcarrier grids");
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += m.values[i];
    }
    const double inv = 1.0 / static_cast<double>(measurements.size());
    for (auto& x : acc) x *= inv;
    return CsiVector(first.grid, std::move(acc));
}

FingerprintEstimate extract_fingerprint_ls(const CsiVector& csi, const LsConfig& cfg) {
    cfg.validate();
    if (!(*csi.grid == *cfg.grid)) throw data_error("ls extraction: grid mismatch");
    std::vector<int> delays(static_cast<size_t>(cfg.num_taps));
    for (int l = 0; l < cfg.num_taps; ++l) delays[static_cast<size_t>(l)] = l;
    const CMat F = tap_basis(*cfg.grid, delays);
    const std::vector<cdouble> a_hat = qr_solve_ls(F, csi.values);
    const std::vector<cdouble> h_hat = matvec(F, a_hat);

    double rms = 0.0;
    for (const auto& h : h_hat) rms += std::norm(h);
    rms = std::sqrt(rms / static_cast<double>(h_hat.size()));
    const double floor = cfg.fade_epsilon * rms;

    FingerprintEstimate est;
    est.values.resize(h_hat.size());
    est.faded.assign(h_hat.size(), 0);
    int live = 0;
    for (size_t k = 0; k < h_hat.size(); ++k) {
        if (std::abs(h_hat[k]) <= floor) {
            est.values[k] = cdouble(0.0, 0.0);
            est.faded[k] = 1;
        } else {
            est.values[k] = csi.values[k] / h_hat[k] - cdouble(1.0, 0.0);
            ++live;
        }
    }
    if (live == 0) throw numeric_error("ls extraction: fitted channel entirely below fade floor");
    return est;
}

FiveNumber five_number_summary(std::vector<double> values) {
    if (values.empty()) throw data_error("five_number_summary: no values");
    std::sort(values.begin(), values.end());
    const auto q = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    return FiveNumber{values.front(), q(0.25), q(0.5), q(0.75), values.back()};
}

std::vector<DistanceSummary> distance_study(const std::vector<FingerprintEstimate>& estimates) {
    if (estimates.size() < 2) throw data_error("distance_study: need at least 2 estimates");
    std::map<std::string, std::vector<size_t>> groups;
    for (size_t i = 0; i < estimates.size(); ++i)
        groups[estimates[i].condition_tag].push_back(i);

    std::vector<DistanceSummary> out;
    uint64_t total_pairs = 0;
    for (const auto& [tag, idxs] : groups) {
        std::vector<double> intra, inter;
        for (size_t a = 0; a < idxs.size(); ++a) {
            const auto& ea = estimates[idxs[a]];
            for (size_t b = a + 1; b < idxs.size(); ++b) {
                const auto& eb = estimates[idxs[b]];
                if (ea.values.size() != eb.values.size())
                    throw data_error("distance_study: estimate length mismatch");
                double acc = 0.0;
                for (size_t k = 0; k < ea.values.size(); ++k)
                    acc += std::norm(ea.values[k] - eb.values[k]);
                const double d = std::sqrt(acc);
                (ea.source_label == eb.source_label ? intra : inter).push_back(d);
            }
        }
        for (const auto* bucket : {&intra, &inter}) {
            if (bucket->empty()) continue;
            const FiveNumber f = five_number_summary(*bucket);
            DistanceSummary row;
            row.condition_tag = tag;
            row.kind = (bucket == &intra) ? "intra" : "inter";
            row.min = f.min;
            row.q1 = f.q1;
            row.median = f.median;
            row.q3 = f.q3;
            row.max = f.max;
            row.n_pairs = bucket->size();
            total_pairs += bucket->size();
            out.push_back(std::move(row));
        }
    }
    if (total_pairs == 0) throw data_error("distance_study: no comparable pairs");
    return out;
}

void write_distance_csv(const std::string& path, const std::vector<DistanceSummary>& rows) {
    std::ofstream os(path);
    if (!os) throw data_error("cannot open for writing: " + path);
    os << "condition,kind,min,q1,median,q3,max,n_pairs\n";
    os.precision(12);
    for (const auto& r : rows)
        os << r.condition_tag << ',' << r.kind << ',' << r.min << ',' << r.q1 << ',' << r.median
           << ',' << r.q3 << ',' << r.max << ',' << r.n_pairs << '\n';
    if (!os) throw data_error("write failed: " + path);
}

namespace {

nn::Tensor<float> estimate_features(const std::vector<FingerprintEstimate>& ests,
                                    const std::vector<size_t>& order, size_t offset, size_t count,
                                    int width) {
    nn::Tensor<float> x({static_cast<int>(count), 2 * width});
    for (size_t r = 0; r < count; ++r) {
        const auto& e = ests[order[offset + r]];
        if (static_cast<int>(e.values.size()) != width)
            throw data_error("ls classifier: estimate length mismatch");
        float* row = x.data.data() + r * static_cast<size_t>(2 * width);
        for (int k = 0; k < width; ++k) {
            row[k] = static_cast<float>(e.values[static_cast<size_t>(k)].real());
            row[width + k] = static_cast<float>(e.values[static_cast<size_t>(k)].imag());
        }
    }
    return x;
}

std::vector<int> estimate_labels(const std::vector<FingerprintEstimate>& ests,
                                 const std::vector<size_t>& order, size_t offset, size_t count) {
    std::vector<int> y(count);
    for (size_t r = 0; r < count; ++r) y[r] = ests[order[offset + r]].source_label;
    return y;
}

} // namespace

nn::ModelCheckpoint train_ls_classifier(const std::vector<FingerprintEstimate>& train,
                                        const std::vector<FingerprintEstimate>& val,
                                        const LsClassifierConfig& cfg) {
    if (cfg.n_classes < 2) throw config_error("ls classifier: need at least 2 classes");
    if (train.empty() || val.empty()) throw data_error("ls classifier: empty train or val set");
    const int width = static_cast<int>(train.front().values.size());
    for (const auto* set : {&train, &val})
        for (const auto& e : *set) {
            if (e.source_label < 0 || e.source_label >= cfg.n_classes)
                throw data_error("ls classifier: label out of range");
            if (static_cast<int>(e.values.size()) != width)
                throw data_error("ls classifier: estimate length mismatch");
        }

    nn::Linear<float> lin(2 * width, cfg.n_classes);
    RandomStream init_rng(cfg.seed, 0xA11);
    lin.init(init_rng);
    auto params = nn::collect_all<float>(lin, "ls");
    nn::AdamConfig acfg;
    acfg.lr = cfg.lr;
    acfg.weight_decay = cfg.weight_decay;
    nn::Adam<float> opt(params, acfg);
    nn::EarlyStopper stopper(cfg.patience);

    std::vector<size_t> train_order(train.size()), val_order(val.size());
    for (size_t i = 0; i < train.size(); ++i) train_order[i] = i;
    for (size_t i = 0; i < val.size(); ++i) val_order[i] = i;

    std::vector<double> loss_hist, acc_hist;
    std::vector<nn::NamedBlob> best_blobs;
    int epochs = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        RandomStream shuffle_rng(cfg.seed, 0xE000 + static_cast<uint64_t>(epoch));
        for (size_t i = train_order.size(); i > 1; --i)
            std::swap(train_order[i - 1], train_order[shuffle_rng.uniform_index(i)]);
        for (size_t off = 0; off < train_order.size(); off += static_cast<size_t>(cfg.batch_size)) {
            const size_t n = std::min<size_t>(cfg.batch_size, train_order.size() - off);
            auto x = estimate_features(train, train_order, off, n, width);
            auto y = estimate_labels(train, train_order, off, n);
            auto logits = lin.forward(x, true);
            auto loss = nn::cross_entropy_loss(logits, y);
            if (!std::isfinite(loss.value))
                throw numeric_error("ls classifier: training diverged at epoch " +
                                    std::to_string(epoch));
            opt.zero_grad();
            lin.backward(loss.grad);
            opt.step();
        }

        double val_loss = 0.0;
        int correct = 0;
        for (size_t off = 0; off < val_order.size(); off += static_cast<size_t>(cfg.batch_size)) {
            const size_t n = std::min<size_t>(cfg.batch_size, val_order.size() - off);
            auto x = estimate_features(val, val_order, off, n, width);
            auto y = estimate_labels(val, val_order, off, n);
            auto logits = lin.forward(x, false);
            val_loss += nn::cross_entropy_loss(logits, y).value * static_cast<double>(n);
            for (size_t r = 0; r < n; ++r) {
                const float* row = logits.data.data() + r * static_cast<size_t>(cfg.n_classes);
                int arg = 0;
                for (int k = 1; k < cfg.n_classes; ++k)
                    if (row[k] > row[arg]) arg = k;
                if (arg == y[r]) ++correct;
            }
        }
        val_loss /= static_cast<double>(val.size());
        loss_hist.push_back(val_loss);
        acc_hist.push_back(static_cast<double>(correct) / static_cast<double>(val.size()));
        ++epochs;

        const bool stop = stopper.observe(val_loss);
        if (stopper.improved_last()) {
            nn::ModelCheckpoint snap;
            nn::snapshot_params<float>(lin, "ls", snap);
            best_blobs = std::move(snap.blobs);
        }
        if (stop) break;
    }

    nn::ModelCheckpoint ckpt;
    ckpt.kind = "ls_linear";
    ckpt.config = {{"n_classes", cfg.n_classes},
                   {"feature_width", width},
                   {"lr", cfg.lr},
                   {"weight_decay", cfg.weight_decay},
                   {"batch_size", cfg.batch_size},
                   {"patience", cfg.patience},
                   {"seed", cfg.seed}};
    ckpt.blobs = std::move(best_blobs);
    ckpt.epochs_run = epochs;
    ckpt.best_epoch = stopper.best_epoch();
    ckpt.val_loss_history = std::move(loss_hist);
    ckpt.val_metric_history = std::move(acc_hist);
    return ckpt;
}

std::vector<int> ls_classifier_predict(const nn::ModelCheckpoint& ckpt,
                                       const std::vector<FingerprintEstimate>& estimates) {
    if (ckpt.kind != "ls_linear") throw data_error("ls predict: checkpoint kind mismatch");
    const int n_classes = ckpt.config.at("n_classes").get<int>();
    const int width = ckpt.config.at("feature_width").get<int>();
    nn::Linear<float> lin(2 * width, n_classes);
    nn::restore_params<float>(lin, "ls", ckpt);

    std::vector<size_t> order(estimates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<int> out(estimates.size(), 0);
    constexpr size_t kBatch = 256;
    for (size_t off = 0; off < estimates.size(); off += kBatch) {
        const size_t n = std::min(kBatch, estimates.size() - off);
        auto x = estimate_features(estimates, order, off, n, width);
        auto logits = lin.forward(x, false);
        for (size_t r = 0; r < n; ++r) {
            const float* row = logits.data.data() + r * static_cast<size_t>(n_classes);
            int arg = 0;
            for (int k = 1; k < n_classes; ++k)
                if (row[k] > row[arg]) arg = k;
            out[off + r] = arg;
        }
    }
    return out;
}

} // namespace csirf
