// Acceptance gate. Each criterion prints exactly one PASS/FAIL line with its
// measured values; the exit status is the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "csirf/channel.hpp"
#include "csirf/config.hpp"
#include "csirf/dataset.hpp"
#include "csirf/devices.hpp"
#include "csirf/errors.hpp"
#include "csirf/ls.hpp"
#include "csirf/nn/checkpoint.hpp"
#include "csirf/nn/layers.hpp"
#include "csirf/nn/loss.hpp"
#include "csirf/nn/model.hpp"
#include "csirf/nn/train.hpp"
#include "csirf/report.hpp"

namespace fs = std::filesystem;
using namespace csirf;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string strf(const char* fmt, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    return buf;
}

fs::path work_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / "csirf_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot read: " + path);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw data_error("cannot write: " + path);
}

// --- 1: signal-model identities -------------------------------------------

Outcome criterion_1() {
    const double t0 = now_s();
    const auto grid = SubcarrierGrid::wifi20();
    const auto conditions = ChannelModelSpec::standard_six();
    const int n = grid->count();

    double compose_err = 0.0, augment_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        RandomStream setup(100, static_cast<uint64_t>(i));
        const auto& spec = conditions[static_cast<size_t>(i) % conditions.size()];
        const MultipathChannel ch = sample_channel(spec, setup);
        DeviceFingerprint fp;
        fp.device_id = 0;
        fp.deviations.resize(static_cast<size_t>(n));
        for (auto& v : fp.deviations) v = 0.05 * setup.complex_normal();
        const double snr = 10.0 + 5.0 * (i % 7);

        // Twin streams expose the additive noise term: the noisy composite
        // must equal the noiseless product plus the same calibrated draw.
        RandomStream ra(200, static_cast<uint64_t>(i));
        RandomStream rb(200, static_cast<uint64_t>(i));
        const CsiVector clean = compose_csi(ch, fp, NoiseSpec::off(), rb);
        const CsiVector noisy = compose_csi(ch, fp, NoiseSpec::at(snr), ra);
        const CsiVector rebuilt = add_awgn(clean, NoiseSpec::at(snr), rb);
        double scale = 1.0, err = 0.0;
        for (int k = 0; k < n; ++k) {
            const cdouble want =
                ch.freq_response.values[static_cast<size_t>(k)] *
                (cdouble(1.0, 0.0) + fp.deviations[static_cast<size_t>(k)]);
            scale = std::max(scale, std::abs(want));
            err = std::max(err, std::abs(clean.values[static_cast<size_t>(k)] - want));
            err = std::max(err, std::abs(noisy.values[static_cast<size_t>(k)] -
                                         rebuilt.values[static_cast<size_t>(k)]));
        }
        compose_err = std::max(compose_err, err / scale);

        const MultipathChannel ch2 = sample_channel(spec, setup);
        RandomStream rc(300, static_cast<uint64_t>(i));
        RandomStream rd(300, static_cast<uint64_t>(i));
        const CsiVector aug = augment_sample(clean, ch2, NoiseSpec::at(snr), rc);
        std::vector<cdouble> prod(static_cast<size_t>(n));
        double scale2 = 1.0;
        for (int k = 0; k < n; ++k) {
            prod[static_cast<size_t>(k)] = ch2.freq_response.values[static_cast<size_t>(k)] *
                                           clean.values[static_cast<size_t>(k)];
            scale2 = std::max(scale2, std::abs(prod[static_cast<size_t>(k)]));
        }
        const CsiVector want2 = add_awgn(CsiVector(grid, std::move(prod)), NoiseSpec::at(snr), rd);
        double err2 = 0.0;
        for (int k = 0; k < n; ++k)
            err2 = std::max(err2, std::abs(aug.values[static_cast<size_t>(k)] -
                                           want2.values[static_cast<size_t>(k)]));
        augment_err = std::max(augment_err, err2 / scale2);
    }

    // Time/frequency equivalence: the cached response applied in frequency
    // must match circular convolution with the taps in time.
    double conv_err = 0.0;
    const int fft = grid->fft_size;
    for (int i = 0; i < 1000; ++i) {
        RandomStream rng(500, static_cast<uint64_t>(i));
        const int L = 1 + static_cast<int>(rng.uniform_index(16));
        std::vector<cdouble> taps(static_cast<size_t>(L));
        for (auto& t : taps) t = rng.complex_normal();
        std::vector<cdouble> x(static_cast<size_t>(fft));
        for (auto& v : x) v = rng.complex_normal();
        std::vector<cdouble> y(static_cast<size_t>(fft), cdouble(0.0, 0.0));
        for (int m = 0; m < fft; ++m)
            for (int l = 0; l < L; ++l)
                y[static_cast<size_t>(m)] +=
                    taps[static_cast<size_t>(l)] * x[static_cast<size_t>((m - l + fft) % fft)];
        const CsiVector H = freq_response(taps, grid);
        for (int b = 0; b < n; ++b) {
            const int k = grid->active_indices[static_cast<size_t>(b)];
            cdouble X = 0.0, Y = 0.0;
            for (int m = 0; m < fft; ++m) {
                const cdouble w = std::polar(1.0, -2.0 * M_PI * k * m / fft);
                X += x[static_cast<size_t>(m)] * w;
                Y += y[static_cast<size_t>(m)] * w;
            }
            const cdouble want = H.values[static_cast<size_t>(b)] * X;
            conv_err = std::max(conv_err,
                                std::abs(Y - want) / std::max(1.0, std::abs(want)));
        }
    }

    const double dt = now_s() - t0;
    Outcome o;
    o.pass = compose_err < 1e-10 && augment_err < 1e-10 && conv_err < 1e-10 && dt < 10.0;
    o.detail = strf("compose %.2e, augment %.2e, time/freq conv %.2e (tol 1e-10, "
                    "1000 instances each), %.1f s (limit 10)",
                    compose_err, augment_err, conv_err, dt);
    return o;
}

// --- 2: noiseless LS recovery ----------------------------------------------

Outcome criterion_2() {
    const double t0 = now_s();
    const auto pop = generate_population(19, FingerprintProfile::Smooth, 0.03, 9, 42);
    LsConfig lcfg;
    double worst = 0.0;
    for (int d = 0; d < 19; ++d) {
        const auto& fp = pop.fingerprints[static_cast<size_t>(d)];
        double fref = 0.0;
        for (const auto& v : fp.deviations) fref += std::norm(v);
        fref = std::sqrt(fref);
        for (int i = 0; i < 100; ++i) {
            RandomStream rng(600 + static_cast<uint64_t>(d), static_cast<uint64_t>(i));
            CsiVector resp;
            if (i % 3 == 2) {
                const int L = 1 + i % lcfg.num_taps;
                std::vector<cdouble> taps(static_cast<size_t>(L));
                for (auto& t : taps) t = rng.complex_normal();
                resp = freq_response(taps, pop.grid);
            } else {
                const auto spec = ChannelModelSpec::preset(ChannelModel::ModelB, i % 3 == 0);
                resp = sample_channel(spec, rng, pop.grid).freq_response;
            }
            const CsiVector c = compose_csi(resp, fp, NoiseSpec::off(), rng);
            const auto est = extract_fingerprint_ls(c, lcfg);
            double err = 0.0;
            for (size_t k = 0; k < est.values.size(); ++k)
                err += std::norm(est.values[k] - fp.deviations[k]);
            worst = std::max(worst, std::sqrt(err) / fref);
        }
    }
    const double dt = now_s() - t0;
    Outcome o;
    o.pass = worst < 1e-6 && dt < 30.0;
    o.detail = strf("max relative error %.2e over 19 devices x 100 draws (tol 1e-6), "
                    "%.1f s (limit 30)",
                    worst, dt);
    return o;
}

// --- 3: separability under multipath ---------------------------------------

Outcome criterion_3() {
    const double t0 = now_s();
    const auto pop = generate_population(19, FingerprintProfile::Smooth, 0.03, 9, 42);
    const auto spec_b = ChannelModelSpec::preset(ChannelModel::ModelB, false);
    const auto spec_c = ChannelModelSpec::preset(ChannelModel::ModelC, false);

    std::vector<DatasetRecord> recs;
    for (int d = 0; d < 19; ++d) {
        const auto& fp = pop.fingerprints[static_cast<size_t>(d)];
        for (int i = 0; i < 20; ++i) {
            for (const auto* spec : {&spec_b, &spec_c}) {
                RandomStream rng(700 + static_cast<uint64_t>(d),
                                 static_cast<uint64_t>(i) * 2 +
                                     (spec == &spec_c ? 1 : 0));
                const MultipathChannel ch = sample_channel(*spec, rng);
                DatasetRecord r;
                r.csi = quantize_csi_f32(compose_csi(ch, fp, NoiseSpec::at(40.0), rng));
                r.label = d;
                r.channel_tag = spec->tag();
                r.snr_db = 40.0;
                r.realization_id = static_cast<uint32_t>(i);
                recs.push_back(std::move(r));
            }
        }
    }

    DistanceStudyOptions opts;
    opts.report_snr_db = 40.0;
    opts.n_ref_per_device = 20;
    opts.denoise_count = 100;
    opts.max_per_condition = 20;
    opts.seed = 43;
    const auto res = run_distance_study(pop, recs, LsConfig{}, opts);

    const auto find = [&](const char* tag, const char* kind) -> const DistanceSummary* {
        for (const auto& s : res.summaries)
            if (s.condition_tag == tag && s.kind == kind) return &s;
        return nullptr;
    };
    const auto* li = find("LoS-ref", "intra");
    const auto* le = find("LoS-ref", "inter");
    const auto* bi = find("B-NLoS", "intra");
    const auto* ci = find("C-NLoS", "intra");

    Outcome o;
    if (!li || !le || !bi || !ci) {
        o.pass = false;
        o.detail = "distance study did not produce all four summaries";
        return o;
    }
    const bool sep = li->max < le->min;
    const bool b_over = bi->median > le->min;
    const bool c_over = ci->median > le->min;
    o.pass = sep && b_over && c_over;
    o.detail = strf("LoS intra max %.6f < inter min %.6f: %s; B-NLoS median %.6f > %.6f: %s; "
                    "C-NLoS median %.6f > %.6f: %s; %.1f s",
                    li->max, le->min, sep ? "yes" : "NO", bi->median, le->min,
                    b_over ? "yes" : "NO", ci->median, le->min, c_over ? "yes" : "NO",
                    now_s() - t0);
    return o;
}

// --- 4: finite-difference gradient integrity --------------------------------

double grad_gap(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double probe_loss(nn::Layer<double>& layer, const nn::Tensor<double>& x, bool training,
                  const nn::Tensor<double>& r) {
    const nn::Tensor<double> y = layer.forward(x, training);
    double acc = 0.0;
    for (size_t i = 0; i < y.data.size(); ++i) acc += y.data[i] * r.data[i];
    return acc;
}

double fd_check(nn::Layer<double>& layer, nn::Tensor<double> x, bool training, uint64_t seed) {
    auto params = nn::collect_all(layer, "p");
    for (auto& p : params) {
        p.tensor->ensure_grad();
        p.tensor->zero_grad();
    }
    nn::Tensor<double> y = layer.forward(x, training);
    nn::Tensor<double> r(y.shape);
    RandomStream rr(seed, 7);
    for (auto& v : r.data) v = rr.uniform(-1.0, 1.0);
    const nn::Tensor<double> gx = layer.backward(r);

    const double h = 1e-6;
    double worst = 0.0;
    const auto probe = [&](double* slot, double analytic) {
        const double keep = *slot;
        *slot = keep + h;
        const double lp = probe_loss(layer, x, training, r);
        *slot = keep - h;
        const double lm = probe_loss(layer, x, training, r);
        *slot = keep;
        worst = std::max(worst, grad_gap((lp - lm) / (2.0 * h), analytic));
    };
    for (size_t i = 0; i < x.data.size(); ++i) probe(&x.data[i], gx.data[i]);
    for (auto& p : params) {
        if (!p.trainable) continue;
        for (size_t i = 0; i < p.tensor->data.size(); ++i)
            probe(&p.tensor->data[i], p.tensor->grad[i]);
    }
    return worst;
}

nn::Tensor<double> random_tensor(const std::vector<int>& shape, uint64_t seed) {
    nn::Tensor<double> t(shape);
    RandomStream rng(seed, 3);
    for (auto& v : t.data) v = rng.normal();
    return t;
}

Outcome criterion_4() {
    const double t0 = now_s();
    RandomStream init(900, 0);
    double worst_layer = 0.0;
    std::string worst_name = "none";
    const auto track = [&](const char* name, double gap) {
        if (gap > worst_layer) {
            worst_layer = gap;
            worst_name = name;
        }
    };

    {
        nn::Conv2d<double> conv(2, 3, 2, 3, 1, 2, 0, 1, true);
        conv.init(init);
        track("conv2d", fd_check(conv, random_tensor({2, 2, 2, 8}, 1), true, 1));
    }
    {
        nn::Conv2d<double> conv(2, 3, 1, 3, 1, 1, 0, 1, false);
        conv.init(init);
        track("conv2d_tall", fd_check(conv, random_tensor({2, 2, 3, 8}, 2), true, 2));
    }
    {
        nn::BatchNorm<double> bn(3);
        bn.init(init);
        track("batchnorm_train", fd_check(bn, random_tensor({4, 3, 2, 5}, 3), true, 3));
        nn::Tensor<double> warm = random_tensor({4, 3, 2, 5}, 4);
        bn.forward(warm, true);
        track("batchnorm_eval", fd_check(bn, random_tensor({4, 3, 2, 5}, 5), false, 5));
    }
    {
        nn::Gelu<double> g;
        track("gelu", fd_check(g, random_tensor({2, 3, 4}, 6), true, 6));
    }
    {
        nn::Linear<double> lin(5, 4, true);
        lin.init(init);
        track("linear", fd_check(lin, random_tensor({3, 5}, 7), true, 7));
    }
    {
        nn::GlobalAvgPool<double> gap;
        track("gap", fd_check(gap, random_tensor({2, 3, 2, 5}, 8), true, 8));
    }
    {
        nn::L2NormalizeRows<double> norm;
        track("l2norm", fd_check(norm, random_tensor({3, 6}, 9), true, 9));
    }
    {
        nn::ResidualBlock<double> blk(3, 5, 2);
        blk.init(init);
        track("resblock_proj", fd_check(blk, random_tensor({3, 3, 1, 8}, 10), true, 10));
    }
    {
        nn::ResidualBlock<double> blk(4, 4, 1);
        blk.init(init);
        track("resblock_ident", fd_check(blk, random_tensor({3, 4, 1, 8}, 11), true, 11));
    }
    nn::EncoderConfig ecfg;
    ecfg.input_width = 8;
    ecfg.stem_channels = 4;
    ecfg.block_widths = {4, 6};
    ecfg.blocks_per_stage = 1;
    ecfg.embed_dim = 6;
    {
        nn::Encoder<double> enc(ecfg);
        enc.init(init);
        track("encoder", fd_check(enc, random_tensor({3, 1, 2, 8}, 12), true, 12));
    }
    nn::HeadConfig hcfg;
    hcfg.embed_dim = 6;
    hcfg.projection_dim = 4;
    hcfg.n_classes = 3;
    {
        nn::ProjectionHead<double> head(hcfg);
        head.init(init);
        track("projection", fd_check(head, random_tensor({3, 6}, 13), true, 13));
    }
    {
        nn::Classifier<double> cls(hcfg);
        cls.init(init);
        track("classifier", fd_check(cls, random_tensor({3, 6}, 14), true, 14));
    }

    // Losses: central differences on the loss value itself.
    double worst_loss = 0.0;
    const double h = 1e-6;
    {
        nn::Tensor<double> z = random_tensor({4, 3}, 15);
        const std::vector<int> labels = {0, 0, 1, 1};
        const auto res = nn::supcon_loss(z, labels, 0.07);
        for (size_t i = 0; i < z.data.size(); ++i) {
            const double keep = z.data[i];
            z.data[i] = keep + h;
            const double lp = nn::supcon_loss(z, labels, 0.07).value;
            z.data[i] = keep - h;
            const double lm = nn::supcon_loss(z, labels, 0.07).value;
            z.data[i] = keep;
            worst_loss = std::max(worst_loss, grad_gap((lp - lm) / (2.0 * h), res.grad.data[i]));
        }
    }
    {
        nn::Tensor<double> logits = random_tensor({3, 4}, 16);
        const std::vector<int> labels = {0, 3, 2};
        const auto res = nn::cross_entropy_loss(logits, labels);
        for (size_t i = 0; i < logits.data.size(); ++i) {
            const double keep = logits.data[i];
            logits.data[i] = keep + h;
            const double lp = nn::cross_entropy_loss(logits, labels).value;
            logits.data[i] = keep - h;
            const double lm = nn::cross_entropy_loss(logits, labels).value;
            logits.data[i] = keep;
            worst_loss = std::max(worst_loss, grad_gap((lp - lm) / (2.0 * h), res.grad.data[i]));
        }
    }

    const double dt = now_s() - t0;
    Outcome o;
    o.pass = worst_layer < 1e-3 && worst_loss < 1e-4 && dt < 60.0;
    o.detail = strf("worst layer gap %.2e at %s (tol 1e-3), worst loss gap %.2e (tol 1e-4), "
                    "%.1f s (limit 60)",
                    worst_layer, worst_name.c_str(), worst_loss, dt);
    return o;
}

// --- 5: contrastive loss oracle --------------------------------------------

double supcon_direct(const std::vector<std::vector<double>>& z, const std::vector<int>& labels,
                     double tau) {
    const int B = static_cast<int>(z.size());
    const auto dot = [&](int a, int b) {
        double acc = 0.0;
        for (size_t d = 0; d < z[static_cast<size_t>(a)].size(); ++d)
            acc += z[static_cast<size_t>(a)][d] * z[static_cast<size_t>(b)][d];
        return acc;
    };
    double total = 0.0;
    int anchors = 0;
    for (int i = 0; i < B; ++i) {
        std::vector<int> pos;
        for (int j = 0; j < B; ++j)
            if (j != i && labels[static_cast<size_t>(j)] == labels[static_cast<size_t>(i)])
                pos.push_back(j);
        if (pos.empty()) continue;
        ++anchors;
        double denom = 0.0;
        for (int a = 0; a < B; ++a)
            if (a != i) denom += std::exp(dot(i, a) / tau);
        double li = 0.0;
        for (int p : pos) li += std::log(std::exp(dot(i, p) / tau) / denom);
        total += -li / static_cast<double>(pos.size());
    }
    return total / static_cast<double>(anchors);
}

Outcome criterion_5() {
    const double t0 = now_s();
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        RandomStream rng(1000, static_cast<uint64_t>(trial));
        const int B = 2 + static_cast<int>(rng.uniform_index(9));
        const int D = 2 + static_cast<int>(rng.uniform_index(7));
        const int n_classes = 1 + static_cast<int>(rng.uniform_index(
                                  static_cast<uint64_t>(std::min(B, 4))));
        std::vector<int> labels(static_cast<size_t>(B));
        for (bool ok = false; !ok;) {
            for (auto& l : labels)
                l = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n_classes)));
            for (int i = 0; i < B && !ok; ++i)
                for (int j = i + 1; j < B; ++j)
                    if (labels[static_cast<size_t>(i)] == labels[static_cast<size_t>(j)]) {
                        ok = true;
                        break;
                    }
        }
        nn::Tensor<double> z({B, D});
        std::vector<std::vector<double>> rows(static_cast<size_t>(B),
                                              std::vector<double>(static_cast<size_t>(D)));
        for (int i = 0; i < B; ++i) {
            double nrm = 0.0;
            for (int d = 0; d < D; ++d) {
                rows[static_cast<size_t>(i)][static_cast<size_t>(d)] = rng.normal();
                nrm += rows[static_cast<size_t>(i)][static_cast<size_t>(d)] *
                       rows[static_cast<size_t>(i)][static_cast<size_t>(d)];
            }
            nrm = std::sqrt(nrm);
            for (int d = 0; d < D; ++d) {
                rows[static_cast<size_t>(i)][static_cast<size_t>(d)] /= nrm;
                z.data[static_cast<size_t>(i) * D + d] =
                    rows[static_cast<size_t>(i)][static_cast<size_t>(d)];
            }
        }
        const double tau = 0.05 + rng.uniform(0.0, 0.5);
        const double got = nn::supcon_loss(z, labels, tau).value;
        const double want = supcon_direct(rows, labels, tau);
        worst = std::max(worst, std::abs(got - want));
    }

    // Degenerate batch of identical same-class rows collapses to ln(B-1).
    double collapse = 0.0;
    for (const int B : {4, 20}) {
        nn::Tensor<double> z({B, 3});
        for (int i = 0; i < B; ++i) {
            z.data[static_cast<size_t>(i) * 3 + 0] = 1.0;
            z.data[static_cast<size_t>(i) * 3 + 1] = 0.0;
            z.data[static_cast<size_t>(i) * 3 + 2] = 0.0;
        }
        const std::vector<int> labels(static_cast<size_t>(B), 0);
        const double got = nn::supcon_loss(z, labels, 0.07).value;
        collapse = std::max(collapse, std::abs(got - std::log(static_cast<double>(B - 1))));
    }

    Outcome o;
    o.pass = worst < 1e-10 && collapse < 1e-10;
    o.detail = strf("max |loss - direct sum| %.2e over 100 batches, "
                    "|loss - ln(B-1)| %.2e identical-case (tol 1e-10), %.1f s",
                    worst, collapse, now_s() - t0);
    return o;
}

// --- 6: desk-scale end-to-end ----------------------------------------------

Outcome criterion_6() {
    const double t0 = now_s();
    RunConfig cfg = RunConfig::from_preset("desk");
    cfg.validate();

    const auto pop = generate_population(cfg.n_devices, cfg.profile, cfg.fingerprint_scale,
                                         cfg.identifiability_order, 42);
    const auto built = build_dataset(pop, ChannelModelSpec::standard_six(), cfg.build, 43);
    const auto split = split_dataset(built.records, cfg.fractions, 44, cfg.min_stratum_size);

    BuildOptions fopts = cfg.build;
    fopts.augment = false;
    fopts.snr_grid_db = {40.0};
    const auto fbuilt = build_dataset(
        pop, {ChannelModelSpec::preset(ChannelModel::ModelB, true)}, fopts, 45);
    const auto fsplit = split_dataset(fbuilt.records, cfg.fractions, 46, cfg.min_stratum_size);

    const auto abl = run_ablation(built.records, split, fbuilt.records, fsplit, cfg,
                                  {Variant::Full, Variant::NoScl, Variant::NoDa,
                                   Variant::NoDaNoScl});

    LsClassifierConfig lcc;
    lcc.n_classes = cfg.n_devices;
    const auto extract = [&](const std::vector<uint64_t>& idx) {
        std::vector<FingerprintEstimate> out;
        out.reserve(idx.size());
        for (uint64_t i : idx) {
            FingerprintEstimate e = extract_fingerprint_ls(built.records[i].csi, cfg.ls);
            e.source_label = built.records[i].label;
            out.push_back(std::move(e));
        }
        return out;
    };
    const auto ls_ckpt = train_ls_classifier(extract(split.train), extract(split.val), lcc);
    const MetricsReport ls_rep = run_eval_ls(ls_ckpt, cfg.ls, built.records, split.test, cfg.eval);

    const auto acc = [&](const char* variant, double snr) {
        return abl.accuracy.at(variant).at(snr);
    };
    const double full40 = acc("full", 40.0), full5 = acc("full", 5.0);
    const double ls40 = ls_rep.accuracy_by_snr.at(40.0);

    const bool a_abs = full40 >= 0.90;
    const bool a_gap = full40 - ls40 >= 0.15;
    const bool b_gap = full40 - full5 >= 0.30;
    bool order = true;
    std::string order_txt;
    for (const double snr : {30.0, 35.0, 40.0}) {
        const double f = acc("full", snr), ns = acc("no_scl", snr), nd = acc("no_da", snr);
        order = order && f >= ns && ns >= nd;
        order_txt += strf("%s%.0f:%.3f/%.3f/%.3f", order_txt.empty() ? "" : " ", snr, f, ns, nd);
    }
    const double dt = now_s() - t0;

    Outcome o;
    o.pass = a_abs && a_gap && b_gap && order && dt < 7200.0;
    o.detail = strf("full@40 %.4f (>=0.90 %s), ls@40 %.4f (gap %.4f >= 0.15 %s), "
                    "full@5 %.4f (rise %.4f >= 0.30 %s), full/no_scl/no_da %s (ordered %s), "
                    "%.0f s (limit 7200)",
                    full40, a_abs ? "yes" : "NO", ls40, full40 - ls40, a_gap ? "yes" : "NO",
                    full5, full40 - full5, b_gap ? "yes" : "NO", order_txt.c_str(),
                    order ? "yes" : "NO", dt);
    return o;
}

// --- 7: determinism ----------------------------------------------------------

struct SmallWorld {
    DevicePopulation pop;
    BuiltDataset built;
    DatasetSplit split;
};

SmallWorld make_small_world() {
    SmallWorld w;
    w.pop = generate_population(5, FingerprintProfile::Smooth, 0.03, 9, 77);
    BuildOptions opts;
    opts.snr_grid_db = {20.0, 40.0};
    opts.n_realizations = 10;
    const std::vector<ChannelModelSpec> conditions = {
        ChannelModelSpec::preset(ChannelModel::ModelB, true),
        ChannelModelSpec::preset(ChannelModel::ModelC, false),
    };
    w.built = build_dataset(w.pop, conditions, opts, 50);
    w.split = split_dataset(w.built.records, SplitFractions{}, 51, 10);
    return w;
}

nn::ModelCheckpoint train_small(const SmallWorld& w, int max_epochs) {
    nn::EncoderConfig ecfg;
    ecfg.stem_channels = 4;
    ecfg.block_widths = {4, 8};
    ecfg.blocks_per_stage = 1;
    ecfg.embed_dim = 8;
    nn::HeadConfig hcfg;
    hcfg.embed_dim = 8;
    hcfg.projection_dim = 4;
    hcfg.n_classes = 5;
    nn::TrainConfig tcfg;
    tcfg.lr = 5e-3;
    tcfg.batch_size = 16;
    tcfg.patience = 5;
    tcfg.max_epochs = max_epochs;
    tcfg.seed = 52;
    return nn::train_stage2(w.built.records, w.split, ecfg, hcfg, tcfg, nullptr, false);
}

Outcome criterion_7() {
    const double t0 = now_s();
    const auto dir = work_dir("determinism");

    const SmallWorld w1 = make_small_world();
    const SmallWorld w2 = make_small_world();
    const auto p1 = (dir / "d1.csf").string(), p2 = (dir / "d2.csf").string();
    write_records(p1, w1.built.records);
    write_records(p2, w2.built.records);
    const uint64_t dh1 = records_hash(w1.built.records), dh2 = records_hash(w2.built.records);
    const bool data_ok = dh1 == dh2 && slurp(p1) == slurp(p2);

    const auto c1 = train_small(w1, 3);
    const auto c2 = train_small(w2, 3);
    const auto k1 = (dir / "c1.ckpt").string(), k2 = (dir / "c2.ckpt").string();
    nn::save_checkpoint(k1, c1);
    nn::save_checkpoint(k2, c2);
    const uint64_t th1 = nn::checkpoint_hash(c1), th2 = nn::checkpoint_hash(c2);
    const bool train_ok = th1 == th2 && slurp(k1) == slurp(k2);

    EvalOptions eopts;
    eopts.report_snr_db = 40.0;
    eopts.batch_size = 64;
    const auto e1 = run_eval_deep(c1, w1.built.records, w1.split.test, eopts).to_json().dump();
    const auto e2 = run_eval_deep(c2, w2.built.records, w2.split.test, eopts).to_json().dump();
    const bool eval_ok = e1 == e2;

    Outcome o;
    o.pass = data_ok && train_ok && eval_ok;
    o.detail = strf("dataset %016llx/%016llx %s, checkpoint %016llx/%016llx %s, "
                    "eval reports %s, %.1f s",
                    static_cast<unsigned long long>(dh1), static_cast<unsigned long long>(dh2),
                    data_ok ? "equal" : "DIFFER", static_cast<unsigned long long>(th1),
                    static_cast<unsigned long long>(th2), train_ok ? "equal" : "DIFFER",
                    eval_ok ? "equal" : "DIFFER", now_s() - t0);
    return o;
}

// --- 8: format round-trips and corruption ------------------------------------

Outcome criterion_8() {
    const double t0 = now_s();
    const auto dir = work_dir("roundtrip");
    const SmallWorld w = make_small_world();
    const auto ckpt = train_small(w, 1);

    const auto rt = [&](const char* name, const std::function<void(const std::string&)>& save1,
                        const std::function<void(const std::string&, const std::string&)>& reload)
        -> bool {
        const std::string a = (dir / (std::string(name) + "_a.bin")).string();
        const std::string b = (dir / (std::string(name) + "_b.bin")).string();
        save1(a);
        reload(a, b);
        return slurp(a) == slurp(b);
    };

    const bool ds_ok = rt(
        "dataset", [&](const std::string& p) { write_records(p, w.built.records); },
        [&](const std::string& a, const std::string& b) { write_records(b, read_records(a)); });
    const bool sp_ok = rt(
        "split", [&](const std::string& p) { save_split(p, w.split); },
        [&](const std::string& a, const std::string& b) { save_split(b, load_split(a)); });
    const bool pop_ok = rt(
        "population", [&](const std::string& p) { save_population(p, w.pop); },
        [&](const std::string& a, const std::string& b) {
            save_population(b, load_population(a));
        });
    const bool ck_ok = rt(
        "checkpoint", [&](const std::string& p) { nn::save_checkpoint(p, ckpt); },
        [&](const std::string& a, const std::string& b) {
            nn::save_checkpoint(b, nn::load_checkpoint(a));
        });

    // Corrupted headers must surface as typed data errors, never crashes.
    int corrupt_pass = 0, corrupt_total = 0;
    const auto corrupt = [&](const char* name, const std::string& clean_path,
                             const std::function<void(const std::string&)>& load) {
        const std::string clean = slurp(clean_path);
        const auto cases = std::vector<std::pair<const char*, std::string>>{
            {"magic", [&] {
                 std::string s = clean;
                 s[0] ^= 0x5a;
                 return s;
             }()},
            {"version", [&] {
                 std::string s = clean;
                 s[4] ^= 0xff;
                 return s;
             }()},
            {"truncated", clean.substr(0, 6)},
        };
        for (const auto& [what, bytes] : cases) {
            ++corrupt_total;
            const std::string p = (dir / (std::string(name) + "_" + what + ".bin")).string();
            spit(p, bytes);
            try {
                load(p);
            } catch (const data_error&) {
                ++corrupt_pass;
                continue;
            } catch (...) {
            }
        }
    };
    corrupt("dataset", (dir / "dataset_a.bin").string(),
            [](const std::string& p) { read_records(p); });
    corrupt("split", (dir / "split_a.bin").string(), [](const std::string& p) { load_split(p); });
    corrupt("population", (dir / "population_a.bin").string(),
            [](const std::string& p) { load_population(p); });
    corrupt("checkpoint", (dir / "checkpoint_a.bin").string(),
            [](const std::string& p) { nn::load_checkpoint(p); });

    Outcome o;
    o.pass = ds_ok && sp_ok && pop_ok && ck_ok && corrupt_pass == corrupt_total;
    o.detail = strf("write-read-write bytes equal: dataset %s, split %s, population %s, "
                    "checkpoint %s; corrupted headers -> data_error %d/%d, %.1f s",
                    ds_ok ? "yes" : "NO", sp_ok ? "yes" : "NO", pop_ok ? "yes" : "NO",
                    ck_ok ? "yes" : "NO", corrupt_pass, corrupt_total, now_s() - t0);
    return o;
}

} // namespace

int main(int argc, char** argv) {
    int which = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            which = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
            return 64;
        }
    }
    if (which < 0 || which > 8) {
        std::fprintf(stderr, "criterion must be 1..8\n");
        return 64;
    }

    using Fn = Outcome (*)();
    const Fn fns[8] = {criterion_1, criterion_2, criterion_3, criterion_4,
                       criterion_5, criterion_6, criterion_7, criterion_8};
    int failures = 0;
    for (int n = 1; n <= 8; ++n) {
        if (which != 0 && which != n) continue;
        Outcome o;
        try {
            o = fns[n - 1]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = strf("unexpected exception: %s", e.what());
        }
        std::printf("criterion %d: %s  %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}
