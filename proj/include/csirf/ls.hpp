#pragma once

#include <string>
#include <vector>

#include "csirf/devices.hpp"
#include "csirf/linalg.hpp"
#include "csirf/nn/checkpoint.hpp"
#include "csirf/signal.hpp"

namespace csirf {

struct LsConfig {
    int num_taps = 9;
    double fade_epsilon = 1e-6;
    GridPtr grid = SubcarrierGrid::wifi20();

    void validate() const;
};

/// Output of the least-squares separation: the residual multiplicative
/// deviation per subcarrier, with deep-fade bins zeroed and flagged.
struct FingerprintEstimate {
    std::vector<cdouble> values;
    std::vector<uint8_t> faded;
    int source_label = -1;
    std::string condition_tag;

    int faded_count() const {
        int n = 0;
        for (auto f : faded) n += f ? 1 : 0;
        return n;
    }
};

/// Element-wise average of repeated measurements of the same device under
/// the same channel; the classical denoising step before extraction.
CsiVector denoise_average(const std::vector<CsiVector>& measurements);

/// Fits an order-L tap model to the composite CSI, divides it out, and
/// returns the remaining deviation. Bins where the fitted channel magnitude
/// falls below fade_epsilon * its RMS are zeroed and flagged.
FingerprintEstimate extract_fingerprint_ls(const CsiVector& csi, const LsConfig& cfg);

struct DistanceSummary {
    std::string condition_tag;
    std::string kind; // "intra" or "inter"
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    uint64_t n_pairs = 0;
};

/// Pairwise Euclidean distances between estimates, grouped by condition
/// tag, summarized as five-number summaries for intra-class and inter-class
/// pairs separately.
std::vector<DistanceSummary> distance_study(const std::vector<FingerprintEstimate>& estimates);

void write_distance_csv(const std::string& path, const std::vector<DistanceSummary>& rows);

/// Five-number summary helper (linear interpolation between order
/// statistics).
struct FiveNumber {
    double min, q1, median, q3, max;
};
FiveNumber five_number_summary(std::vector<double> values);

struct LsClassifierConfig {
    int n_classes = 19;
    double lr = 1e-3;
    double weight_decay = 1e-5;
    int batch_size = 64;
    int max_epochs = 200;
    int patience = 10;
    uint64_t seed = 7;
};

/// Linear softmax classifier on stacked re/im fingerprint features; the
/// classical baseline the learned model is compared against.
nn::ModelCheckpoint train_ls_classifier(const std::vector<FingerprintEstimate>& train,
                                        const std::vector<FingerprintEstimate>& val,
                                        const LsClassifierConfig& cfg);

/// Argmax prediction for a batch of estimates under a trained LS classifier.
std::vector<int> ls_classifier_predict(const nn::ModelCheckpoint& ckpt,
                                       const std::vector<FingerprintEstimate>& estimates);

} // namespace csirf
