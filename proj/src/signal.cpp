#include "csirf/signal.hpp"

#include <cmath>

namespace csirf {

void SubcarrierGrid::validate() const {
    if (fft_size < 1) throw config_error("grid: fft_size must be positive");
    if (active_indices.empty()) throw config_error("grid: no active subcarriers");
    for (size_t i = 0; i + 1 < active_indices.size(); ++i) {
        if (active_indices[i] >= active_indices[i + 1])
            throw config_error("grid: active indices must be strictly increasing");
    }
    for (int k : active_indices) {
        if (k == 0) throw config_error("grid: DC bin must be excluded");
    }
    int span = active_indices.back() - active_indices.front();
    if (span >= fft_size) throw config_error("grid: index span exceeds fft size");
    if (sample_period <= 0.0) throw config_error("grid: sample period must be positive");
}

std::shared_ptr<const SubcarrierGrid> SubcarrierGrid::wifi20() {
    static const auto grid = [] {
        auto g = std::make_shared<SubcarrierGrid>();
        g->fft_size = 64;
        g->sample_period = 50e-9;
        for (int k = -26; k <= 26; ++k) {
            if (k != 0) g->active_indices.push_back(k);
        }
        g->validate();
        return std::shared_ptr<const SubcarrierGrid>(g);
    }();
    return grid;
}

CsiVector::CsiVector(GridPtr g, std::vector<cdouble> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw data_error("csi: missing grid");
    if (static_cast<int>(values.size()) != grid->count())
        throw data_error("csi: value count does not match grid");
}

void NoiseSpec::validate() const {
    if (enabled && (snr_db < kMinSnrDb || snr_db > kMaxSnrDb))
        throw config_error("noise: snr_db outside supported range");
}

namespace {

bool all_finite(const std::vector<cdouble>& v) {
    for (const auto& z : v) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

double mean_power(const std::vector<cdouble>& v) {
    double p = 0.0;
    for (const auto& z : v) p += std::norm(z);
    return p / static_cast<double>(v.size());
}

} // namespace

CsiVector compose_csi(const CsiVector& channel_response, const DeviceFingerprint& fp,
                      const NoiseSpec& noise, RandomStream& rng) {
    noise.validate();
    if (!channel_response.grid) throw data_error("compose: channel response has no grid");
    if (fp.deviations.size() != channel_response.values.size())
        throw data_error("compose: fingerprint length does not match grid");
    if (!all_finite(channel_response.values) || !all_finite(fp.deviations))
        throw numeric_error("compose: non-finite input");

    const int n = channel_response.size();
    std::vector<cdouble> out(n);
    for (int k = 0; k < n; ++k)
        out[k] = channel_response.values[k] * (cdouble(1.0, 0.0) + fp.deviations[k]);

    if (noise.enabled) {
        double sigma = std::sqrt(mean_power(out) * std::pow(10.0, -noise.snr_db / 10.0));
        for (int k = 0; k < n; ++k) out[k] += sigma * rng.complex_normal();
    }
    return CsiVector(channel_response.grid, std::move(out));
}

CsiVector add_awgn(const CsiVector& c, const NoiseSpec& noise, RandomStream& rng) {
    noise.validate();
    if (!noise.enabled) return c;
    if (!all_finite(c.values)) throw numeric_error("awgn: non-finite input");

    double p = mean_power(c.values);
    if (p <= 0.0) throw numeric_error("awgn: zero-power input, SNR undefined");

    double sigma = std::sqrt(p * std::pow(10.0, -noise.snr_db / 10.0));
    std::vector<cdouble> out = c.values;
    for (auto& z : out) z += sigma * rng.complex_normal();
    return CsiVector(c.grid, std::move(out));
}

AmpPhaseMatrix amp_phase_split(const CsiVector& c) {
    if (!all_finite(c.values)) throw numeric_error("amp_phase_split: non-finite input");
    AmpPhaseMatrix m;
    const int n = c.size();
    m.amplitude.resize(n);
    m.phase.resize(n);
    for (int k = 0; k < n; ++k) {
        double a = std::abs(c.values[k]);
        m.amplitude[k] = a;
        if (a == 0.0) {
            m.phase[k] = 0.0;
        } else {
            double ph = std::arg(c.values[k]);
            if (ph <= -M_PI) ph = M_PI; // keep the branch at (-pi, pi]
            m.phase[k] = ph;
        }
    }
    return m;
}

CsiVector amp_phase_merge(const AmpPhaseMatrix& m, GridPtr grid) {
    if (m.amplitude.size() != m.phase.size())
        throw data_error("amp_phase_merge: row length mismatch");
    std::vector<cdouble> v(m.amplitude.size());
    for (size_t k = 0; k < v.size(); ++k)
        v[k] = std::polar(m.amplitude[k], m.phase[k]);
    return CsiVector(std::move(grid), std::move(v));
}

} // namespace csirf
