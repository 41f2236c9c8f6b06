#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csirf/signal.hpp"

namespace csirf {

enum class ChannelModel : uint8_t { ModelB = 0, ModelC = 1, ModelD = 2 };

/// Channel condition tag carried by every dataset record: model x LoS/NLoS.
enum class ChannelTag : uint8_t {
    B_LoS = 0, B_NLoS = 1, C_LoS = 2, C_NLoS = 3, D_LoS = 4, D_NLoS = 5,
};

std::string to_string(ChannelTag tag);
ChannelTag channel_tag(ChannelModel model, bool los);

/// Tapped-delay-line model parameters. Defaults follow the common indoor
/// characterizations at 20 MHz: Model-B 9 taps / 15 ns rms, Model-C 14 / 30,
/// Model-D 18 / 50, tap spacing 50 ns, LoS Rician K = 3 dB. Everything is
/// configurable; none of it claims parity with any external toolbox.
struct ChannelModelSpec {
    ChannelModel name = ChannelModel::ModelB;
    bool los = false;
    int num_taps = 9;
    double rms_delay_spread = 70e-9;
    double rician_k_db = 3.0;       // LoS only
    double tap_spacing = 50e-9;

    static constexpr int kMaxTaps = 18; // << fft_size 64

    void validate() const;
    ChannelTag tag() const { return channel_tag(name, los); }

    static ChannelModelSpec preset(ChannelModel model, bool los);
    static std::vector<ChannelModelSpec> standard_six();
};

/// One channel realization: time-domain taps (tap 0 at delay 0) plus the
/// cached frequency response on the active subcarrier grid.
struct MultipathChannel {
    std::vector<cdouble> taps;
    CsiVector freq_response;
    ChannelTag model_tag = ChannelTag::B_NLoS;
};

/// Expected per-tap powers: exponential profile calibrated so the discrete
/// truncated profile's rms delay spread equals spec.rms_delay_spread,
/// normalized to total power 1.
std::vector<double> tap_powers(const ChannelModelSpec& spec);

/// Partial DFT of the taps evaluated at the grid's active indices:
/// H[k] = sum_l taps[l] * exp(-j 2 pi k l / fft_size).
CsiVector freq_response(const std::vector<cdouble>& taps, GridPtr grid);

/// Draws one channel realization. NLoS taps are circular complex Gaussian
/// with the calibrated power profile; LoS adds a deterministic component on
/// tap 0 carrying k/(k+1) of the total power (k from rician_k_db), with the
/// diffuse profile scaled by 1/(k+1). Expected total power is 1 either way.
MultipathChannel sample_channel(const ChannelModelSpec& spec, RandomStream& rng,
                                GridPtr grid = SubcarrierGrid::wifi20());

/// Composite CSI for a sampled channel (overload over the cached response).
inline CsiVector compose_csi(const MultipathChannel& channel, const DeviceFingerprint& fp,
                             const NoiseSpec& noise, RandomStream& rng) {
    return compose_csi(channel.freq_response, fp, noise, rng);
}

} // namespace csirf
