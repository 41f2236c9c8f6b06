#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "csirf/errors.hpp"
#include "csirf/random.hpp"

namespace csirf {

using cdouble = std::complex<double>;

/// OFDM subcarrier layout. The standard 20 MHz WiFi grid has 52 active
/// subcarriers at indices -26..-1, +1..+26 of a 64-point DFT (DC excluded);
/// toy grids with other sizes are allowed for tests.
struct SubcarrierGrid {
    int fft_size = 64;
    std::vector<int> active_indices;     // signed subcarrier indices, strictly increasing
    double sample_period = 50e-9;        // 50 ns at 20 MHz

    void validate() const;
    int count() const { return static_cast<int>(active_indices.size()); }

    bool operator==(const SubcarrierGrid& o) const {
        return fft_size == o.fft_size && active_indices == o.active_indices &&
               sample_period == o.sample_period;
    }

    /// The 52-subcarrier 20 MHz grid used by the whole pipeline.
    static std::shared_ptr<const SubcarrierGrid> wifi20();
};

using GridPtr = std::shared_ptr<const SubcarrierGrid>;

/// Complex frequency response over the active subcarriers; the unit every
/// pipeline stage consumes and produces.
struct CsiVector {
    GridPtr grid;
    std::vector<cdouble> values;

    CsiVector() = default;
    CsiVector(GridPtr g, std::vector<cdouble> v);

    int size() const { return static_cast<int>(values.size()); }
};

/// Per-device multiplicative deviation vector. Fixed for the lifetime of the
/// device; never mutated after generation.
struct DeviceFingerprint {
    std::vector<cdouble> deviations;
    int device_id = -1;
};

/// Additive noise request in dB. The allowed range when enabled.
struct NoiseSpec {
    double snr_db = 40.0;
    bool enabled = true;

    static constexpr double kMinSnrDb = -10.0;
    static constexpr double kMaxSnrDb = 60.0;

    void validate() const;

    static NoiseSpec off() { return NoiseSpec{0.0, false}; }
    static NoiseSpec at(double snr) { return NoiseSpec{snr, true}; }
};

/// Real-valued network input: row 0 amplitude (linear), row 1 phase in
/// (-pi, pi]. arg(0) is 0 by convention.
struct AmpPhaseMatrix {
    std::vector<double> amplitude;
    std::vector<double> phase;

    int size() const { return static_cast<int>(amplitude.size()); }
};

/// Composite CSI: channel response elementwise times (1 + fingerprint), plus
/// circular complex Gaussian noise calibrated against the noiseless
/// composite's empirical power.
CsiVector compose_csi(const CsiVector& channel_response, const DeviceFingerprint& fp,
                      const NoiseSpec& noise, RandomStream& rng);

/// Adds calibrated noise to an existing CSI vector. A disabled spec is a
/// no-op; a zero-power input makes the requested SNR undefined and throws.
CsiVector add_awgn(const CsiVector& c, const NoiseSpec& noise, RandomStream& rng);

AmpPhaseMatrix amp_phase_split(const CsiVector& c);

/// Inverse of amp_phase_split up to the phase branch cut.
CsiVector amp_phase_merge(const AmpPhaseMatrix& m, GridPtr grid);

} // namespace csirf
