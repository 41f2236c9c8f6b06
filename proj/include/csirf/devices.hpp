#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csirf/linalg.hpp"
#include "csirf/signal.hpp"

namespace csirf {

enum class FingerprintProfile : uint8_t { Gaussian = 0, Smooth = 1 };

std::string to_string(FingerprintProfile p);
FingerprintProfile profile_from_string(const std::string& s);

/// Synthetic device population standing in for a rack of physical NICs.
/// Fingerprints are fixed at generation time and never mutated.
struct DevicePopulation {
    std::vector<DeviceFingerprint> fingerprints;
    FingerprintProfile profile = FingerprintProfile::Smooth;
    double scale = 0.03;
    int identifiability_order = 9;
    double max_abs_bound = 0.9;
    uint64_t seed = 0;
    GridPtr grid;

    int size() const { return static_cast<int>(fingerprints.size()); }
};

/// Partial-DFT tap basis: one column per delay, evaluated at the grid's
/// active subcarrier indices. Delays are DFT bin indices (mod fft_size), so
/// negative delays are passed as fft_size - d.
CMat tap_basis(const SubcarrierGrid& grid, const std::vector<int>& delays);

/// Delay set whose span a fingerprint must avoid for least-squares channel
/// fitting of order L to leave it untouched: taps 0..L-1 plus the wrap-around
/// taps fft-(L-1)..fft-1. Products of the fingerprint with any channel of
/// order <= L then stay orthogonal to the fitted channel subspace.
std::vector<int> identifiability_delays(const SubcarrierGrid& grid, int order);

/// Removes the orthogonal projection of f onto the span of the given tap
/// basis columns.
std::vector<cdouble> project_out_delays(const std::vector<cdouble>& f,
                                        const SubcarrierGrid& grid,
                                        const std::vector<int>& delays);

/// Draws a device population. Gaussian profile: i.i.d. circular complex
/// normal per subcarrier. Smooth profile: random content on the lowest
/// delays outside the protected identifiability span (slowly varying across
/// subcarriers) plus a small white ripple. Every fingerprint is projected
/// out of the identifiability span and rescaled to RMS = scale.
DevicePopulation generate_population(int n_devices, FingerprintProfile profile, double scale,
                                     int identifiability_order, uint64_t seed,
                                     GridPtr grid = SubcarrierGrid::wifi20(),
                                     double max_abs_bound = 0.9);

/// Minimum over device pairs of the Euclidean distance between fingerprints.
double min_interclass_distance(const DevicePopulation& pop);

/// Binary sidecar (little-endian, magic "CSP1"). Deviations are stored at
/// full f64 precision so regenerated experiments see bit-identical values.
void save_population(const std::string& path, const DevicePopulation& pop);
DevicePopulation load_population(const std::string& path);

uint64_t population_hash(const DevicePopulation& pop);

} // namespace csirf
