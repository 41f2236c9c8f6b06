#include "csirf/devices.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "csirf/errors.hpp"
#include "csirf/hash.hpp"
#include "csirf/io.hpp"
#include "csirf/random.hpp"

namespace csirf {

namespace {

constexpr char kMagic[5] = "CSP1";
constexpr uint16_t kVersion = 1;

// Smooth-profile shaping: energy concentrated on the first few delays past
// the protected span, with a small white ripple so spectra are not pure
// low-pass. The narrow band keeps the effective dimensionality low, so
// nearest-neighbor pairs sit well inside the distribution's tail, the way
// hardware populations cluster.
constexpr int kSmoothBandWidth = 1;
constexpr double kSmoothBandDecay = 1.0;
constexpr double kSmoothRippleAmp = 0.2;

double rms(const std::vector<cdouble>& v) {
    double acc = 0.0;
    for (const auto& x : v) acc += std::norm(x);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace

std::string to_string(FingerprintProfile p) {
    switch (p) {
        case FingerprintProfile::Gaussian: return "gaussian";
        case FingerprintProfile::Smooth: return "smooth";
    }
    throw config_error("unknown fingerprint profile value");
}

FingerprintProfile profile_from_string(const std::string& s) {
    if (s == "gaussian") return FingerprintProfile::Gaussian;
    if (s == "smooth") return FingerprintProfile::Smooth;
    throw config_error("unknown fingerprint profile: " + s);
}

CMat tap_basis(const SubcarrierGrid& grid, const std::vector<int>& delays) {
    grid.validate();
    if (delays.empty()) throw config_error("tap_basis: empty delay set");
    std::set<int> seen;
    for (int d : delays) {
        if (d < 0 || d >= grid.fft_size)
            throw config_error("tap_basis: delay out of range [0, fft_size)");
        if (!seen.insert(d).second) throw config_error("tap_basis: duplicate delay");
    }
    const int m = grid.count();
    const int n = static_cast<int>(delays.size());
    CMat F(m, n);
    const double w = 2.0 * M_PI / static_cast<double>(grid.fft_size);
    for (int i = 0; i < m; ++i) {
        const double k = static_cast<double>(grid.active_indices[static_cast<size_t>(i)]);
        for (int j = 0; j < n; ++j)
            F(i, j) = std::polar(1.0, -w * k * static_cast<double>(delays[static_cast<size_t>(j)]));
    }
    return F;
}

std::vector<int> identifiability_delays(const SubcarrierGrid& grid, int order) {
    if (order < 1) throw config_error("identifiability order must be >= 1");
    if (2 * order - 1 > grid.count())
        throw config_error("identifiability order too large for subcarrier count");
    std::vector<int> delays;
    for (int l = 0; l < order; ++l) delays.push_back(l);
    for (int l = 1; l < order; ++l) delays.push_back(grid.fft_size - l);
    return delays;
}

std::vector<cdouble> project_out_delays(const std::vector<cdouble>& f, const SubcarrierGrid& grid,
                                        const std::vector<int>& delays) {
    if (static_cast<int>(f.size()) != grid.count())
        throw config_error("project_out_delays: vector/grid size mismatch");
    const CMat F = tap_basis(grid, delays);
    const std::vector<cdouble> coef = qr_solve_ls(F, f);
    std::vector<cdouble> fitted = matvec(F, coef);
    std::vector<cdouble> out(f.size());
    for (size_t i = 0; i < f.size(); ++i) out[i] = f[i] - fitted[i];
    return out;
}

DevicePopulation generate_population(int n_devices, FingerprintProfile profile, double scale,
                                     int identifiability_order, uint64_t seed, GridPtr grid,
                                     double max_abs_bound) {
    if (!grid) throw config_error("generate_population: null grid");
    grid->validate();
    if (n_devices < 2) throw config_error("population needs at least 2 devices");
    if (!(scale >= 0.0 && scale <= 0.2))
        throw config_error("fingerprint scale must lie in [0, 0.2]");
    if (!(max_abs_bound > 0.0)) throw config_error("max_abs_bound must be positive");
    const std::vector<int> protected_delays = identifiability_delays(*grid, identifiability_order);

    const int n_sub = grid->count();
    const int fft = grid->fft_size;
    // Smooth band sits just past the protected span on both delay signs; it
    // must stay clear of the far wrap-around edge.
    const int band_lo = identifiability_order;
    const int band_hi = std::min(band_lo + kSmoothBandWidth, fft / 2);
    if (profile == FingerprintProfile::Smooth && band_hi <= band_lo)
        throw config_error("identifiability order leaves no room for smooth profile band");

    DevicePopulation pop;
    pop.profile = profile;
    pop.scale = scale;
    pop.identifiability_order = identifiability_order;
    pop.max_abs_bound = max_abs_bound;
    pop.seed = seed;
    pop.grid = grid;
    pop.fingerprints.reserve(static_cast<size_t>(n_devices));

    const double w = 2.0 * M_PI / static_cast<double>(fft);
    for (int d = 0; d < n_devices; ++d) {
        RandomStream rng(seed, static_cast<uint64_t>(d));
        std::vector<cdouble> f(static_cast<size_t>(n_sub), cdouble(0.0, 0.0));
        if (profile == FingerprintProfile::Gaussian) {
            for (auto& x : f) x = rng.complex_normal();
        } else {
            for (int l = band_lo; l < band_hi; ++l) {
                const double g = std::exp(-kSmoothBandDecay * static_cast<double>(l - band_lo));
                const cdouble cp = g * rng.complex_normal();
                const cdouble cn = g * rng.complex_normal();
                for (int i = 0; i < n_sub; ++i) {
                    const double k =
                        static_cast<double>(grid->active_indices[static_cast<size_t>(i)]);
                    f[static_cast<size_t>(i)] += cp * std::polar(1.0, -w * k * l);
                    f[static_cast<size_t>(i)] += cn * std::polar(1.0, w * k * l);
                }
            }
            for (auto& x : f) x += kSmoothRippleAmp * rng.complex_normal();
        }

        f = project_out_delays(f, *grid, protected_delays);

        const double r = rms(f);
        if (scale == 0.0 || r == 0.0) {
            std::fill(f.begin(), f.end(), cdouble(0.0, 0.0));
        } else {
            const double gain = scale / r;
            for (auto& x : f) x *= gain;
        }

        for (const auto& x : f)
            if (std::abs(x) > max_abs_bound)
                throw numeric_error("fingerprint modulus exceeds bound for device " +
                                    std::to_string(d));

        pop.fingerprints.push_back(DeviceFingerprint{f, d});
    }
    return pop;
}

double min_interclass_distance(const DevicePopulation& pop) {
    if (pop.size() < 2) throw data_error("min_interclass_distance: need at least 2 devices");
    double best = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < pop.fingerprints.size(); ++a) {
        for (size_t b = a + 1; b < pop.fingerprints.size(); ++b) {
            const auto& fa = pop.fingerprints[a].deviations;
            const auto& fb = pop.fingerprints[b].deviations;
            double acc = 0.0;
            for (size_t i = 0; i < fa.size(); ++i) acc += std::norm(fa[i] - fb[i]);
            best = std::min(best, std::sqrt(acc));
        }
    }
    return best;
}

namespace {

void serialize_population(std::ostream& os, const DevicePopulation& pop) {
    io::write_bytes(os, kMagic, 4);
    io::write_pod<uint16_t>(os, kVersion);
    io::write_pod<uint16_t>(os, static_cast<uint16_t>(pop.size()));
    io::write_pod<uint16_t>(os, static_cast<uint16_t>(pop.grid->count()));
    io::write_pod<uint8_t>(os, static_cast<uint8_t>(pop.profile));
    io::write_pod<uint8_t>(os, 0);
    io::write_pod<uint16_t>(os, static_cast<uint16_t>(pop.identifiability_order));
    io::write_pod<double>(os, pop.scale);
    io::write_pod<double>(os, pop.max_abs_bound);
    io::write_pod<uint64_t>(os, pop.seed);
    io::write_pod<uint16_t>(os, static_cast<uint16_t>(pop.grid->fft_size));
    for (int k : pop.grid->active_indices) io::write_pod<int16_t>(os, static_cast<int16_t>(k));
    for (const auto& dev : pop.fingerprints) {
        io::write_pod<uint16_t>(os, static_cast<uint16_t>(dev.device_id));
        for (const auto& x : dev.deviations) {
            io::write_pod<double>(os, x.real());
            io::write_pod<double>(os, x.imag());
        }
    }
}

} // namespace

void save_population(const std::string& path, const DevicePopulation& pop) {
    if (!pop.grid) throw data_error("save_population: population has no grid");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("cannot open for writing: " + path);
    serialize_population(os, pop);
    if (!os) throw data_error("write failed: " + path);
}

DevicePopulation load_population(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open population file: " + path);
    io::expect_magic(is, kMagic, "population");
    const auto version = io::read_pod<uint16_t>(is, "population version");
    if (version != kVersion)
        throw data_error("population: unsupported version " + std::to_string(version));
    const int n_devices = io::read_pod<uint16_t>(is, "device count");
    const int n_sub = io::read_pod<uint16_t>(is, "subcarrier count");
    const auto profile_raw = io::read_pod<uint8_t>(is, "profile");
    if (profile_raw > 1) throw data_error("population: unknown profile code");
    io::read_pod<uint8_t>(is, "reserved");

    DevicePopulation pop;
    pop.profile = static_cast<FingerprintProfile>(profile_raw);
    pop.identifiability_order = io::read_pod<uint16_t>(is, "identifiability order");
    pop.scale = io::read_pod<double>(is, "scale");
    pop.max_abs_bound = io::read_pod<double>(is, "max_abs_bound");
    pop.seed = io::read_pod<uint64_t>(is, "seed");

    SubcarrierGrid g;
    g.fft_size = io::read_pod<uint16_t>(is, "fft size");
    g.active_indices.resize(static_cast<size_t>(n_sub));
    for (auto& k : g.active_indices) k = io::read_pod<int16_t>(is, "active index");
    g.validate();
    const auto wifi = SubcarrierGrid::wifi20();
    pop.grid = (g == *wifi) ? wifi : std::make_shared<const SubcarrierGrid>(g);

    pop.fingerprints.resize(static_cast<size_t>(n_devices));
    for (auto& dev : pop.fingerprints) {
        dev.device_id = io::read_pod<uint16_t>(is, "device id");
        dev.deviations.resize(static_cast<size_t>(n_sub));
        for (auto& x : dev.deviations) {
            const double re = io::read_pod<double>(is, "deviation");
            const double im = io::read_pod<double>(is, "deviation");
            x = cdouble(re, im);
        }
    }
    if (n_devices < 2) throw data_error("population: fewer than 2 devices");
    return pop;
}

uint64_t population_hash(const DevicePopulation& pop) {
    std::ostringstream ss(std::ios::binary);
    serialize_population(ss, pop);
    const std::string bytes = ss.str();
    return fnv1a64(bytes.data(), bytes.size());
}

} // namespace csirf
