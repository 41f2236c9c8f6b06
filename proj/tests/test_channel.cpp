#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "csirf/channel.hpp"

using namespace csirf;

namespace {

// Independent rms-delay-spread computation (second moment about the power
// centroid), kept deliberately separate from the library's implementation.
double oracle_rms_ns(const std::vector<double>& power, double spacing_s) {
    double total = 0.0, first = 0.0, second = 0.0;
    for (size_t l = 0; l < power.size(); ++l) {
        double tau = static_cast<double>(l) * spacing_s;
        total += power[l];
        first += power[l] * tau;
        second += power[l] * tau * tau;
    }
    first /= total;
    second /= total;
    return std::sqrt(second - first * first) * 1e9;
}

// Direct-DFT oracle via complex exponential, not std::polar.
cdouble oracle_dft(const std::vector<cdouble>& taps, int k, int fft) {
    cdouble acc = 0.0;
    const cdouble jw(0.0, -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(fft));
    for (size_t l = 0; l < taps.size(); ++l)
        acc += taps[l] * std::exp(jw * static_cast<double>(l));
    return acc;
}

GridPtr dense_grid_63() {
    auto g = std::make_shared<SubcarrierGrid>();
    g->fft_size = 64;
    g->sample_period = 50e-9;
    for (int k = 1; k <= 63; ++k) g->active_indices.push_back(k);
    g->validate();
    return g;
}

} // namespace

TEST_CASE("presets carry the documented defaults") {
    auto b = ChannelModelSpec::preset(ChannelModel::ModelB, false);
    CHECK(b.num_taps == 9);
    CHECK(b.rms_delay_spread == doctest::Approx(75e-9));
    auto c = ChannelModelSpec::preset(ChannelModel::ModelC, true);
    CHECK(c.num_taps == 14);
    CHECK(c.rms_delay_spread == doctest::Approx(150e-9));
    CHECK(c.los);
    auto d = ChannelModelSpec::preset(ChannelModel::ModelD, false);
    CHECK(d.num_taps == 18);
    CHECK(d.rms_delay_spread == doctest::Approx(250e-9));
    CHECK(b.tap_spacing == doctest::Approx(50e-9));
    CHECK(c.tap_spacing == doctest::Approx(50e-9));
    CHECK(d.tap_spacing == doctest::Approx(50e-9));

    auto six = ChannelModelSpec::standard_six();
    REQUIRE(six.size() == 6);
    CHECK(six[0].tag() == ChannelTag::B_LoS);
    CHECK(six[1].tag() == ChannelTag::B_NLoS);
    CHECK(six[2].tag() == ChannelTag::C_LoS);
    CHECK(six[3].tag() == ChannelTag::C_NLoS);
    CHECK(six[4].tag() == ChannelTag::D_LoS);
    CHECK(six[5].tag() == ChannelTag::D_NLoS);
}

TEST_CASE("tag naming") {
    CHECK(to_string(ChannelTag::B_LoS) == "B-LoS");
    CHECK(to_string(ChannelTag::D_NLoS) == "D-NLoS");
    CHECK(channel_tag(ChannelModel::ModelC, false) == ChannelTag::C_NLoS);
}

TEST_CASE("spec validation rejects bad parameters") {
    auto s = ChannelModelSpec::preset(ChannelModel::ModelB, false);
    CHECK_NOTHROW(s.validate());

    auto bad = s;
    bad.num_taps = 0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad.num_taps = 19;
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = s;
    bad.rms_delay_spread = 0.0;
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = s;
    bad.tap_spacing = -1e-9;
    CHECK_THROWS_AS(bad.validate(), config_error);

    bad = s;
    bad.los = true;
    bad.rician_k_db = std::nan("");
    CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("tap powers are normalized and hit the rms target") {
    for (auto model : {ChannelModel::ModelB, ChannelModel::ModelC, ChannelModel::ModelD}) {
        auto spec = ChannelModelSpec::preset(model, false);
        auto p = tap_powers(spec);
        REQUIRE(static_cast<int>(p.size()) == spec.num_taps);

        double total = 0.0;
        for (double v : p) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

        for (size_t l = 0; l + 1 < p.size(); ++l) CHECK(p[l] >= p[l + 1]);

        CHECK(oracle_rms_ns(p, spec.tap_spacing) ==
              doctest::Approx(spec.rms_delay_spread * 1e9).epsilon(1e-9));
    }
}

TEST_CASE("tap powers edge cases") {
    auto s = ChannelModelSpec::preset(ChannelModel::ModelB, false);
    s.num_taps = 1;
    s.rms_delay_spread = 1e-9;
    auto p = tap_powers(s);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == doctest::Approx(1.0));

    // two taps 50 ns apart max out at 25 ns rms; 100 ns is unreachable
    auto bad = ChannelModelSpec::preset(ChannelModel::ModelB, false);
    bad.num_taps = 2;
    bad.rms_delay_spread = 100e-9;
    CHECK_THROWS_AS(tap_powers(bad), config_error);
}

TEST_CASE("frequency response matches a direct dft") {
    RandomStream rng(17);
    std::vector<cdouble> taps(9);
    for (auto& t : taps) t = rng.complex_normal();

    auto grid = SubcarrierGrid::wifi20();
    auto h = freq_response(taps, grid);
    REQUIRE(h.size() == grid->count());
    for (int i = 0; i < h.size(); ++i) {
        cdouble want = oracle_dft(taps, grid->active_indices[i], grid->fft_size);
        CHECK(std::abs(h.values[i] - want) <= 1e-12);
    }
}

TEST_CASE("single tap responses") {
    auto grid = SubcarrierGrid::wifi20();

    // delta at delay 0: flat all-ones response
    auto flat = freq_response({cdouble(1.0, 0.0)}, grid);
    for (const auto& z : flat.values) CHECK(std::abs(z - cdouble(1.0, 0.0)) <= 1e-14);

    // delta at delay 3: pure phase ramp, unit magnitude
    std::vector<cdouble> taps(4, cdouble(0.0, 0.0));
    taps[3] = cdouble(1.0, 0.0);
    auto ramp = freq_response(taps, grid);
    for (int i = 0; i < ramp.size(); ++i) {
        CHECK(std::abs(ramp.values[i]) == doctest::Approx(1.0));
        double want = -2.0 * M_PI * 3.0 * grid->active_indices[i] / 64.0;
        cdouble wz = std::exp(cdouble(0.0, want));
        CHECK(std::abs(ramp.values[i] - wz) <= 1e-12);
    }
}

TEST_CASE("parseval over the full 64-bin grid") {
    RandomStream rng(23);
    auto dense = dense_grid_63();
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<cdouble> taps(18);
        for (auto& t : taps) t = rng.complex_normal();

        auto h = freq_response(taps, dense);
        cdouble dc = 0.0;      // bin k=0 is just the tap sum
        double tap_power = 0.0;
        for (const auto& t : taps) {
            dc += t;
            tap_power += std::norm(t);
        }
        double grid_power = std::norm(dc);
        for (const auto& z : h.values) grid_power += std::norm(z);
        grid_power /= 64.0;

        CHECK(std::abs(grid_power - tap_power) <= 1e-10 * std::max(1.0, tap_power));
    }
}

TEST_CASE("freq_response input validation") {
    CHECK_THROWS_AS(freq_response({cdouble(1.0, 0.0)}, nullptr), data_error);
    std::vector<cdouble> too_many(65, cdouble(1.0, 0.0));
    CHECK_THROWS_AS(freq_response(too_many, SubcarrierGrid::wifi20()), data_error);
}

TEST_CASE("nlos draws have unit expected power") {
    // 1e5 Model-B NLoS realizations: mean total tap power within 2% of 1.
    auto spec = ChannelModelSpec::preset(ChannelModel::ModelB, false);
    RandomStream rng(31);
    double acc = 0.0;
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) {
        auto ch = sample_channel(spec, rng);
        double p = 0.0;
        for (const auto& t : ch.taps) p += std::norm(t);
        acc += p;
    }
    CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("nlos empirical rms delay spread matches the target") {
    // 1e5 Model-C NLoS realizations: per-tap mean powers reproduce the
    // calibrated profile, so the empirical rms lands within 5% of 150 ns.
    auto spec = ChannelModelSpec::preset(ChannelModel::ModelC, false);
    RandomStream rng(37);
    std::vector<double> mean_power(static_cast<size_t>(spec.num_taps), 0.0);
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) {
        auto ch = sample_channel(spec, rng);
        for (size_t l = 0; l < mean_power.size(); ++l) mean_power[l] += std::norm(ch.taps[l]);
    }
    for (double& v : mean_power) v /= draws;
    CHECK(oracle_rms_ns(mean_power, spec.tap_spacing) == doctest::Approx(150.0).epsilon(0.05));
}

TEST_CASE("los power budget") {
    // Rician split: deterministic k/(k+1) on tap 0 plus diffuse 1/(k+1).
    auto spec = ChannelModelSpec::preset(ChannelModel::ModelB, true);
    REQUIRE(spec.los);
    RandomStream rng(41);
    double acc = 0.0, tap0_mean_re = 0.0;
    const int draws = 50000;
    for (int d = 0; d < draws; ++d) {
        auto ch = sample_channel(spec, rng);
        for (const auto& t : ch.taps) acc += std::norm(t);
        tap0_mean_re += ch.taps[0].real();
    }
    CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.02));

    double k = std::pow(10.0, spec.rician_k_db / 10.0);
    CHECK(tap0_mean_re / draws == doctest::Approx(std::sqrt(k / (k + 1.0))).epsilon(0.02));
}

TEST_CASE("huge rician k degenerates to a deterministic flat channel") {
    auto spec = ChannelModelSpec::preset(ChannelModel::ModelB, true);
    spec.rician_k_db = 300.0;
    RandomStream a(1), b(2);
    auto ca = sample_channel(spec, a);
    auto cb = sample_channel(spec, b);
    for (int l = 0; l < spec.num_taps; ++l)
        CHECK(std::abs(ca.taps[static_cast<size_t>(l)] - cb.taps[static_cast<size_t>(l)]) <= 1e-12);
    CHECK(std::abs(ca.taps[0] - cdouble(1.0, 0.0)) <= 1e-12);
    for (const auto& z : ca.freq_response.values)
        CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fixed seed reproduces the channel bit for bit") {
    auto spec = ChannelModelSpec::preset(ChannelModel::ModelD, false);
    RandomStream a(77, 5), b(77, 5);
    auto ca = sample_channel(spec, a);
    auto cb = sample_channel(spec, b);
    REQUIRE(ca.taps.size() == cb.taps.size());
    for (size_t l = 0; l < ca.taps.size(); ++l) CHECK(ca.taps[l] == cb.taps[l]);
    for (int i = 0; i < ca.freq_response.size(); ++i)
        CHECK(ca.freq_response.values[i] == cb.freq_response.values[i]);
    CHECK(ca.model_tag == ChannelTag::D_NLoS);
}

TEST_CASE("cached response equals a recomputation from the taps") {
    auto spec = ChannelModelSpec::preset(ChannelModel::ModelC, true);
    RandomStream rng(53);
    auto ch = sample_channel(spec, rng);
    auto again = freq_response(ch.taps, SubcarrierGrid::wifi20());
    for (int i = 0; i < again.size(); ++i)
        CHECK(ch.freq_response.values[i] == again.values[i]);
}
