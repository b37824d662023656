#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "flexplan/gn_integral.hpp"
#include "flexplan/qot.hpp"

using namespace flexplan;

namespace {

ChannelConfig qpsk35(double f_hz) { return ChannelConfig{f_hz, 35.0, Modulation::QPSK, 100, 0.0}; }

SciComputeFn fixed_sci(double value_dbm) {
    return [value_dbm](const FiberLink&, const ChannelConfig&) { return value_dbm; };
}

GbtModel constant_eta_model(double eta_db) {
    return GbtModel::from_parts(kFeatureWidth, eta_db, 1.0, {});
}

}  // namespace

TEST_CASE("feature vector layout and zero padding") {
    PhysParams phys;
    FiberLink link = phys.make_link(80.0, 12);
    SciCache cache;

    SUBCASE("single channel: neighbor entries all zero") {
        std::vector<ChannelConfig> one = {qpsk35(193.0e12)};
        auto v = features_for("l", link, one, 0, cache, fixed_sci(-61.5));
        CHECK(v[0] == doctest::Approx(-61.5));
        for (int i = 1; i <= 20; ++i) CHECK(v[(std::size_t)i] == 0.0);
        CHECK(v[21] == 0.0);   // 35 GBd -> 0 dBm
        CHECK(v[22] == 1.0);   // N_ch
        CHECK(v[23] == 80.0);  // L_span
        CHECK(v[24] == 12.0);  // N_span
    }

    SUBCASE("two channels 50 GHz apart") {
        std::vector<ChannelConfig> two = {qpsk35(193.0e12), qpsk35(193.05e12)};
        auto v = features_for("l", link, two, 0, cache, fixed_sci(-60.0));
        CHECK(v[11] == doctest::Approx(50.0));
        for (int i = 12; i <= 20; ++i) CHECK(v[(std::size_t)i] == 0.0);
        CHECK(v[22] == 2.0);
    }

    SUBCASE("a 12th-nearest channel does not change the vector") {
        std::vector<ChannelConfig> spectrum;
        for (int i = 0; i < 12; ++i) spectrum.push_back(qpsk35(193.0e12 + 50e9 * i));
        int cut = 6;
        auto before = features_for("l", link, spectrum, cut, cache, fixed_sci(-60.0));
        // appended channel is farther than all ten kept neighbors
        spectrum.push_back(qpsk35(193.0e12 + 50e9 * 20));
        auto after = features_for("l", link, spectrum, cut, cache, fixed_sci(-60.0));
        after[22] = before[22];  // N_ch legitimately changes; all else must not
        CHECK(before == after);
    }

    SUBCASE("cache miss with computation disabled") {
        std::vector<ChannelConfig> one = {qpsk35(193.0e12)};
        SciCache fresh;
        CHECK_THROWS_AS((void)features_for("l", link, one, 0, fresh), SciCacheMissError);
    }
}

TEST_CASE("sci dBm from eta round trip") {
    // eta -20 dB at 0 dBm: P_sci = 10^(-2) * (1e-3)^3 W = -80 dBm... check directly
    double sci = sci_dbm_from_eta(-20.0, 0.0);
    double p_w = 1e-3;
    double expect_w = std::pow(10.0, -20.0 / 10.0) * p_w * p_w * p_w;
    CHECK(sci == doctest::Approx(10.0 * std::log10(expect_w) + 30.0));
}

TEST_CASE("SCI cache semantics") {
    SciCache cache;
    SciKey key{"a-b", 193.0e12, 35.0, 0.0};
    CHECK(!cache.get(key));
    CHECK(cache.misses() == 1);
    cache.put(key, -61.0);
    CHECK(cache.get(key) == doctest::Approx(-61.0));
    CHECK(cache.hits() == 1);
    CHECK(cache.size() == 1);

    SUBCASE("idempotent writes accepted, conflicting writes rejected") {
        cache.put(key, -61.0);
        CHECK(cache.size() == 1);
        CHECK_THROWS_AS(cache.put(key, -50.0), std::logic_error);
    }

    SUBCASE("CSV round trip") {
        cache.put(SciKey{"b-c", 193.05e12, 43.75, 0.9691}, -58.25);
        cache.save("sci_cache_test.csv");
        SciCache loaded = SciCache::load("sci_cache_test.csv");
        CHECK(loaded.size() == 2);
        CHECK(loaded.get(key) == doctest::Approx(-61.0));
        CHECK(loaded.get(SciKey{"b-c", 193.05e12, 43.75, 0.9691}) == doctest::Approx(-58.25));
        std::remove("sci_cache_test.csv");
    }
}

TEST_CASE("GN PCE recomposes exactly from the underlying calls") {
    PhysParams phys;
    GnPce pce(phys);
    FiberLink link = phys.make_link(100.0, 8);

    SUBCASE("empty spectrum -> empty list") {
        CHECK(pce.evaluate("l", link, {}).empty());
        CHECK(pce.name() == "GN");
    }

    SUBCASE("matches the manual composition on random-ish spectra") {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<ChannelConfig> spectrum;
            int n = 2 + trial % 7;
            for (int i = 0; i < n; ++i) {
                double b = i % 2 == 0 ? 35.0 : 43.75;
                spectrum.push_back(ChannelConfig{193.0e12 + 62.5e9 * i, b,
                                                 i % 2 == 0 ? Modulation::QPSK : Modulation::QAM16,
                                                 100, launch_power_for_dbm(b)});
            }
            auto snrs = pce.evaluate("l", link, spectrum);
            REQUIRE(snrs.size() == spectrum.size());
            for (int i = 0; i < n; ++i) {
                NoiseBreakdown nb = gn_closed_eta(link, spectrum, i);
                nb.sigma2_ase_w = ase_variance_w(link, spectrum[(std::size_t)i].bandwidth_hz(),
                                                 phys.ref_frequency_hz);
                double expect = combine_snr_db(spectrum[(std::size_t)i].launch_power_w(), nb);
                CHECK(snrs[(std::size_t)i] == expect);  // same calls, bit-exact
            }
        }
    }
}

TEST_CASE("ML PCE caches SCI per channel identity") {
    PhysParams phys;
    FiberLink link = phys.make_link(100.0, 6);
    GbtModel model = constant_eta_model(25.0);
    SciCache cache;
    MlPce pce(model, cache, phys);

    std::vector<ChannelConfig> spectrum;
    for (int i = 0; i < 5; ++i) spectrum.push_back(qpsk35(193.0e12 + 50e9 * i));

    auto first = pce.evaluate("a-b", link, spectrum);
    REQUIRE(first.size() == 5);
    CHECK(cache.size() == 5);  // one entry per channel identity
    std::uint64_t misses_after_first = cache.misses();

    auto second = pce.evaluate("a-b", link, spectrum);
    CHECK(second == first);
    CHECK(cache.size() == 5);
    CHECK(cache.misses() == misses_after_first);  // pure hits on re-evaluation

    SUBCASE("adding one channel computes exactly one new SCI") {
        spectrum.push_back(qpsk35(193.0e12 + 50e9 * 6));
        (void)pce.evaluate("a-b", link, spectrum);
        CHECK(cache.size() == 6);
        CHECK(cache.misses() == misses_after_first + 1);
    }

    SUBCASE("another link is a distinct identity") {
        (void)pce.evaluate("b-c", link, spectrum);
        CHECK(cache.size() == 10);
    }

    SUBCASE("miss count is order independent") {
        SciCache c1, c2;
        MlPce p1(model, c1, phys), p2(model, c2, phys);
        auto reversed = spectrum;
        std::reverse(reversed.begin(), reversed.end());
        (void)p1.evaluate("x", link, spectrum);
        (void)p2.evaluate("x", link, reversed);
        CHECK(c1.misses() == c2.misses());
        CHECK(c1.size() == c2.size());
    }
}

TEST_CASE("both PCEs share the evaluation interface") {
    PhysParams phys;
    FiberLink link = phys.make_link(80.0, 4);
    GbtModel model = constant_eta_model(22.0);
    SciCache cache;

    std::vector<std::unique_ptr<PathComputationElement>> pces;
    pces.push_back(std::make_unique<GnPce>(phys));
    pces.push_back(std::make_unique<MlPce>(model, cache, phys));

    std::vector<ChannelConfig> spectrum = {qpsk35(193.0e12), qpsk35(193.05e12)};
    for (auto& pce : pces) {
        auto snrs = pce->evaluate("l", link, spectrum);
        CHECK(snrs.size() == spectrum.size());
        for (double s : snrs) {
            CHECK(std::isfinite(s));
            CHECK(s > 0.0);
            CHECK(s < 60.0);
        }
        CHECK(pce->call_count() == 1);
    }
    CHECK(pces[0]->name() == "GN");
    CHECK(pces[1]->name() == "ML");
}

TEST_CASE("ML PCE SNR composes the predicted NLI with analytic ASE") {
    PhysParams phys;
    FiberLink link = phys.make_link(100.0, 10);
    double eta_db = 27.0;
    GbtModel model = constant_eta_model(eta_db);
    SciCache cache;
    MlPce pce(model, cache, phys);

    std::vector<ChannelConfig> one = {qpsk35(193.0e12)};
    auto snrs = pce.evaluate("l", link, one);
    double p = 1e-3;
    double expected_noise =
        ase_variance_w(link, 35e9, phys.ref_frequency_hz) + db_to_lin(eta_db) * p * p * p;
    CHECK(snrs[0] == doctest::Approx(lin_to_db(p / expected_noise)).epsilon(1e-12));

    SUBCASE("model width is validated at construction") {
        GbtModel narrow = GbtModel::from_parts(7, 0.0, 1.0, {});
        SciCache c2;
        CHECK_THROWS_AS(MlPce(narrow, c2, phys), std::invalid_argument);
    }
}
