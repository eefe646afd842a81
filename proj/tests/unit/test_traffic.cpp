#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ponmpc/errors.hpp"
#include "ponmpc/traffic.hpp"

using namespace ponmpc;

namespace {

SourceConfig cfg(double hurst, double peak, double load, std::uint64_t seed) {
    SourceConfig c;
    c.hurst = hurst;
    c.peak_bps = peak;
    c.mean_load = load;
    c.packet_bits = 10000;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("shape parameter follows the hurst mapping") {
    CHECK(pareto_shape_for_hurst(0.8) == doctest::Approx(1.4));
    CHECK(pareto_shape_for_hurst(0.5) == doctest::Approx(2.0));
    CHECK(pareto_shape_for_hurst(0.2) == doctest::Approx(2.6));
    CHECK_THROWS_AS(pareto_shape_for_hurst(0.0), InvalidHurstError);
    CHECK_THROWS_AS(pareto_shape_for_hurst(1.0), InvalidHurstError);
    CHECK_THROWS_AS(pareto_shape_for_hurst(-2.0), InvalidHurstError);
}

TEST_CASE("full-load source emits the deterministic per-slot count") {
    OnOffSource src(cfg(0.5, 1e8, 1.0, 1));
    for (int slot = 0; slot < 1000; ++slot)
        CHECK(src.generate(src.clock(), 0.5e-3) == 5);
}

TEST_CASE("identical configs replay identical traces") {
    OnOffSource a(cfg(0.8, 5e7, 0.4, 99));
    OnOffSource b(cfg(0.8, 5e7, 0.4, 99));
    std::vector<double> ta, tb;
    for (int slot = 0; slot < 5000; ++slot) {
        CHECK(a.generate(a.clock(), 0.5e-3, &ta) == b.generate(b.clock(), 0.5e-3, &tb));
    }
    CHECK(ta == tb);

    OnOffSource c(cfg(0.8, 5e7, 0.4, 100));
    std::int64_t diff = 0;
    for (int slot = 0; slot < 5000; ++slot)
        diff += std::llabs(c.generate(c.clock(), 0.5e-3) -
                           a.generate(a.clock(), 0.5e-3));
    CHECK(diff > 0);  // distinct seeds diverge
}

TEST_CASE("long-run rate converges to the configured load") {
    // heavy-tailed case: 2% tolerance over 1e6 slots
    OnOffSource src(cfg(0.8, 1e8, 0.5, 12345));
    std::int64_t total = 0;
    const int slots = 1000000;
    for (int t = 0; t < slots; ++t) total += src.generate(src.clock(), 0.5e-3);
    const double rate_bps = static_cast<double>(total) * 10000.0 / (slots * 0.5e-3);
    CHECK(rate_bps == doctest::Approx(0.5 * 1e8).epsilon(0.02));
}

TEST_CASE("aggregate of sixteen sources meets the configured mean") {
    std::vector<OnOffSource> sources;
    for (int i = 0; i < 16; ++i)
        sources.push_back(OnOffSource(cfg(0.2, 12.5e6, 0.25, 200 + static_cast<std::uint64_t>(i))));
    std::int64_t total = 0;
    const int slots = 100000;
    for (int t = 0; t < slots; ++t) total += arrivals_for_slot(sources, 0.5e-3);
    const double mean = static_cast<double>(total) / slots;
    CHECK(mean == doctest::Approx(2.5).epsilon(0.05));  // 50 Mbps aggregate
}

TEST_CASE("zero sources produce zero arrivals") {
    std::vector<OnOffSource> none;
    CHECK(arrivals_for_slot(none, 0.5e-3) == 0);
}

TEST_CASE("one always-on source fills each slot") {
    std::vector<OnOffSource> sources{OnOffSource(cfg(0.5, 1e8, 1.0, 5))};
    for (int t = 0; t < 100; ++t) CHECK(arrivals_for_slot(sources, 0.5e-3) == 5);
}

TEST_CASE("higher hurst gives burstier counts at equal load") {
    auto dispersion = [](double hurst, std::uint64_t seed) {
        OnOffSource src(cfg(hurst, 2e8, 0.3, seed));
        const int slots = 200000;
        double sum = 0.0, sumsq = 0.0;
        for (int t = 0; t < slots; ++t) {
            const double n = static_cast<double>(src.generate(src.clock(), 0.5e-3));
            sum += n;
            sumsq += n * n;
        }
        const double mean = sum / slots;
        const double var = sumsq / slots - mean * mean;
        return var / mean;
    };
    CHECK(dispersion(0.8, 31) > dispersion(0.5, 31));
    CHECK(dispersion(0.8, 77) > dispersion(0.5, 77));
}

TEST_CASE("arrival timestamps stay inside their slot") {
    OnOffSource src(cfg(0.7, 8e7, 0.6, 11));
    for (int t = 0; t < 20000; ++t) {
        const double t0 = src.clock();
        std::vector<double> times;
        src.generate(t0, 0.5e-3, &times);
        for (double ts : times) {
            CHECK(ts >= t0 - 1e-12);
            CHECK(ts <= t0 + 0.5e-3 + 1e-12);
        }
    }
}

TEST_CASE("trace csv round-trips") {
    ArrivalTrace trace;
    trace.counts = {{{3, 0}, {0, 2}}, {{0, 0}, {1, 7}}};
    std::stringstream ss;
    write_trace_csv(ss, trace);
    const ArrivalTrace back = read_trace_csv(ss, 2, 2);
    CHECK(back.counts == trace.counts);
}

TEST_CASE("trace csv rejects malformed input") {
    std::stringstream ss("slot,onu,class,packets\n0,5,0,3\n");
    CHECK_THROWS_AS(read_trace_csv(ss, 2, 2), Error);
}
