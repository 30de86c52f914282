#include <doctest.h>

#include <cmath>

#include "chainpolar/channel_sim.hpp"
#include "support/fixtures.hpp"

using namespace chainpolar;

TEST_CASE("identity channel reproduces the input") {
    auto src = fixtures::make_with_channels(fixtures::const_u_identity_v(),
                                            fixtures::identity_leg(), fixtures::identity_leg());
    auto ch = BroadcastChannel::from_source(src);
    Rng rng(1);
    BitVector x{0, 1, 1, 0, 1};
    auto out = transmit(ch, x, rng);
    for (std::size_t j = 0; j < x.size(); ++j) {
        CHECK(out.y[j] == x[j]);
        CHECK(out.z[j] == x[j]);
    }
}

TEST_CASE("same seed gives identical channel outputs") {
    auto ch = BroadcastChannel::from_source(fixtures::bsc_example());
    BitVector x(64, 1);
    Rng a(9), b(9);
    auto oa = transmit(ch, x, a);
    auto ob = transmit(ch, x, b);
    CHECK(oa.y == ob.y);
    CHECK(oa.z == ob.z);
}

TEST_CASE("BSC crossover frequency is within 3 sigma") {
    auto ch = BroadcastChannel::from_source(fixtures::bsc_pair(0.1, 0.25));
    Rng rng(33);
    const std::size_t n = 100000;
    BitVector x(n, 0);
    auto out = transmit(ch, x, rng);
    std::size_t flips = 0;
    for (auto y : out.y) flips += (y != 0);
    const double phat = static_cast<double>(flips) / n;
    const double sigma = std::sqrt(0.1 * 0.9 / n);
    CHECK(std::fabs(phat - 0.1) < 3 * sigma);
}

TEST_CASE("degraded Eve source keeps the channel normalized") {
    auto src = fixtures::bsc_pair(0.05, 0.2);
    // Garble Z through a further BSC(0.1).
    std::vector<double> g{0.9, 0.1, 0.1, 0.9};
    auto d = degrade_eve(src, g, 2);
    CHECK(validate(d).structural_ok);
    // Composition of BSC(0.2) and BSC(0.1) is BSC(0.2*0.9 + 0.8*0.1 = 0.26).
    CHECK(d.channel(0, 0, 1) == doctest::Approx(0.95 * 0.26).epsilon(1e-12));
}
