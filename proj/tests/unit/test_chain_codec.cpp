#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <map>

#include "chainpolar/chain_codec.hpp"
#include "chainpolar/channel_sim.hpp"
#include "support/fixtures.hpp"

using namespace chainpolar;

namespace {

// Hand-built family with nonempty realignment sets (A_UYZ, B_{V|UY}) so the
// chaining bookkeeping is exercised even at N = 8.
IndexSetFamily synthetic_family() {
    IndexSetFamily f;
    f.block_length = 8;
    f.beta = 0.25;
    f.delta = delta_n(8, 0.25);
    f.h_u = {0, 1, 2, 3, 4, 5, 6, 7};
    f.v_u = {0, 1, 2, 3, 4, 5};
    f.h_u_y = {0, 1, 2, 6, 7};  // I_UY = {3,4,5}
    f.h_u_z = {0, 3, 4, 6};     // I_UZ = {1,2,5}
    f.i_uy = {3, 4, 5};
    f.i_uz = {1, 2, 5};
    f.a_uyz = {1, 2}; // subset of I_UZ \ I_UY with |I_UY \ I_UZ| = 2 entries
    f.v_v_u = {0, 1, 2, 3, 4, 5, 6};
    f.v_v_uz = {0, 1, 2, 3, 4};
    f.h_v_uy = {0, 1, 5, 7};
    f.v_v_uy = {0, 1};
    f.m_uvz = {5, 6};
    f.b_v_uy = {0, 1, 2}; // |Psi^{V|U}| = |{0,1} u ({5,7} n V_VU)| = 3
    f.v_x_v = {0, 1, 2, 3};
    f.v_x_vz = {0, 1};
    return f;
}

ChainConfig synthetic_config(std::size_t k) {
    // Any binary source works; rules ignore the model except for sampling.
    return ChainConfig::make(fixtures::prefixed_example(0.1, fixtures::bsc_leg(0.05),
                                                        fixtures::bsc_leg(0.25)),
                             synthetic_family(), k);
}

std::vector<std::vector<std::int32_t>> identity_outputs(const Transcript& tr, bool from_x = true) {
    std::vector<std::vector<std::int32_t>> out;
    for (const auto& blk : tr.blocks) {
        const BitVector& src = from_x ? blk.x : blk.x;
        out.emplace_back(src.begin(), src.end());
    }
    return out;
}

} // namespace

TEST_CASE("block rules partition exactly as the case analyses") {
    const std::size_t k = 4;
    auto cfg = synthetic_config(k);
    const auto& f = cfg.family;
    Rng rng(101);
    auto msgs = random_messages(cfg, rng);

    // Run a session to obtain a consistent state trajectory.
    auto tr = encode_session(cfg, msgs, rng);

    ChainState state;
    state.psi_u1 = tr.psi_u1;
    state.psi_vu = tr.psi_vu;
    state.psi_xv1 = tr.psi_xv1;

    for (std::size_t i = 0; i < k; ++i) {
        state.carried_o2 = i > 0 ? extract(tr.blocks[i - 1].a, IndexList{3, 4}) : BitVector{};
        state.prev_t_vxvz = i > 0 ? extract(tr.blocks[i - 1].t, f.v_x_vz) : BitVector{};

        auto common = build_common_rule(cfg, i, msgs.o[i], state);
        std::map<Action, IndexList> got;
        for (std::size_t j = 0; j < 8; ++j) got[common.action[j]].push_back(static_cast<int>(j));

        IndexList fixed_expect;
        if (i + 1 < k) {
            fixed_expect = f.i_uy; // messages
            if (i > 0) {
                for (int p : f.a_uyz) fixed_expect.push_back(p);
                for (int p : cfg.psi_u_positions(i)) fixed_expect.push_back(p);
            }
        } else {
            fixed_expect = {5}; // I_UY n I_UZ
            for (int p : f.a_uyz) fixed_expect.push_back(p);
            for (int p : cfg.psi_u_positions(i)) fixed_expect.push_back(p);
        }
        std::sort(fixed_expect.begin(), fixed_expect.end());
        CHECK(got[Action::Fixed] == fixed_expect);
        if (i == 0) {
            CHECK(got[Action::Uniform] == cfg.psi_u_positions(0));
        } else {
            CHECK(got[Action::Uniform].empty());
        }
        // Everything outside V_U is model-sampled.
        IndexList vu_c;
        std::set_difference(f.h_u.begin(), f.h_u.end(), f.v_u.begin(), f.v_u.end(),
                            std::back_inserter(vu_c));
        CHECK(got[Action::ModelSample] == IndexList{6, 7});

        auto secret = build_secret_rule(cfg, i, msgs.s[i], msgs.m[i], state);
        std::map<Action, IndexList> sgot;
        for (std::size_t j = 0; j < 8; ++j) sgot[secret.action[j]].push_back(static_cast<int>(j));
        IndexList sfix = i == 0 ? f.v_v_uz : IndexList{0, 1, 2, 3, 4}; // B u (V_VUZ \ B) = V_VUZ
        for (int p : f.m_uvz) sfix.push_back(p);
        std::sort(sfix.begin(), sfix.end());
        CHECK(sgot[Action::Fixed] == sfix);
        CHECK(sgot[Action::Uniform].empty());
        CHECK(sgot[Action::ModelSample] == IndexList{7}); // V_{V|U}^c

        auto prefix = build_prefix_rule(cfg, i, msgs.r[i], state);
        std::map<Action, IndexList> pgot;
        for (std::size_t j = 0; j < 8; ++j) pgot[prefix.action[j]].push_back(static_cast<int>(j));
        CHECK(pgot[Action::Fixed] == (i == 0 ? f.r_positions() : f.v_x_v));
        CHECK(pgot[Action::Uniform] == (i == 0 ? f.v_x_vz : IndexList{}));
        CHECK(pgot[Action::ModelSample] == IndexList{4, 5, 6, 7});
    }
}

TEST_CASE("chained fixed bits are copied bit-exactly") {
    const std::size_t k = 4;
    auto cfg = synthetic_config(k);
    const auto& f = cfg.family;
    Rng rng(202);
    auto msgs = random_messages(cfg, rng);
    auto tr = encode_session(cfg, msgs, rng);

    IndexList iuy_only{3, 4};
    IndexList iuy_and_iuz{5};

    for (std::size_t i = 0; i < k; ++i) {
        const auto& blk = tr.blocks[i];
        // Message readback at their positions.
        CHECK(extract(blk.a, i + 1 == k ? iuy_and_iuz : f.i_uy) == msgs.o[i]);
        CHECK(extract(blk.b, i == 0 ? f.s_first_positions() : f.s_later_positions()) == msgs.s[i]);
        CHECK(extract(blk.b, f.m_uvz) == msgs.m[i]);
        CHECK(extract(blk.t, f.r_positions()) == msgs.r[i]);
        // Raw-domain vectors are the transforms.
        CHECK(blk.u == polar_transform(blk.a));
        CHECK(blk.v == polar_transform(blk.b));
        CHECK(blk.x == polar_transform(blk.t));

        if (i > 0) {
            // Carried common fragment and seed reinjection.
            CHECK(extract(blk.a, f.a_uyz) == extract(tr.blocks[i - 1].a, iuy_only));
            CHECK(extract(blk.b, f.b_v_uy) == tr.psi_vu[i - 1]);
            // Prefix codebook bits never change.
            CHECK(extract(blk.t, f.v_x_vz) == extract(tr.blocks[i - 1].t, f.v_x_vz));
        }
        CHECK(extract(blk.t, f.v_x_vz) == tr.psi_xv1);
        // Psi reuse under the per-block mapping.
        CHECK(extract(blk.a, cfg.psi_u_positions(i)) == cfg.psi_u_bits(i, tr.psi_u1));
        // Middle blocks: reuse is the position-aligned restriction of psi_u1.
        if (i > 0 && i + 1 < k) {
            const IndexList base = cfg.psi_u_positions(0);
            for (int p : cfg.psi_u_positions(i)) {
                const auto r = static_cast<std::size_t>(
                    std::lower_bound(base.begin(), base.end(), p) - base.begin());
                CHECK(blk.a[static_cast<std::size_t>(p)] == tr.psi_u1[r]);
            }
        }
        CHECK(tr.phi_u[i] == extract(blk.a, f.phi_u_positions()));
        CHECK(tr.psi_vu[i] == extract(blk.b, f.psi_vu_positions()));
        CHECK(tr.phi_vu[i] == extract(blk.b, f.phi_vu_positions()));
    }

    // Bundle accounting.
    CHECK(tr.public_bundle().bit_count() ==
          cfg.psi_u_positions(0).size() + k * f.phi_u_positions().size());
    CHECK(tr.seed_bundle().bit_count() ==
          f.psi_vu_positions().size() + k * f.phi_vu_positions().size());
}

TEST_CASE("message length errors are rejected") {
    auto cfg = synthetic_config(2);
    Rng rng(7);
    auto msgs = random_messages(cfg, rng);
    ChainState state;
    BitVector bad(msgs.o[0].size() + 1, 0);
    CHECK_THROWS_AS(build_common_rule(cfg, 0, bad, state), std::invalid_argument);
    CHECK_THROWS_AS((void)encode_session(cfg, SessionMessages{}, rng), std::invalid_argument);
}

TEST_CASE("fixed seed gives a bit-identical transcript") {
    auto cfg = synthetic_config(3);
    Rng ra(31), rb(31);
    auto ma = random_messages(cfg, ra);
    auto mb = random_messages(cfg, rb);
    auto ta = encode_session(cfg, ma, ra);
    auto tb = encode_session(cfg, mb, rb);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ta.blocks[i].a == tb.blocks[i].a);
        CHECK(ta.blocks[i].b == tb.blocks[i].b);
        CHECK(ta.blocks[i].t == tb.blocks[i].t);
    }
}

TEST_CASE("noiseless round-trip recovers every message") {
    // Bob sees X exactly; Eve BSC(0.25) keeps the secret/private sets alive.
    auto src = fixtures::make_with_channels(fixtures::const_u_identity_v(),
                                            fixtures::identity_leg(), fixtures::bsc_leg(0.25));
    REQUIRE(validate(src).ok());
    Rng rng(404);
    auto profs = estimate_all_profiles(src, 8, ProfileMethod::Exact, 0, rng);
    auto fam = build_sets(profs, 8, 0.25);
    for (std::size_t k : {1u, 2u, 4u}) {
        auto cfg = ChainConfig::make(src, fam, k);
        REQUIRE(cfg.s_len(0) > 0); // the round-trip moves real secret bits
        for (int trial = 0; trial < 30; ++trial) {
            Rng r(1000 + 17 * static_cast<std::uint64_t>(trial) + k);
            auto msgs = random_messages(cfg, r);
            auto tr = encode_session(cfg, msgs, r);
            // Noiseless Bob channel: y = x symbol-wise.
            std::vector<std::vector<std::int32_t>> y;
            for (const auto& blk : tr.blocks) y.emplace_back(blk.x.begin(), blk.x.end());
            auto dec = bob_decode(cfg, y, tr.public_bundle(), tr.seed_bundle());
            CHECK_FALSE(dec.any_flagged());
            for (std::size_t i = 0; i < k; ++i) {
                CHECK(dec.o[i] == msgs.o[i]);
                CHECK(dec.s[i] == msgs.s[i]);
                CHECK(dec.m[i] == msgs.m[i]);
            }
        }
    }
}

TEST_CASE("noiseless broadcast round-trip for both receivers") {
    // Identity channels to both: all conditioned layers are deterministic,
    // so decoding is exact even though only M survives as a message.
    auto src = fixtures::make_with_channels(fixtures::const_u_identity_v(),
                                            fixtures::identity_leg(), fixtures::identity_leg());
    Rng rng(505);
    auto profs = estimate_all_profiles(src, 8, ProfileMethod::Exact, 0, rng);
    auto fam = build_sets(profs, 8, 0.25);
    for (std::size_t k : {1u, 2u, 4u}) {
        auto cfg = ChainConfig::make(src, fam, k);
        REQUIRE(cfg.m_len() > 0);
        for (int trial = 0; trial < 20; ++trial) {
            Rng r(9000 + 31 * static_cast<std::uint64_t>(trial) + k);
            auto msgs = random_messages(cfg, r);
            auto tr = encode_session(cfg, msgs, r);
            auto outs = identity_outputs(tr);
            auto bob = bob_decode(cfg, outs, tr.public_bundle(), tr.seed_bundle());
            auto eve = eve_decode(cfg, outs, tr.public_bundle());
            for (std::size_t i = 0; i < k; ++i) {
                CHECK(bob.o[i] == msgs.o[i]);
                CHECK(bob.s[i] == msgs.s[i]);
                CHECK(bob.m[i] == msgs.m[i]);
                CHECK(eve.o[i] == msgs.o[i]);
            }
        }
    }
}

TEST_CASE("corrupting the seed bundle flips the last block's secret") {
    auto src = fixtures::bsc_pair(0.02, 0.25);
    Rng rng(606);
    auto profs = estimate_all_profiles(src, 16, ProfileMethod::MonteCarlo, 20000, rng);
    auto fam = build_sets(profs, 16, 0.25);
    const std::size_t k = 2;
    auto cfg = ChainConfig::make(src, fam, k);
    auto ch = BroadcastChannel::from_source(src);

    bool demonstrated = false;
    for (std::uint64_t seed = 0; seed < 60 && !demonstrated; ++seed) {
        Rng r(77000 + seed);
        auto msgs = random_messages(cfg, r);
        auto tr = encode_session(cfg, msgs, r);
        std::vector<std::vector<std::int32_t>> y;
        for (auto& blk : tr.blocks) y.push_back(transmit(ch, blk.x, r).y);
        auto base = bob_decode(cfg, y, tr.public_bundle(), tr.seed_bundle());
        bool base_ok = true;
        for (std::size_t i = 0; i < k; ++i)
            if (base.s[i] != msgs.s[i] || base.m[i] != msgs.m[i]) base_ok = false;
        if (!base_ok) continue;

        auto seedb = tr.seed_bundle();
        for (std::size_t bit = 0; bit < seedb.psi_vu_last.size() && !demonstrated; ++bit) {
            SeedBundle corrupted = seedb;
            corrupted.psi_vu_last[bit] ^= 1;
            auto dec = bob_decode(cfg, y, tr.public_bundle(), corrupted);
            if (dec.s[k - 1] != msgs.s[k - 1]) demonstrated = true;
        }
    }
    CHECK(demonstrated);
}

TEST_CASE("transcript serialization round-trips") {
    auto cfg = synthetic_config(2);
    Rng rng(808);
    auto msgs = random_messages(cfg, rng);
    auto tr = encode_session(cfg, msgs, rng);
    auto ch = BroadcastChannel::from_source(cfg.source);
    for (auto& blk : tr.blocks) {
        auto out = transmit(ch, blk.x, rng);
        blk.y = out.y;
        blk.z = out.z;
    }

    const char* path = "test_transcript.bin";
    tr.save(path);
    auto tr2 = Transcript::load(path);
    CHECK(tr2.n == tr.n);
    CHECK(tr2.k == tr.k);
    CHECK(tr2.family_hash == tr.family_hash);
    CHECK(tr2.psi_u1 == tr.psi_u1);
    CHECK(tr2.psi_xv1 == tr.psi_xv1);
    for (std::size_t i = 0; i < tr.blocks.size(); ++i) {
        CHECK(tr2.blocks[i].a == tr.blocks[i].a);
        CHECK(tr2.blocks[i].t == tr.blocks[i].t);
        CHECK(tr2.blocks[i].y == tr.blocks[i].y);
        CHECK(tr2.blocks[i].z == tr.blocks[i].z);
        CHECK(tr2.phi_vu[i] == tr.phi_vu[i]);
    }
    std::remove(path);
}

TEST_CASE("message bit files round-trip") {
    std::vector<BitVector> msgs{{1, 0, 1}, {}, {0, 0, 1, 1}};
    const char* path = "test_msgs.bits";
    save_message_bits(msgs, path);
    CHECK(load_message_bits(path) == msgs);
    std::remove(path);
}
