#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chainpolar/bits.hpp"
#include "chainpolar/polarization_sets.hpp"
#include "chainpolar/sc_engine.hpp"
#include "chainpolar/source_model.hpp"

namespace chainpolar {

// Immutable configuration for one k-block chained session.
struct ChainConfig {
    JointSource source;
    IndexSetFamily family;
    std::size_t n = 0;
    std::size_t k = 1;

    // cached per-symbol models
    LayerModel model_u, model_vu, model_xv;       // encoder side
    LayerModel model_uy, model_uz, model_vuy;     // decoder side

    static ChainConfig make(JointSource source, IndexSetFamily family, std::size_t k);

    // Message lengths per block position.
    std::size_t o_len(std::size_t block) const;
    std::size_t s_len(std::size_t block) const;
    std::size_t m_len() const { return family.m_uvz.size(); }
    std::size_t r_len() const { return family.r_positions().size(); }

    // Positions of the reused uniform bits in block `block`'s common rule.
    IndexList psi_u_positions(std::size_t block) const;
    // The corresponding bits, read from psi_u1 (block 0 draws them fresh).
    BitVector psi_u_bits(std::size_t block, const BitVector& psi_u1) const;
};

struct SessionMessages {
    std::vector<BitVector> o, s, m, r; // one entry per block
};

SessionMessages random_messages(const ChainConfig& cfg, Rng& rng);

// Mutable bookkeeping threaded through the k blocks of one session.
struct ChainState {
    BitVector psi_u1;                  // bits at V_U \ I_UY (V_U \ (I_UY n I_UZ) when k = 1)
    BitVector carried_o2;              // previous block's a[I_UY \ I_UZ]
    std::vector<BitVector> phi_u;      // per block
    std::vector<BitVector> psi_vu;     // per block
    std::vector<BitVector> phi_vu;     // per block
    BitVector psi_xv1;                 // bits at V_{X|VZ}, drawn in block 1
    BitVector prev_t_vxvz;             // previous block's t[V_{X|VZ}]
};

struct PublicBundle {
    BitVector psi_u1;
    std::vector<BitVector> phi_u;
    std::size_t bit_count() const;
};

struct SeedBundle {
    BitVector psi_vu_last;
    std::vector<BitVector> phi_vu;
    std::size_t bit_count() const;
};

struct BlockRecord {
    BitVector a, u; // common layer, polarized and raw
    BitVector b, v; // secret/private layer
    BitVector t, x; // prefixing layer
    BitVector o, s, m, r;
    std::vector<std::int32_t> y, z; // filled by the channel simulator
};

struct Transcript {
    std::size_t n = 0;
    std::size_t k = 1;
    std::uint64_t family_hash = 0;
    std::vector<BlockRecord> blocks;
    BitVector psi_u1;
    std::vector<BitVector> phi_u;
    std::vector<BitVector> psi_vu;
    std::vector<BitVector> phi_vu;
    BitVector psi_xv1;

    PublicBundle public_bundle() const;
    SeedBundle seed_bundle() const;

    void save(const std::string& path) const;
    static Transcript load(const std::string& path);
};

// --- block encoders (paper section IV) --------------------------------------

// Rule builders are exposed so tests and the exact-law oracle can inspect the
// exact Fixed/Uniform/ModelSample partition of every block.
IndexRule build_common_rule(const ChainConfig& cfg, std::size_t block, const BitVector& o,
                            const ChainState& state);
IndexRule build_secret_rule(const ChainConfig& cfg, std::size_t block, const BitVector& s,
                            const BitVector& m, const ChainState& state);
IndexRule build_prefix_rule(const ChainConfig& cfg, std::size_t block, const BitVector& r,
                            const ChainState& state);

struct CommonBlockResult {
    BitVector a, u;
};
// Encodes common-message block `block` (0-based). Updates state.psi_u1 (block
// 0), state.carried_o2 and state.phi_u.
CommonBlockResult encode_common_block(const ChainConfig& cfg, std::size_t block,
                                      const BitVector& o, ChainState& state, Rng& rng);

struct SecretBlockResult {
    BitVector b, v;
};
// Encodes the secret/private block given the common layer's raw output.
SecretBlockResult encode_secret_block(const ChainConfig& cfg, std::size_t block,
                                      const BitVector& s, const BitVector& m,
                                      const BitVector& u_raw, ChainState& state, Rng& rng);

struct PrefixBlockResult {
    BitVector t, x;
};
// Channel prefixing: reuses t[V_{X|VZ}] across blocks.
PrefixBlockResult encode_prefix_block(const ChainConfig& cfg, std::size_t block,
                                      const BitVector& r, const BitVector& v_raw,
                                      ChainState& state, Rng& rng);

// Runs all three encoders for every block in order; channel outputs are left
// empty for the channel simulator to fill.
Transcript encode_session(const ChainConfig& cfg, const SessionMessages& msgs, Rng& rng);

// --- decoders ----------------------------------------------------------------

struct BobDecodeResult {
    std::vector<BitVector> o, s, m;
    std::vector<std::uint8_t> block_flagged; // SC failure markers, decoding continues
    bool any_flagged() const;
};

BobDecodeResult bob_decode(const ChainConfig& cfg, const std::vector<std::vector<std::int32_t>>& y_blocks,
                           const PublicBundle& pub, const SeedBundle& seed);

struct EveDecodeResult {
    std::vector<BitVector> o;
    std::vector<std::uint8_t> block_flagged;
    bool any_flagged() const;
};

EveDecodeResult eve_decode(const ChainConfig& cfg, const std::vector<std::vector<std::int32_t>>& z_blocks,
                           const PublicBundle& pub);

// --- message files -----------------------------------------------------------

// Raw bit strings: one line of '0'/'1' characters per block.
void save_message_bits(const std::vector<BitVector>& msgs, const std::string& path);
std::vector<BitVector> load_message_bits(const std::string& path);

} // namespace chainpolar
