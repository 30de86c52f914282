#include "chainpolar/chain_codec.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace chainpolar {

namespace {

IndexList set_diff(const IndexList& a, const IndexList& b) {
    IndexList out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IndexList set_union(const IndexList& a, const IndexList& b) {
    IndexList out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

IndexList set_intersect(const IndexList& a, const IndexList& b) {
    IndexList out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// rank_in[positions] of each element of sub (sub must be a subset).
std::vector<std::size_t> ranks_in(const IndexList& positions, const IndexList& sub) {
    std::vector<std::size_t> out;
    out.reserve(sub.size());
    for (int p : sub) {
        const auto it = std::lower_bound(positions.begin(), positions.end(), p);
        if (it == positions.end() || *it != p)
            throw std::logic_error("ranks_in: position is not in the reference list");
        out.push_back(static_cast<std::size_t>(it - positions.begin()));
    }
    return out;
}

void check_len(const BitVector& v, std::size_t want, const char* what) {
    if (v.size() != want) {
        std::ostringstream os;
        os << what << ": expected " << want << " bits, got " << v.size();
        throw std::invalid_argument(os.str());
    }
}

std::vector<std::int32_t> side_pair(const BitVector& first, const std::vector<std::int32_t>& second,
                                    int second_card) {
    std::vector<std::int32_t> side(first.size());
    for (std::size_t j = 0; j < first.size(); ++j)
        side[j] = static_cast<std::int32_t>(first[j]) * second_card + second[j];
    return side;
}

std::vector<std::int32_t> side_bits(const BitVector& bits) {
    return std::vector<std::int32_t>(bits.begin(), bits.end());
}

} // namespace

ChainConfig ChainConfig::make(JointSource source, IndexSetFamily family, std::size_t k) {
    if (k < 1) throw std::invalid_argument("ChainConfig: k must be >= 1");
    ChainConfig cfg;
    cfg.n = family.block_length;
    cfg.k = k;
    cfg.model_u = layer_model(source, Layer::U);
    cfg.model_vu = layer_model(source, Layer::VU);
    cfg.model_xv = layer_model(source, Layer::XV);
    cfg.model_uy = layer_model(source, Layer::UY);
    cfg.model_uz = layer_model(source, Layer::UZ);
    cfg.model_vuy = layer_model(source, Layer::VUY);
    cfg.source = std::move(source);
    cfg.family = std::move(family);
    return cfg;
}

std::size_t ChainConfig::o_len(std::size_t block) const {
    if (block + 1 == k) return set_intersect(family.i_uy, family.i_uz).size();
    return family.i_uy.size();
}

std::size_t ChainConfig::s_len(std::size_t block) const {
    if (block == 0) return family.v_v_uz.size();
    return family.s_later_positions().size();
}

IndexList ChainConfig::psi_u_positions(std::size_t block) const {
    const IndexList iuy_and_iuz = set_intersect(family.i_uy, family.i_uz);
    if (k == 1) return set_diff(family.v_u, iuy_and_iuz);
    if (block == 0) return set_diff(family.v_u, family.i_uy);
    if (block + 1 < k) return set_diff(family.v_u, set_union(family.i_uy, family.a_uyz));
    return set_diff(family.v_u, set_union(family.a_uyz, iuy_and_iuz));
}

BitVector ChainConfig::psi_u_bits(std::size_t block, const BitVector& psi_u1) const {
    const IndexList base = psi_u_positions(0);
    check_len(psi_u1, base.size(), "psi_u1");
    const IndexList pos = psi_u_positions(block);
    if (block == 0) return psi_u1;
    if (block + 1 < k) {
        // Middle blocks: positions are a subset of block 1's, matched by index.
        BitVector bits;
        bits.reserve(pos.size());
        for (std::size_t r : ranks_in(base, pos)) bits.push_back(psi_u1[r]);
        return bits;
    }
    // Last block: the whole psi vector re-indexed by the block-k positions.
    check_len(psi_u1, pos.size(), "psi_u1 (block k reuse)");
    return psi_u1;
}

SessionMessages random_messages(const ChainConfig& cfg, Rng& rng) {
    SessionMessages msgs;
    msgs.o.resize(cfg.k);
    msgs.s.resize(cfg.k);
    msgs.m.resize(cfg.k);
    msgs.r.resize(cfg.k);
    for (std::size_t i = 0; i < cfg.k; ++i) {
        msgs.o[i].resize(cfg.o_len(i));
        msgs.s[i].resize(cfg.s_len(i));
        msgs.m[i].resize(cfg.m_len());
        msgs.r[i].resize(cfg.r_len());
        for (auto* v : {&msgs.o[i], &msgs.s[i], &msgs.m[i], &msgs.r[i]})
            for (auto& bit : *v) bit = static_cast<std::uint8_t>(rng.coin());
    }
    return msgs;
}

std::size_t PublicBundle::bit_count() const {
    std::size_t c = psi_u1.size();
    for (const auto& p : phi_u) c += p.size();
    return c;
}

std::size_t SeedBundle::bit_count() const {
    std::size_t c = psi_vu_last.size();
    for (const auto& p : phi_vu) c += p.size();
    return c;
}

PublicBundle Transcript::public_bundle() const { return PublicBundle{psi_u1, phi_u}; }

SeedBundle Transcript::seed_bundle() const {
    return SeedBundle{psi_vu.empty() ? BitVector{} : psi_vu.back(), phi_vu};
}

// --- encoders ----------------------------------------------------------------

IndexRule build_common_rule(const ChainConfig& cfg, std::size_t block, const BitVector& o,
                            const ChainState& state) {
    const IndexSetFamily& f = cfg.family;
    const bool last = block + 1 == cfg.k;
    const IndexList msg_pos = last ? set_intersect(f.i_uy, f.i_uz) : f.i_uy;
    check_len(o, msg_pos.size(), "common message");

    IndexRule rule(cfg.n);
    rule.set_fixed(msg_pos, o);
    if (block > 0) {
        check_len(state.carried_o2, f.a_uyz.size(), "carried o_{i-1,2}");
        rule.set_fixed(f.a_uyz, state.carried_o2);
        rule.set_fixed(cfg.psi_u_positions(block), cfg.psi_u_bits(block, state.psi_u1));
    } else {
        rule.set_uniform(cfg.psi_u_positions(0));
    }
    return rule;
}

IndexRule build_secret_rule(const ChainConfig& cfg, std::size_t block, const BitVector& s,
                            const BitVector& m, const ChainState& state) {
    const IndexSetFamily& f = cfg.family;
    check_len(m, f.m_uvz.size(), "private message");
    IndexRule rule(cfg.n);
    if (block == 0) {
        check_len(s, f.v_v_uz.size(), "secret message (block 1)");
        rule.set_fixed(f.s_first_positions(), s);
    } else {
        check_len(s, f.s_later_positions().size(), "secret message");
        const BitVector& psi_prev = state.psi_vu.at(block - 1);
        check_len(psi_prev, f.b_v_uy.size(), "previous Psi^{V|U}");
        rule.set_fixed(f.s_later_positions(), s);
        rule.set_fixed(f.b_v_uy, psi_prev);
    }
    rule.set_fixed(f.m_uvz, m);
    return rule;
}

IndexRule build_prefix_rule(const ChainConfig& cfg, std::size_t block, const BitVector& r,
                            const ChainState& state) {
    const IndexSetFamily& f = cfg.family;
    check_len(r, f.r_positions().size(), "randomization sequence");
    IndexRule rule(cfg.n);
    rule.set_fixed(f.r_positions(), r);
    if (block == 0) {
        rule.set_uniform(f.v_x_vz);
    } else {
        check_len(state.prev_t_vxvz, f.v_x_vz.size(), "previous t[V_{X|VZ}]");
        rule.set_fixed(f.v_x_vz, state.prev_t_vxvz);
    }
    return rule;
}

CommonBlockResult encode_common_block(const ChainConfig& cfg, std::size_t block,
                                      const BitVector& o, ChainState& state, Rng& rng) {
    const IndexSetFamily& f = cfg.family;
    const bool last = block + 1 == cfg.k;
    IndexRule rule = build_common_rule(cfg, block, o, state);
    ScContext ctx = make_context(cfg.model_u, std::vector<std::int32_t>(cfg.n, 0));
    EncodeResult enc = sc_encode(ctx, rule, rng);

    if (block == 0) state.psi_u1 = extract(enc.polar, cfg.psi_u_positions(0));
    state.carried_o2 = last ? BitVector{} : extract(enc.polar, set_diff(f.i_uy, f.i_uz));
    if (state.phi_u.size() <= block) state.phi_u.resize(cfg.k);
    state.phi_u[block] = extract(enc.polar, f.phi_u_positions());
    return CommonBlockResult{std::move(enc.polar), std::move(enc.raw)};
}

SecretBlockResult encode_secret_block(const ChainConfig& cfg, std::size_t block,
                                      const BitVector& s, const BitVector& m,
                                      const BitVector& u_raw, ChainState& state, Rng& rng) {
    const IndexSetFamily& f = cfg.family;
    check_len(u_raw, cfg.n, "u_raw");
    IndexRule rule = build_secret_rule(cfg, block, s, m, state);
    ScContext ctx = make_context(cfg.model_vu, side_bits(u_raw));
    EncodeResult enc = sc_encode(ctx, rule, rng);

    if (state.psi_vu.size() < cfg.k) state.psi_vu.resize(cfg.k);
    if (state.phi_vu.size() < cfg.k) state.phi_vu.resize(cfg.k);
    state.psi_vu[block] = extract(enc.polar, f.psi_vu_positions());
    state.phi_vu[block] = extract(enc.polar, f.phi_vu_positions());
    return SecretBlockResult{std::move(enc.polar), std::move(enc.raw)};
}

PrefixBlockResult encode_prefix_block(const ChainConfig& cfg, std::size_t block,
                                      const BitVector& r, const BitVector& v_raw,
                                      ChainState& state, Rng& rng) {
    const IndexSetFamily& f = cfg.family;
    check_len(v_raw, cfg.n, "v_raw");
    IndexRule rule = build_prefix_rule(cfg, block, r, state);
    ScContext ctx = make_context(cfg.model_xv, side_bits(v_raw));
    EncodeResult enc = sc_encode(ctx, rule, rng);

    state.prev_t_vxvz = extract(enc.polar, f.v_x_vz);
    if (block == 0) state.psi_xv1 = state.prev_t_vxvz;
    return PrefixBlockResult{std::move(enc.polar), std::move(enc.raw)};
}

Transcript encode_session(const ChainConfig& cfg, const SessionMessages& msgs, Rng& rng) {
    if (msgs.o.size() != cfg.k || msgs.s.size() != cfg.k || msgs.m.size() != cfg.k ||
        msgs.r.size() != cfg.k)
        throw std::invalid_argument("encode_session: message vectors must have k entries");

    Transcript tr;
    tr.n = cfg.n;
    tr.k = cfg.k;
    tr.family_hash = cfg.family.hash();
    tr.blocks.resize(cfg.k);

    ChainState state;
    for (std::size_t i = 0; i < cfg.k; ++i) {
        BlockRecord& blk = tr.blocks[i];
        CommonBlockResult com = encode_common_block(cfg, i, msgs.o[i], state, rng);
        SecretBlockResult sec = encode_secret_block(cfg, i, msgs.s[i], msgs.m[i], com.u, state, rng);
        PrefixBlockResult pre = encode_prefix_block(cfg, i, msgs.r[i], sec.v, state, rng);
        blk.a = std::move(com.a);
        blk.u = std::move(com.u);
        blk.b = std::move(sec.b);
        blk.v = std::move(sec.v);
        blk.t = std::move(pre.t);
        blk.x = std::move(pre.x);
        blk.o = msgs.o[i];
        blk.s = msgs.s[i];
        blk.m = msgs.m[i];
        blk.r = msgs.r[i];
    }
    tr.psi_u1 = state.psi_u1;
    tr.phi_u = state.phi_u;
    tr.psi_vu = state.psi_vu;
    tr.phi_vu = state.phi_vu;
    tr.psi_xv1 = state.psi_xv1;
    return tr;
}

// --- decoders ----------------------------------------------------------------

namespace {

// All (position, bit) pairs a decoder can pin in the common layer of `block`.
void add_known_common_bits(const ChainConfig& cfg, std::size_t block, const PublicBundle& pub,
                           const BitVector* carried_o2, IndexRule& rule) {
    const IndexSetFamily& f = cfg.family;
    rule.set_fixed(cfg.psi_u_positions(block), cfg.psi_u_bits(block, pub.psi_u1));
    rule.set_fixed(f.phi_u_positions(), pub.phi_u.at(block));
    if (block > 0 && carried_o2 != nullptr) rule.set_fixed(f.a_uyz, *carried_o2);
}

} // namespace

bool BobDecodeResult::any_flagged() const {
    for (auto f : block_flagged)
        if (f) return true;
    return false;
}

bool EveDecodeResult::any_flagged() const {
    for (auto f : block_flagged)
        if (f) return true;
    return false;
}

BobDecodeResult bob_decode(const ChainConfig& cfg, const std::vector<std::vector<std::int32_t>>& y_blocks,
                           const PublicBundle& pub, const SeedBundle& seed) {
    if (y_blocks.size() != cfg.k) throw std::invalid_argument("bob_decode: need k blocks of y");
    const IndexSetFamily& f = cfg.family;
    BobDecodeResult out;
    out.o.resize(cfg.k);
    out.s.resize(cfg.k);
    out.m.resize(cfg.k);
    out.block_flagged.assign(cfg.k, 0);

    // Phase 1: forward reconstruction of the common layer from y and the
    // public bundle; carried fragments come from the previous block.
    std::vector<BitVector> u_hat(cfg.k);
    BitVector carried;
    for (std::size_t i = 0; i < cfg.k; ++i) {
        IndexRule rule(cfg.n);
        add_known_common_bits(cfg, i, pub, i > 0 ? &carried : nullptr, rule);
        ScContext ctx = make_context(cfg.model_uy, y_blocks[i]);
        DecodeResult dec = sc_decode(ctx, rule);
        if (dec.failed) out.block_flagged[i] = 1;
        const bool last = i + 1 == cfg.k;
        out.o[i] = extract(dec.polar, last ? set_intersect(f.i_uy, f.i_uz) : f.i_uy);
        carried = extract(dec.polar, set_diff(f.i_uy, f.i_uz));
        u_hat[i] = std::move(dec.raw);
    }

    // Phase 2: backward reconstruction of the secret layer; block k's
    // codebook bits come from the seed, earlier blocks' from the chain.
    BitVector psi = seed.psi_vu_last;
    for (std::size_t idx = cfg.k; idx-- > 0;) {
        IndexRule rule(cfg.n);
        rule.set_fixed(f.psi_vu_positions(), psi);
        rule.set_fixed(f.phi_vu_positions(), seed.phi_vu.at(idx));
        ScContext ctx =
            make_context(cfg.model_vuy, side_pair(u_hat[idx], y_blocks[idx], cfg.source.card_y));
        DecodeResult dec = sc_decode(ctx, rule);
        if (dec.failed) out.block_flagged[idx] = 1;
        out.s[idx] = extract(dec.polar, idx == 0 ? f.s_first_positions() : f.s_later_positions());
        out.m[idx] = extract(dec.polar, f.m_uvz);
        if (idx > 0) psi = extract(dec.polar, f.b_v_uy); // estimate of Psi^{V|U}_{idx-1}
    }
    return out;
}

EveDecodeResult eve_decode(const ChainConfig& cfg, const std::vector<std::vector<std::int32_t>>& z_blocks,
                           const PublicBundle& pub) {
    if (z_blocks.size() != cfg.k) throw std::invalid_argument("eve_decode: need k blocks of z");
    const IndexSetFamily& f = cfg.family;
    EveDecodeResult out;
    out.o.resize(cfg.k);
    out.block_flagged.assign(cfg.k, 0);

    // Backward pass: block k first, then each earlier block once its
    // o_{i,2} copy has been recovered from the successor's A_UYZ slots.
    BitVector carried; // \hat{a}_{i+1}[A_UYZ] = o_{i,2}
    for (std::size_t idx = cfg.k; idx-- > 0;) {
        IndexRule rule(cfg.n);
        rule.set_fixed(cfg.psi_u_positions(idx), cfg.psi_u_bits(idx, pub.psi_u1));
        rule.set_fixed(f.phi_u_positions(), pub.phi_u.at(idx));
        if (idx + 1 < cfg.k) rule.set_fixed(set_diff(f.i_uy, f.i_uz), carried);
        ScContext ctx = make_context(cfg.model_uz, z_blocks[idx]);
        DecodeResult dec = sc_decode(ctx, rule);
        if (dec.failed) out.block_flagged[idx] = 1;
        const bool last = idx + 1 == cfg.k;
        out.o[idx] = extract(dec.polar, last ? set_intersect(f.i_uy, f.i_uz) : f.i_uy);
        carried = extract(dec.polar, f.a_uyz);
    }
    return out;
}

// --- transcript serialization --------------------------------------------------

namespace {

constexpr std::uint32_t kTranscriptMagic = 0x43505452u; // "CPTR"
constexpr std::uint32_t kTranscriptVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("transcript: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void put_bits(std::ostream& out, const BitVector& bits) {
    put_u64(out, bits.size());
    std::vector<unsigned char> packed((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
}

BitVector get_bits(std::istream& in) {
    const std::uint64_t len = get_u64(in);
    std::vector<unsigned char> packed((len + 7) / 8);
    in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (!in) throw std::runtime_error("transcript: truncated bit array");
    BitVector bits(len);
    for (std::size_t i = 0; i < len; ++i) bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
    return bits;
}

void put_symbols(std::ostream& out, const std::vector<std::int32_t>& seq) {
    put_u64(out, seq.size());
    for (std::int32_t v : seq) put_u64(out, static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
}

std::vector<std::int32_t> get_symbols(std::istream& in) {
    const std::uint64_t len = get_u64(in);
    std::vector<std::int32_t> seq(len);
    for (auto& v : seq) v = static_cast<std::int32_t>(static_cast<std::uint32_t>(get_u64(in)));
    return seq;
}

} // namespace

void Transcript::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    put_u64(out, kTranscriptMagic);
    put_u64(out, kTranscriptVersion);
    put_u64(out, n);
    put_u64(out, k);
    put_u64(out, family_hash);
    put_bits(out, psi_u1);
    put_bits(out, psi_xv1);
    put_u64(out, blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const BlockRecord& blk = blocks[i];
        for (const BitVector* v : {&blk.a, &blk.u, &blk.b, &blk.v, &blk.t, &blk.x, &blk.o, &blk.s,
                                   &blk.m, &blk.r})
            put_bits(out, *v);
        put_symbols(out, blk.y);
        put_symbols(out, blk.z);
        put_bits(out, phi_u.at(i));
        put_bits(out, psi_vu.at(i));
        put_bits(out, phi_vu.at(i));
    }
}

Transcript Transcript::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    if (get_u64(in) != kTranscriptMagic) throw std::runtime_error(path + ": not a transcript file");
    if (get_u64(in) != kTranscriptVersion) throw std::runtime_error(path + ": unsupported version");
    Transcript tr;
    tr.n = get_u64(in);
    tr.k = get_u64(in);
    tr.family_hash = get_u64(in);
    tr.psi_u1 = get_bits(in);
    tr.psi_xv1 = get_bits(in);
    const std::uint64_t nblocks = get_u64(in);
    tr.blocks.resize(nblocks);
    tr.phi_u.resize(nblocks);
    tr.psi_vu.resize(nblocks);
    tr.phi_vu.resize(nblocks);
    for (std::size_t i = 0; i < nblocks; ++i) {
        BlockRecord& blk = tr.blocks[i];
        for (BitVector* v : {&blk.a, &blk.u, &blk.b, &blk.v, &blk.t, &blk.x, &blk.o, &blk.s, &blk.m,
                             &blk.r})
            *v = get_bits(in);
        blk.y = get_symbols(in);
        blk.z = get_symbols(in);
        tr.phi_u[i] = get_bits(in);
        tr.psi_vu[i] = get_bits(in);
        tr.phi_vu[i] = get_bits(in);
    }
    return tr;
}

void save_message_bits(const std::vector<BitVector>& msgs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (const auto& m : msgs) {
        for (auto b : m) out << (b ? '1' : '0');
        out << "\n";
    }
}

std::vector<BitVector> load_message_bits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::vector<BitVector> msgs;
    std::string line;
    while (std::getline(in, line)) {
        BitVector m;
        m.reserve(line.size());
        for (char c : line) {
            if (c == '0' || c == '1') m.push_back(static_cast<std::uint8_t>(c - '0'));
            else if (!std::isspace(static_cast<unsigned char>(c)))
                throw std::runtime_error(path + ": message files hold only '0'/'1' characters");
        }
        msgs.push_back(std::move(m));
    }
    return msgs;
}

} // namespace chainpolar
