#include "chainpolar/sc_engine.hpp"

#include <cmath>

namespace chainpolar {

namespace {

std::vector<LogPair> leaf_pairs(const ScContext& ctx) {
    const std::size_t n = ctx.block_length();
    if (!is_power_of_two(n)) throw std::invalid_argument("sc: block length is not a power of two");
    std::vector<LogPair> leaves(n);
    const LayerModel& m = *ctx.model;
    for (std::size_t j = 0; j < n; ++j) {
        const int side = ctx.side[j];
        if (side < 0 || side >= m.side_card) throw std::invalid_argument("sc: side symbol out of range");
        leaves[j] = LogPair{m.lj(side, 0), m.lj(side, 1)};
    }
    return leaves;
}

// Depth-first SC over the halves recursion of G_n: the left child carries the
// XOR of the two half-blocks, the right child the second half given the left.
// Visits polar indices in ascending order and reconstructs raw bits bottom-up.
class ScRunner {
public:
    ScRunner(std::vector<LogPair> leaves, const ScVisitor& visit)
        : n_(leaves.size()), visit_(visit) {
        const int levels = log2_exact(n_) + 1;
        wbuf_.resize(levels);
        lbuf_.resize(levels);
        for (int d = 1; d < levels; ++d) {
            wbuf_[d].resize(n_ >> d);
            lbuf_[d].resize(n_ >> d);
        }
        root_ = std::move(leaves);
        raw_.resize(n_);
        polar_.resize(n_);
    }

    EncodeResult run() {
        next_ = 0;
        node(0, root_.data(), n_, raw_.data());
        return EncodeResult{std::move(polar_), std::move(raw_)};
    }

private:
    void node(int level, LogPair* w, std::size_t m, std::uint8_t* raw_out) {
        if (m == 1) {
            const std::uint8_t bit = visit_(next_, w[0]);
            polar_[next_] = bit;
            raw_out[0] = bit;
            ++next_;
            return;
        }
        const std::size_t h = m / 2;
        LogPair* cw = wbuf_[level + 1].data();
        std::uint8_t* left_raw = lbuf_[level + 1].data();
        for (std::size_t j = 0; j < h; ++j) cw[j] = combine_check(w[j], w[j + h]);
        node(level + 1, cw, h, left_raw);
        for (std::size_t j = 0; j < h; ++j) cw[j] = combine_bit(w[j], w[j + h], left_raw[j]);
        node(level + 1, cw, h, raw_out + h);
        for (std::size_t j = 0; j < h; ++j) raw_out[j] = left_raw[j] ^ raw_out[j + h];
    }

    std::size_t n_;
    const ScVisitor& visit_;
    std::vector<LogPair> root_;
    std::vector<std::vector<LogPair>> wbuf_;
    std::vector<std::vector<std::uint8_t>> lbuf_;
    BitVector raw_;
    BitVector polar_;
    std::size_t next_ = 0;
};

} // namespace

ScContext make_context(const LayerModel& model, std::vector<std::int32_t> side) {
    ScContext ctx;
    ctx.model = &model;
    ctx.side = std::move(side);
    return ctx;
}

void IndexRule::set_fixed(const IndexList& positions, const BitVector& bits) {
    if (positions.size() != bits.size())
        throw std::invalid_argument("IndexRule::set_fixed: positions/bits size mismatch");
    for (std::size_t r = 0; r < positions.size(); ++r) {
        action.at(static_cast<std::size_t>(positions[r])) = Action::Fixed;
        fixed_bit[static_cast<std::size_t>(positions[r])] = bits[r];
    }
}

void IndexRule::set_uniform(const IndexList& positions) {
    for (int p : positions) action.at(static_cast<std::size_t>(p)) = Action::Uniform;
}

EncodeResult sc_pass(const ScContext& ctx, const ScVisitor& visit) {
    ScRunner runner(leaf_pairs(ctx), visit);
    return runner.run();
}

double sc_posterior(const ScContext& ctx, const BitVector& prefix, std::size_t index) {
    const std::size_t n = ctx.block_length();
    if (index >= n) throw std::invalid_argument("sc_posterior: index out of range");
    if (prefix.size() != index) throw std::invalid_argument("sc_posterior: prefix length must equal index");

    std::vector<LogPair> w = leaf_pairs(ctx);
    BitVector pfx = prefix;
    std::size_t m = n;
    std::size_t i = index; // local index within the current node, 0-based
    std::size_t off = 0;   // start of the current node's prefix slice in pfx
    while (m > 1) {
        const std::size_t h = m / 2;
        if (i < h) {
            for (std::size_t j = 0; j < h; ++j) w[j] = combine_check(w[j], w[j + h]);
            m = h;
        } else {
            // The node's left half is fully decided; its raw bits condition the right.
            polar_transform_prefix(pfx.data() + off, h);
            for (std::size_t j = 0; j < h; ++j) w[j] = combine_bit(w[j], w[j + h], pfx[off + j]);
            off += h;
            i -= h;
            m = h;
        }
        w.resize(m);
    }
    if (w[0].dead()) throw zero_probability_prefix{};
    return w[0].p1();
}

EncodeResult sc_encode(const ScContext& ctx, const IndexRule& rule, Rng& rng) {
    if (rule.size() != ctx.block_length())
        throw std::invalid_argument("sc_encode: rule size does not match block length");
    ScVisitor visit = [&](std::size_t i, const LogPair& pair) -> std::uint8_t {
        switch (rule.action[i]) {
            case Action::Fixed: return rule.fixed_bit[i];
            case Action::Uniform: return static_cast<std::uint8_t>(rng.coin());
            case Action::ModelSample: {
                if (pair.dead()) throw zero_probability_prefix{};
                return static_cast<std::uint8_t>(rng.bernoulli(pair.p1()));
            }
        }
        return 0;
    };
    return sc_pass(ctx, visit);
}

DecodeResult sc_decode(const ScContext& ctx, const IndexRule& rule) {
    if (rule.size() != ctx.block_length())
        throw std::invalid_argument("sc_decode: rule size does not match block length");
    DecodeResult out;
    bool failed = false;
    ScVisitor visit = [&](std::size_t i, const LogPair& pair) -> std::uint8_t {
        if (rule.action[i] == Action::Fixed) return rule.fixed_bit[i];
        if (pair.dead()) {
            failed = true;
            return 0;
        }
        return pair.l1 > pair.l0 ? 1 : 0;
    };
    EncodeResult r = sc_pass(ctx, visit);
    out.polar = std::move(r.polar);
    out.raw = std::move(r.raw);
    out.failed = failed;
    return out;
}

std::vector<double> sc_entropy_pass(const ScContext& ctx, const BitVector& polar) {
    if (polar.size() != ctx.block_length())
        throw std::invalid_argument("sc_entropy_pass: vector size does not match block length");
    std::vector<double> h(polar.size(), 0.0);
    ScVisitor visit = [&](std::size_t i, const LogPair& pair) -> std::uint8_t {
        if (pair.dead()) throw zero_probability_prefix{};
        h[i] = binary_entropy(pair.p1());
        return polar[i];
    };
    sc_pass(ctx, visit);
    return h;
}

} // namespace chainpolar
