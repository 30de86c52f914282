#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "chainpolar/bits.hpp"
#include "chainpolar/prob.hpp"
#include "chainpolar/rng.hpp"
#include "chainpolar/source_model.hpp"

namespace chainpolar {

// Raised when a conditional probability is requested for a prefix that has
// zero probability under the model. Decoders catch it and flag the block.
struct zero_probability_prefix : std::runtime_error {
    zero_probability_prefix() : std::runtime_error("zero-probability prefix under the layer model") {}
};

// One polarization layer instance: the per-symbol joint plus the observed
// side-information sequence. Immutable per block; safe for concurrent reads.
struct ScContext {
    const LayerModel* model = nullptr;
    std::vector<std::int32_t> side; // empty means "no side info" (side symbol 0)

    std::size_t block_length() const { return side.size(); }
};

ScContext make_context(const LayerModel& model, std::vector<std::int32_t> side);

// Per-index action of a stochastic SC encoder.
enum class Action : std::uint8_t { ModelSample = 0, Uniform = 1, Fixed = 2 };

struct IndexRule {
    std::vector<Action> action;
    BitVector fixed_bit; // consulted only where action == Fixed

    explicit IndexRule(std::size_t n) : action(n, Action::ModelSample), fixed_bit(n, 0) {}
    std::size_t size() const { return action.size(); }

    void set_fixed(const IndexList& positions, const BitVector& bits);
    void set_uniform(const IndexList& positions);
};

// Exact conditional probability p(bit_i = 1 | prefix, side info) for the
// polarized sequence of the layer. Throws zero_probability_prefix when the
// prefix is impossible under the model.
double sc_posterior(const ScContext& ctx, const BitVector& prefix, std::size_t index);

struct EncodeResult {
    BitVector polar; // the sampled polarized vector
    BitVector raw;   // polar * G_n, computed in the same pass
};

// Stochastic SC encoding: Fixed copies, Uniform flips a fair coin,
// ModelSample draws from sc_posterior. Indices are processed ascending.
EncodeResult sc_encode(const ScContext& ctx, const IndexRule& rule, Rng& rng);

struct DecodeResult {
    BitVector polar;
    BitVector raw;
    bool failed = false; // a zero-probability prefix was hit and patched with 0
};

// SC decoding: Fixed positions are trusted, all others take the posterior
// argmax with ties broken to 0. Never aborts; failures are flagged.
DecodeResult sc_decode(const ScContext& ctx, const IndexRule& rule);

// One full pass conditioned on a known polarized vector: returns the binary
// entropy of the posterior at every index given the true prefix. Used by the
// Monte-Carlo profile estimator.
std::vector<double> sc_entropy_pass(const ScContext& ctx, const BitVector& polar);

// Generic driver: visit(i, pair) must return the bit to commit at index i.
using ScVisitor = std::function<std::uint8_t(std::size_t, const LogPair&)>;
EncodeResult sc_pass(const ScContext& ctx, const ScVisitor& visit);

} // namespace chainpolar
