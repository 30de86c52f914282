#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chainpolar/rng.hpp"

namespace chainpolar {

// Variable groups for information quantities are bitmasks over {U,V,X,Y,Z}.
enum VarBit : unsigned { VAR_U = 1u, VAR_V = 2u, VAR_X = 4u, VAR_Y = 8u, VAR_Z = 16u };

struct Tuple5 {
    int u, v, x, y, z;
};

// Fixed DMS over (U,V,X,Y,Z) with U - V - X - (Y,Z) by construction:
// pmf(u,v,x,y,z) = factor_uvx(u,v,x) * factor_yz_given_x(y,z|x).
struct JointSource {
    int card_u = 2, card_v = 2, card_x = 2;
    int card_y = 2, card_z = 2;
    std::vector<double> factor_uvx;        // row-major [u][v][x]
    std::vector<double> factor_yz_given_x; // row-major [x][y][z]
    std::vector<double> pmf;               // row-major [u][v][x][y][z]

    double p(int u, int v, int x, int y, int z) const {
        return pmf[(((static_cast<std::size_t>(u) * card_v + v) * card_x + x) * card_y + y) * card_z + z];
    }
    double channel(int x, int y, int z) const {
        return factor_yz_given_x[(static_cast<std::size_t>(x) * card_y + y) * card_z + z];
    }
    std::size_t pmf_size() const {
        return static_cast<std::size_t>(card_u) * card_v * card_x * card_y * card_z;
    }
    // FNV-1a over alphabet sizes and factor table bit patterns.
    std::uint64_t hash() const;
};

// Builds the joint pmf from the two factors; throws on dimension mismatch.
JointSource make_source(int card_u, int card_v, int card_x, int card_y, int card_z,
                        std::vector<double> factor_uvx,
                        std::vector<double> factor_yz_given_x);

struct ValidationReport {
    bool structural_ok = true;  // normalization, nonnegativity, factorization
    bool assumptions_ok = true; // I(V;Y|U) - I(V;Z|U) > 0 and I(U;Y) <= I(U;Z)
    std::vector<std::string> violations;
    bool ok() const { return structural_ok && assumptions_ok; }
};

ValidationReport validate(const JointSource& s);

// Throws std::runtime_error listing the violations unless report.ok().
void require_valid(const JointSource& s);

// H(target | given) in bits by direct summation; groups must not overlap.
double entropy_bits(const JointSource& s, unsigned target, unsigned given = 0);

// I(a ; b | given) in bits; the three groups must be pairwise disjoint.
double mutual_information_bits(const JointSource& s, unsigned a, unsigned b, unsigned given = 0);

struct RateTuple {
    double r_o = 0, r_m = 0, r_s = 0, r_r = 0;
};

// Corner point (R_O, R_M, R_S, R_R) targeted by the chained construction:
// (min[I(U;Y),I(U;Z)], I(V;Z|U), I(V;Y|U)-I(V;Z|U), I(X;Z|V)).
RateTuple theorem1_corner(const JointSource& s);

// i.i.d. samples; same seed gives identical output.
std::vector<Tuple5> sample(const JointSource& s, std::size_t count, Rng& rng);
Tuple5 sample_one(const JointSource& s, Rng& rng);

// --- Per-layer symbol models for the SC engine -----------------------------

enum class Layer { U, UY, UZ, VU, VUY, VUZ, XV, XVZ };

const char* layer_name(Layer layer);
bool layer_is_conditioned(Layer layer);

// Per-symbol joint p(side, bit) driving one polarization layer.
struct LayerModel {
    int side_card = 1;
    std::vector<double> joint;     // [side][bit], bit binary
    std::vector<double> log_joint; // precomputed logs, -inf at zeros

    double pj(int side, int bit) const { return joint[2 * static_cast<std::size_t>(side) + bit]; }
    double lj(int side, int bit) const { return log_joint[2 * static_cast<std::size_t>(side) + bit]; }
    double side_prob(int side) const { return pj(side, 0) + pj(side, 1); }
    // H(bit | side) in bits, per symbol.
    double conditional_entropy() const;
};

LayerModel layer_model(const JointSource& s, Layer layer);

// Side symbol / bit of one sampled tuple under the layer's conditioning.
int layer_side_symbol(const JointSource& s, Layer layer, const Tuple5& t);
int layer_bit_symbol(Layer layer, const Tuple5& t);

// --- Source/channel specification files ------------------------------------
//
// Line-oriented text: `card_u <n>` .. `card_z <n>`, then `factor_uvx` and
// `factor_yz_given_x` each followed by their row-major values. `#` comments.
// Parse errors carry 1-based line numbers.
JointSource parse_source_file(const std::string& path);
JointSource parse_source_stream(std::istream& in, const std::string& name);
void write_source_file(const JointSource& s, const std::string& path);

} // namespace chainpolar
