#pragma once

// Shared test sources. The "bsc example" (constant U, V = X uniform,
// Bob BSC(0.05), Eve BSC(0.25)) is the workhorse configuration; the others
// vary auxiliaries and channels to hit specific structural cases.

#include <vector>

#include "chainpolar/prob.hpp"
#include "chainpolar/rng.hpp"
#include "chainpolar/source_model.hpp"

namespace fixtures {

using chainpolar::JointSource;

// p(u,v,x) for U ~ Bernoulli(bu), V = U xor Bernoulli(a), X = V xor Bernoulli(g).
inline std::vector<double> chain_uvx(double bu, double a, double g) {
    std::vector<double> f(8, 0.0);
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 2; ++x) {
                const double pu = u ? bu : 1.0 - bu;
                const double pv = (v != u) ? a : 1.0 - a;
                const double px = (x != v) ? g : 1.0 - g;
                f[(u * 2 + v) * 2 + x] = pu * pv * px;
            }
    return f;
}

// Constant U = 0, V = X uniform.
inline std::vector<double> const_u_identity_v() {
    std::vector<double> f(8, 0.0);
    f[(0 * 2 + 0) * 2 + 0] = 0.5; // u=0,v=0,x=0
    f[(0 * 2 + 1) * 2 + 1] = 0.5; // u=0,v=1,x=1
    return f;
}

struct Leg {
    int card;
    // p(out | x) for x in {0,1}
    std::vector<double> row0, row1;
};

inline Leg bsc_leg(double p) { return Leg{2, {1 - p, p}, {p, 1 - p}}; }
inline Leg identity_leg() { return bsc_leg(0.0); }
inline Leg pure_noise_leg(int card = 2) {
    Leg l;
    l.card = card;
    l.row0.assign(card, 1.0 / card);
    l.row1 = l.row0;
    return l;
}
// Binary erasure with symbol 2 as the erasure.
inline Leg bec_leg(double eps) { return Leg{3, {1 - eps, 0, eps}, {0, 1 - eps, eps}}; }

inline std::vector<double> product_channel(const Leg& y, const Leg& z) {
    std::vector<double> f(static_cast<std::size_t>(2) * y.card * z.card, 0.0);
    for (int x = 0; x < 2; ++x) {
        const std::vector<double>& ry = x ? y.row1 : y.row0;
        const std::vector<double>& rz = x ? z.row1 : z.row0;
        for (int a = 0; a < y.card; ++a)
            for (int b = 0; b < z.card; ++b)
                f[(static_cast<std::size_t>(x) * y.card + a) * z.card + b] = ry[a] * rz[b];
    }
    return f;
}

inline JointSource make_with_channels(std::vector<double> uvx, const Leg& y, const Leg& z) {
    return chainpolar::make_source(2, 2, 2, y.card, z.card, std::move(uvx), product_channel(y, z));
}

// Bob BSC(0.05), Eve BSC(0.25), constant U, V = X uniform.
inline JointSource bsc_example() {
    return make_with_channels(const_u_identity_v(), bsc_leg(0.05), bsc_leg(0.25));
}

inline JointSource bsc_pair(double bob, double eve) {
    return make_with_channels(const_u_identity_v(), bsc_leg(bob), bsc_leg(eve));
}

// Constant U, V uniform, X = V xor Bernoulli(g): nondegenerate prefixing layer.
inline JointSource prefixed_example(double g, const Leg& y, const Leg& z) {
    return make_with_channels(chain_uvx(0.0, 0.5, g), y, z);
}

// Nondegenerate U with Bob = BEC(eps) and Eve = BSC(q); the erasure/crossover
// pair keeps I(U;Y) <= I(U;Z) while I(V;Y|U) > I(V;Z|U).
inline JointSource mixed_chain_example(double alpha = 0.2, double gamma = 0.0,
                                       double eps = 0.42, double q = 0.1) {
    return make_with_channels(chain_uvx(0.5, alpha, gamma), bec_leg(eps), bsc_leg(q));
}

// Random structurally-valid source for property tests (assumptions may fail).
// p(u,v,x) is drawn as p(u) p(v|u) p(x|v) so the U-V-X chain holds.
inline JointSource random_source(chainpolar::Rng& rng, int card_y = 2, int card_z = 2) {
    const double pu = 0.1 + 0.8 * rng.u01();
    const double pv0 = 0.1 + 0.8 * rng.u01(), pv1 = 0.1 + 0.8 * rng.u01();
    const double px0 = 0.1 + 0.8 * rng.u01(), px1 = 0.1 + 0.8 * rng.u01();
    std::vector<double> uvx(8);
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 2; ++x) {
                const double fu = u ? pu : 1 - pu;
                const double fv = v ? (u ? pv1 : pv0) : (u ? 1 - pv1 : 1 - pv0);
                const double fx = x ? (v ? px1 : px0) : (v ? 1 - px1 : 1 - px0);
                uvx[(u * 2 + v) * 2 + x] = fu * fv * fx;
            }
    std::vector<double> ch(static_cast<std::size_t>(2) * card_y * card_z);
    for (int x = 0; x < 2; ++x) {
        double row = 0.0;
        for (int i = 0; i < card_y * card_z; ++i) {
            ch[static_cast<std::size_t>(x) * card_y * card_z + i] = 0.05 + rng.u01();
            row += ch[static_cast<std::size_t>(x) * card_y * card_z + i];
        }
        for (int i = 0; i < card_y * card_z; ++i) ch[static_cast<std::size_t>(x) * card_y * card_z + i] /= row;
    }
    return chainpolar::make_source(2, 2, 2, card_y, card_z, std::move(uvx), std::move(ch));
}

// Random per-symbol layer model, for SC-vs-brute-force checks.
inline chainpolar::LayerModel random_layer_model(chainpolar::Rng& rng, int side_card,
                                                 bool allow_zeros = false) {
    chainpolar::LayerModel m;
    m.side_card = side_card;
    m.joint.resize(2 * static_cast<std::size_t>(side_card));
    double tot = 0.0;
    for (double& p : m.joint) {
        p = rng.u01();
        if (allow_zeros && rng.u01() < 0.25) p = 0.0;
        tot += p;
    }
    for (double& p : m.joint) p /= tot;
    m.log_joint.resize(m.joint.size());
    for (std::size_t i = 0; i < m.joint.size(); ++i)
        m.log_joint[i] = m.joint[i] > 1e-15 ? std::log(m.joint[i]) : chainpolar::kNegInf;
    return m;
}

} // namespace fixtures
