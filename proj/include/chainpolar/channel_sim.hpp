#pragma once

#include <cstdint>
#include <vector>

#include "chainpolar/bits.hpp"
#include "chainpolar/rng.hpp"
#include "chainpolar/source_model.hpp"

namespace chainpolar {

// Memoryless broadcast sampler for p_{YZ|X}. Y and Z are drawn jointly per
// symbol, so correlated outputs are preserved.
struct BroadcastChannel {
    int card_x = 2, card_y = 2, card_z = 2;
    std::vector<double> yz_given_x; // row-major [x][y][z]

    static BroadcastChannel from_source(const JointSource& s);

    double p(int x, int y, int z) const {
        return yz_given_x[(static_cast<std::size_t>(x) * card_y + y) * card_z + z];
    }
};

struct ChannelOutput {
    std::vector<std::int32_t> y, z;
};

ChannelOutput transmit(const BroadcastChannel& ch, const BitVector& x, Rng& rng);

// Stochastically degraded eavesdropper: returns a source whose Z is passed
// through the garbling map q(z'|z) (row-major [z][z']). Used for the
// data-processing monotonicity check.
JointSource degrade_eve(const JointSource& s, const std::vector<double>& garble, int card_z_out);

} // namespace chainpolar
