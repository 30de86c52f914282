#include "chainpolar/channel_sim.hpp"

#include <stdexcept>

namespace chainpolar {

BroadcastChannel BroadcastChannel::from_source(const JointSource& s) {
    BroadcastChannel ch;
    ch.card_x = s.card_x;
    ch.card_y = s.card_y;
    ch.card_z = s.card_z;
    ch.yz_given_x = s.factor_yz_given_x;
    return ch;
}

ChannelOutput transmit(const BroadcastChannel& ch, const BitVector& x, Rng& rng) {
    ChannelOutput out;
    out.y.resize(x.size());
    out.z.resize(x.size());
    const int cells = ch.card_y * ch.card_z;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] > 1 || ch.card_x != 2) throw std::invalid_argument("transmit: binary input expected");
        const double* row = ch.yz_given_x.data() + static_cast<std::size_t>(x[j]) * cells;
        const int yz = rng.categorical(row, cells);
        out.y[j] = yz / ch.card_z;
        out.z[j] = yz % ch.card_z;
    }
    return out;
}

JointSource degrade_eve(const JointSource& s, const std::vector<double>& garble, int card_z_out) {
    if (garble.size() != static_cast<std::size_t>(s.card_z) * card_z_out)
        throw std::invalid_argument("degrade_eve: garbling map has wrong shape");
    std::vector<double> yz(static_cast<std::size_t>(s.card_x) * s.card_y * card_z_out, 0.0);
    for (int x = 0; x < s.card_x; ++x)
        for (int y = 0; y < s.card_y; ++y)
            for (int z = 0; z < s.card_z; ++z) {
                const double pz = s.channel(x, y, z);
                for (int zp = 0; zp < card_z_out; ++zp)
                    yz[(static_cast<std::size_t>(x) * s.card_y + y) * card_z_out + zp] +=
                        pz * garble[static_cast<std::size_t>(z) * card_z_out + zp];
            }
    return make_source(s.card_u, s.card_v, s.card_x, s.card_y, card_z_out, s.factor_uvx,
                       std::move(yz));
}

} // namespace chainpolar
