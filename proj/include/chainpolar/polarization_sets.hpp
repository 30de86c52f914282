#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chainpolar/bits.hpp"
#include "chainpolar/rng.hpp"
#include "chainpolar/source_model.hpp"

namespace chainpolar {

inline double delta_n(std::size_t n, double beta) {
    return std::exp2(-std::pow(static_cast<double>(n), beta));
}

enum class ProfileMethod { Exact, MonteCarlo };

// Per-index conditional-entropy estimates for one polarization layer.
struct EntropyProfile {
    Layer layer = Layer::U;
    std::size_t block_length = 0;
    ProfileMethod method = ProfileMethod::Exact;
    std::size_t samples = 0;           // 0 for exact
    std::vector<double> entropy;       // in [0,1] bits, one per index
    std::vector<double> standard_error; // zero for exact
    // Standard error of mean(); per-index estimates share samples, so this is
    // tracked from the per-sample totals rather than combined per index.
    double aggregate_se = 0.0;

    double mean() const;
    double aggregate_standard_error() const { return aggregate_se; }
};

// Exact enumeration for N <= 16, Monte Carlo otherwise. Both go through the
// SC engine; tests check them against an independent enumeration oracle.
EntropyProfile estimate_profile(const JointSource& s, Layer layer, std::size_t n,
                                ProfileMethod method, std::size_t samples, Rng& rng,
                                int threads = 1);

// Profiles for every layer the set construction needs.
struct ProfileSet {
    std::array<EntropyProfile, 8> by_layer; // indexed by static_cast<int>(Layer)

    const EntropyProfile& get(Layer l) const { return by_layer[static_cast<int>(l)]; }
    EntropyProfile& get(Layer l) { return by_layer[static_cast<int>(l)]; }
    std::size_t block_length() const { return by_layer[0].block_length; }
};

ProfileSet estimate_all_profiles(const JointSource& s, std::size_t n, ProfileMethod method,
                                 std::size_t samples, Rng& rng, int threads = 1);

// Every polarization index set the construction uses, over 0-based indices.
struct IndexSetFamily {
    std::size_t block_length = 0;
    double beta = 0.25;
    double delta = 0.0;

    IndexList h_u, v_u, h_u_y, h_u_z;           // common-message layer
    IndexList v_v_u, v_v_uz, h_v_uy, v_v_uy;    // secret/private layer
    IndexList m_uvz;
    IndexList v_x_v, v_x_vz;                    // prefixing layer

    IndexList i_uy, i_uz;    // information sets V_U \ H_{U|Y}, V_U \ H_{U|Z}
    IndexList a_uyz;         // carried common fragment positions (lowest eligible)
    IndexList b_v_uy;        // seed reinjection positions inside V_{V|UZ}

    // Derived position groups used by the encoders.
    IndexList psi_u1_positions() const;     // V_U \ I_UY
    IndexList phi_u_positions() const;      // (H_{U|Y} u H_{U|Z}) \ V_U
    IndexList psi_vu_positions() const;     // V_{V|UY} u ((H_{V|UY} \ V_{V|UY}) n V_{V|U})
    IndexList phi_vu_positions() const;     // (H_{V|UY} \ V_{V|UY}) \ V_{V|U}
    IndexList s_first_positions() const;    // V_{V|UZ}
    IndexList s_later_positions() const;    // V_{V|UZ} \ B_{V|UY}
    IndexList r_positions() const;          // V_{X|V} \ V_{X|VZ}

    std::uint64_t hash() const;
};

// Applies the strict thresholds (H > delta, H > 1 - delta), derives the
// realignment sets deterministically (lowest indices first) and verifies
// feasibility. Throws std::runtime_error naming the failed inequality.
IndexSetFamily build_sets(const ProfileSet& profiles, std::size_t n, double beta);

// Rates implied by the set sizes for a k-block chain, in bits/channel use.
// Exact integer numerators are kept alongside the floating rates.
struct RateReport {
    std::size_t n = 0;
    std::size_t k = 1;
    double r_o = 0, r_s = 0, r_m = 0, r_r = 0;
    double seed_rate = 0, public_rate = 0;
    double seed_psi_term = 0, seed_phi_term = 0;
    double public_psi_term = 0, public_phi_term = 0;
    double codebook_common_term = 0; // |V_U \ I_UY| / (kN), uniform bits reused k blocks
    double sum_om_s = 0, sum_m_r = 0;
    // integer numerators over denominator k*N
    std::uint64_t num_o = 0, num_s = 0, num_m = 0, num_r = 0, num_seed = 0, num_public = 0;
    std::uint64_t num_seed_psi = 0;
};

RateReport rate_report(const IndexSetFamily& f, std::size_t k);

// --- artifacts ---------------------------------------------------------------

// Versioned JSON serialization for caching expensive constructions.
void save_profile_set(const ProfileSet& p, const JointSource& source, const std::string& path);
std::optional<ProfileSet> load_profile_set(const std::string& path, std::uint64_t source_hash);

void save_set_family(const IndexSetFamily& f, const JointSource& source, const std::string& path);
std::optional<IndexSetFamily> load_set_family(const std::string& path, std::uint64_t source_hash);

// One row per index: layer, index, entropy, standard error.
void write_profile_csv(const ProfileSet& p, std::ostream& out, std::uint64_t source_hash,
                       std::uint64_t seed);

} // namespace chainpolar
