#include "chainpolar/polarization_sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chainpolar/prob.hpp"
#include "chainpolar/sc_engine.hpp"

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

IndexList threshold_indices(const std::vector<double>& h, double lo) {
    IndexList out;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h[i] > lo) out.push_back(static_cast<int>(i));
    return out;
}

} // namespace

double EntropyProfile::mean() const {
    double s = 0;
    for (double v : entropy) s += v;
    return entropy.empty() ? 0.0 : s / static_cast<double>(entropy.size());
}

namespace {

EntropyProfile exact_profile(const JointSource& src, Layer layer, std::size_t n) {
    if (n > 16) throw std::invalid_argument("estimate_profile: EXACT method requires N <= 16");
    const LayerModel model = layer_model(src, layer);

    EntropyProfile prof;
    prof.layer = layer;
    prof.block_length = n;
    prof.method = ProfileMethod::Exact;
    prof.samples = 0;
    prof.entropy.assign(n, 0.0);
    prof.standard_error.assign(n, 0.0);

    // Depth-first over joint (x^N, s^N) assignments with nonzero weight;
    // each complete assignment contributes p * h_b(posterior_i) at every i.
    std::vector<std::int32_t> side(n, 0);
    BitVector x(n, 0);
    std::vector<std::pair<int, int>> support; // (side, bit) pairs with pj > 0
    for (int s = 0; s < model.side_card; ++s)
        for (int b = 0; b < 2; ++b)
            if (model.pj(s, b) > 0.0) support.emplace_back(s, b);

    std::function<void(std::size_t, double)> rec = [&](std::size_t j, double p) {
        if (j == n) {
            ScContext ctx = make_context(model, side);
            const std::vector<double> h = sc_entropy_pass(ctx, polar_transform(x));
            for (std::size_t i = 0; i < n; ++i) prof.entropy[i] += p * h[i];
            return;
        }
        for (const auto& [s, b] : support) {
            side[j] = s;
            x[j] = static_cast<std::uint8_t>(b);
            rec(j + 1, p * model.pj(s, b));
        }
    };
    rec(0, 1.0);

    for (double& h : prof.entropy) h = std::min(1.0, std::max(0.0, h));
    return prof;
}

EntropyProfile monte_carlo_profile(const JointSource& src, Layer layer, std::size_t n,
                                   std::size_t samples, Rng& rng, int threads) {
    const LayerModel model = layer_model(src, layer);

    EntropyProfile prof;
    prof.layer = layer;
    prof.block_length = n;
    prof.method = ProfileMethod::MonteCarlo;
    prof.samples = samples;
    prof.entropy.assign(n, 0.0);
    prof.standard_error.assign(n, 0.0);

    std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
    double tot_sum = 0.0, tot_sumsq = 0.0;
    std::mutex merge_mutex;

    parallel_chunks(samples, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> lsum(n, 0.0), lsumsq(n, 0.0);
        double ltot = 0.0, ltotsq = 0.0;
        std::vector<std::int32_t> side(n);
        BitVector x(n);
        for (std::size_t t = lo; t < hi; ++t) {
            Rng r = rng.derive(t);
            for (std::size_t j = 0; j < n; ++j) {
                const Tuple5 tup = sample_one(src, r);
                side[j] = layer_side_symbol(src, layer, tup);
                x[j] = static_cast<std::uint8_t>(layer_bit_symbol(layer, tup));
            }
            ScContext ctx = make_context(model, side);
            const std::vector<double> h = sc_entropy_pass(ctx, polar_transform(x));
            double block_total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                lsum[i] += h[i];
                lsumsq[i] += h[i] * h[i];
                block_total += h[i];
            }
            ltot += block_total;
            ltotsq += block_total * block_total;
        }
        std::lock_guard<std::mutex> lock(merge_mutex);
        for (std::size_t i = 0; i < n; ++i) {
            sum[i] += lsum[i];
            sumsq[i] += lsumsq[i];
        }
        tot_sum += ltot;
        tot_sumsq += ltotsq;
    });

    const double m = static_cast<double>(samples);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[i] / m;
        prof.entropy[i] = std::min(1.0, std::max(0.0, mean));
        if (samples > 1) {
            const double var = std::max(0.0, (sumsq[i] - m * mean * mean) / (m - 1.0));
            prof.standard_error[i] = std::sqrt(var / m);
        }
    }
    if (samples > 1) {
        const double tmean = tot_sum / m;
        const double tvar = std::max(0.0, (tot_sumsq - m * tmean * tmean) / (m - 1.0));
        prof.aggregate_se = std::sqrt(tvar / m) / static_cast<double>(n);
    }
    return prof;
}

} // namespace

EntropyProfile estimate_profile(const JointSource& src, Layer layer, std::size_t n,
                                ProfileMethod method, std::size_t samples, Rng& rng, int threads) {
    if (!is_power_of_two(n)) throw std::invalid_argument("estimate_profile: N must be a power of two");
    if (method == ProfileMethod::Exact) return exact_profile(src, layer, n);
    if (samples == 0) throw std::invalid_argument("estimate_profile: Monte Carlo needs samples > 0");
    return monte_carlo_profile(src, layer, n, samples, rng, threads);
}

ProfileSet estimate_all_profiles(const JointSource& src, std::size_t n, ProfileMethod method,
                                 std::size_t samples, Rng& rng, int threads) {
    ProfileSet out;
    const Layer layers[8] = {Layer::U,   Layer::UY,  Layer::UZ, Layer::VU,
                             Layer::VUY, Layer::VUZ, Layer::XV, Layer::XVZ};
    for (int i = 0; i < 8; ++i) {
        Rng sub = rng.derive(0x70f11e00ULL + static_cast<std::uint64_t>(i));
        out.by_layer[static_cast<int>(layers[i])] =
            estimate_profile(src, layers[i], n, method, samples, sub, threads);
    }
    return out;
}

IndexList IndexSetFamily::psi_u1_positions() const { return set_diff(v_u, i_uy); }
IndexList IndexSetFamily::phi_u_positions() const { return set_diff(set_union(h_u_y, h_u_z), v_u); }
IndexList IndexSetFamily::psi_vu_positions() const {
    return set_union(v_v_uy, set_intersect(set_diff(h_v_uy, v_v_uy), v_v_u));
}
IndexList IndexSetFamily::phi_vu_positions() const {
    return set_diff(set_diff(h_v_uy, v_v_uy), v_v_u);
}
IndexList IndexSetFamily::s_first_positions() const { return v_v_uz; }
IndexList IndexSetFamily::s_later_positions() const { return set_diff(v_v_uz, b_v_uy); }
IndexList IndexSetFamily::r_positions() const { return set_diff(v_x_v, v_x_vz); }

std::uint64_t IndexSetFamily::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_u64 = [&h](std::uint64_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (v >> (8 * byte)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    };
    mix_u64(block_length);
    std::uint64_t bb;
    static_assert(sizeof(double) == 8);
    std::memcpy(&bb, &beta, 8);
    mix_u64(bb);
    for (const IndexList* s : {&h_u, &v_u, &h_u_y, &h_u_z, &v_v_u, &v_v_uz, &h_v_uy, &v_v_uy,
                               &m_uvz, &v_x_v, &v_x_vz, &i_uy, &i_uz, &a_uyz, &b_v_uy}) {
        mix_u64(s->size());
        for (int i : *s) mix_u64(static_cast<std::uint64_t>(i));
    }
    return h;
}

IndexSetFamily build_sets(const ProfileSet& profiles, std::size_t n, double beta) {
    if (!(beta > 0.0 && beta < 0.5))
        throw std::invalid_argument("build_sets: beta must lie in (0, 0.5)");
    for (const auto& p : profiles.by_layer)
        if (p.block_length != n)
            throw std::invalid_argument("build_sets: profile block length mismatch");

    IndexSetFamily f;
    f.block_length = n;
    f.beta = beta;
    f.delta = delta_n(n, beta);
    const double hi = f.delta;
    const double vhi = 1.0 - f.delta;

    f.h_u = threshold_indices(profiles.get(Layer::U).entropy, hi);
    f.v_u = threshold_indices(profiles.get(Layer::U).entropy, vhi);
    f.h_u_y = threshold_indices(profiles.get(Layer::UY).entropy, hi);
    f.h_u_z = threshold_indices(profiles.get(Layer::UZ).entropy, hi);
    f.v_v_u = threshold_indices(profiles.get(Layer::VU).entropy, vhi);
    f.v_v_uz = threshold_indices(profiles.get(Layer::VUZ).entropy, vhi);
    f.h_v_uy = threshold_indices(profiles.get(Layer::VUY).entropy, hi);
    f.v_v_uy = threshold_indices(profiles.get(Layer::VUY).entropy, vhi);
    f.v_x_v = threshold_indices(profiles.get(Layer::XV).entropy, vhi);
    f.v_x_vz = threshold_indices(profiles.get(Layer::XVZ).entropy, vhi);

    // Nesting can be violated by Monte-Carlo noise at threshold boundaries;
    // restore it by intersection (a no-op for exact profiles).
    f.v_u = set_intersect(f.v_u, f.h_u);
    f.v_v_uy = set_intersect(f.v_v_uy, f.h_v_uy);
    f.v_v_uz = set_intersect(f.v_v_uz, f.v_v_u);
    f.v_x_vz = set_intersect(f.v_x_vz, f.v_x_v);

    f.m_uvz = set_diff(f.v_v_u, f.v_v_uz);
    f.i_uy = set_diff(f.v_u, f.h_u_y);
    f.i_uz = set_diff(f.v_u, f.h_u_z);

    const IndexList iuz_only = set_diff(f.i_uz, f.i_uy);
    const IndexList iuy_only = set_diff(f.i_uy, f.i_uz);
    if (iuz_only.size() < iuy_only.size()) {
        std::ostringstream os;
        os << "build_sets: infeasible A_UYZ: |I_UZ \\ I_UY| = " << iuz_only.size()
           << " < |I_UY \\ I_UZ| = " << iuy_only.size()
           << " (empirical I(U;Y) <= I(U;Z) violated at N = " << n << ")";
        throw std::runtime_error(os.str());
    }
    f.a_uyz.assign(iuz_only.begin(), iuz_only.begin() + static_cast<std::ptrdiff_t>(iuy_only.size()));

    const std::size_t psi_vu_size = f.psi_vu_positions().size();
    if (f.v_v_uz.size() < psi_vu_size) {
        std::ostringstream os;
        os << "build_sets: infeasible B_{V|UY}: |V_{V|UZ}| = " << f.v_v_uz.size()
           << " < |Psi^{V|U}| = " << psi_vu_size
           << " (secrecy rate nonpositive at N = " << n << ")";
        throw std::runtime_error(os.str());
    }
    f.b_v_uy.assign(f.v_v_uz.begin(), f.v_v_uz.begin() + static_cast<std::ptrdiff_t>(psi_vu_size));

    return f;
}

RateReport rate_report(const IndexSetFamily& f, std::size_t k) {
    if (k < 1) throw std::invalid_argument("rate_report: k must be >= 1");
    RateReport r;
    r.n = f.block_length;
    r.k = k;
    const std::uint64_t kn = static_cast<std::uint64_t>(k) * f.block_length;
    const auto iuy_and_iuz = set_intersect(f.i_uy, f.i_uz);
    const std::uint64_t psi_vu = f.psi_vu_positions().size();
    const std::uint64_t phi_vu = f.phi_vu_positions().size();
    const std::uint64_t psi_u1 = f.psi_u1_positions().size();
    const std::uint64_t phi_u = f.phi_u_positions().size();

    r.num_o = (k - 1) * f.i_uy.size() + iuy_and_iuz.size();
    r.num_s = f.v_v_uz.size() + (k - 1) * (f.v_v_uz.size() - f.b_v_uy.size());
    r.num_m = k * f.m_uvz.size();
    r.num_r = f.v_x_v.size() + (k - 1) * (f.v_x_v.size() - f.v_x_vz.size());
    r.num_seed = psi_vu + k * phi_vu;
    r.num_seed_psi = psi_vu;
    r.num_public = psi_u1 + k * phi_u;

    const double dkn = static_cast<double>(kn);
    r.r_o = static_cast<double>(r.num_o) / dkn;
    r.r_s = static_cast<double>(r.num_s) / dkn;
    r.r_m = static_cast<double>(r.num_m) / dkn;
    r.r_r = static_cast<double>(r.num_r) / dkn;
    r.seed_rate = static_cast<double>(r.num_seed) / dkn;
    r.public_rate = static_cast<double>(r.num_public) / dkn;
    r.seed_psi_term = static_cast<double>(psi_vu) / dkn;
    r.seed_phi_term = static_cast<double>(k * phi_vu) / dkn;
    r.public_psi_term = static_cast<double>(psi_u1) / dkn;
    r.public_phi_term = static_cast<double>(k * phi_u) / dkn;
    r.codebook_common_term = static_cast<double>(psi_u1) / dkn;
    r.sum_om_s = r.r_o + r.r_m + r.r_s;
    r.sum_m_r = r.r_m + r.r_r;
    return r;
}

// --- artifacts ---------------------------------------------------------------

namespace {

constexpr int kProfileArtifactVersion = 1;
constexpr int kFamilyArtifactVersion = 1;

nlohmann::json profile_to_json(const EntropyProfile& p) {
    return nlohmann::json{{"layer", layer_name(p.layer)},
                          {"n", p.block_length},
                          {"method", p.method == ProfileMethod::Exact ? "exact" : "monte_carlo"},
                          {"samples", p.samples},
                          {"entropy", p.entropy},
                          {"aggregate_se", p.aggregate_se},
                          {"standard_error", p.standard_error}};
}

Layer layer_from_name(const std::string& name) {
    const Layer layers[8] = {Layer::U,   Layer::UY,  Layer::UZ, Layer::VU,
                             Layer::VUY, Layer::VUZ, Layer::XV, Layer::XVZ};
    for (Layer l : layers)
        if (name == layer_name(l)) return l;
    throw std::runtime_error("unknown layer name in artifact: " + name);
}

EntropyProfile profile_from_json(const nlohmann::json& j) {
    EntropyProfile p;
    p.layer = layer_from_name(j.at("layer").get<std::string>());
    p.block_length = j.at("n").get<std::size_t>();
    p.method = j.at("method").get<std::string>() == "exact" ? ProfileMethod::Exact
                                                            : ProfileMethod::MonteCarlo;
    p.samples = j.at("samples").get<std::size_t>();
    p.entropy = j.at("entropy").get<std::vector<double>>();
    p.aggregate_se = j.value("aggregate_se", 0.0);
    p.standard_error = j.at("standard_error").get<std::vector<double>>();
    return p;
}

} // namespace

void save_profile_set(const ProfileSet& p, const JointSource& source, const std::string& path) {
    nlohmann::json j;
    j["version"] = kProfileArtifactVersion;
    j["kind"] = "entropy_profiles";
    j["source_hash"] = source.hash();
    j["layers"] = nlohmann::json::array();
    for (const auto& prof : p.by_layer) j["layers"].push_back(profile_to_json(prof));
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write artifact");
    out << j.dump(2) << "\n";
}

std::optional<ProfileSet> load_profile_set(const std::string& path, std::uint64_t source_hash) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
        if (j.at("version").get<int>() != kProfileArtifactVersion) return std::nullopt;
        if (j.at("kind").get<std::string>() != "entropy_profiles") return std::nullopt;
        if (j.at("source_hash").get<std::uint64_t>() != source_hash) return std::nullopt;
        ProfileSet p;
        for (const auto& jp : j.at("layers")) {
            EntropyProfile prof = profile_from_json(jp);
            p.by_layer[static_cast<int>(prof.layer)] = std::move(prof);
        }
        return p;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void save_set_family(const IndexSetFamily& f, const JointSource& source, const std::string& path) {
    nlohmann::json j;
    j["version"] = kFamilyArtifactVersion;
    j["kind"] = "index_set_family";
    j["source_hash"] = source.hash();
    j["n"] = f.block_length;
    j["beta"] = f.beta;
    j["delta"] = f.delta;
    j["sets"] = {{"h_u", f.h_u},       {"v_u", f.v_u},       {"h_u_y", f.h_u_y},
                 {"h_u_z", f.h_u_z},   {"v_v_u", f.v_v_u},   {"v_v_uz", f.v_v_uz},
                 {"h_v_uy", f.h_v_uy}, {"v_v_uy", f.v_v_uy}, {"m_uvz", f.m_uvz},
                 {"v_x_v", f.v_x_v},   {"v_x_vz", f.v_x_vz}, {"i_uy", f.i_uy},
                 {"i_uz", f.i_uz},     {"a_uyz", f.a_uyz},   {"b_v_uy", f.b_v_uy}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write artifact");
    out << j.dump(2) << "\n";
}

std::optional<IndexSetFamily> load_set_family(const std::string& path, std::uint64_t source_hash) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
        if (j.at("version").get<int>() != kFamilyArtifactVersion) return std::nullopt;
        if (j.at("kind").get<std::string>() != "index_set_family") return std::nullopt;
        if (j.at("source_hash").get<std::uint64_t>() != source_hash) return std::nullopt;
        IndexSetFamily f;
        f.block_length = j.at("n").get<std::size_t>();
        f.beta = j.at("beta").get<double>();
        f.delta = j.at("delta").get<double>();
        const auto& s = j.at("sets");
        f.h_u = s.at("h_u").get<IndexList>();
        f.v_u = s.at("v_u").get<IndexList>();
        f.h_u_y = s.at("h_u_y").get<IndexList>();
        f.h_u_z = s.at("h_u_z").get<IndexList>();
        f.v_v_u = s.at("v_v_u").get<IndexList>();
        f.v_v_uz = s.at("v_v_uz").get<IndexList>();
        f.h_v_uy = s.at("h_v_uy").get<IndexList>();
        f.v_v_uy = s.at("v_v_uy").get<IndexList>();
        f.m_uvz = s.at("m_uvz").get<IndexList>();
        f.v_x_v = s.at("v_x_v").get<IndexList>();
        f.v_x_vz = s.at("v_x_vz").get<IndexList>();
        f.i_uy = s.at("i_uy").get<IndexList>();
        f.i_uz = s.at("i_uz").get<IndexList>();
        f.a_uyz = s.at("a_uyz").get<IndexList>();
        f.b_v_uy = s.at("b_v_uy").get<IndexList>();
        return f;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void write_profile_csv(const ProfileSet& p, std::ostream& out, std::uint64_t source_hash,
                       std::uint64_t seed) {
    out << "# source_hash=" << source_hash << " seed=" << seed << "\n";
    out << "layer,index,entropy,standard_error,method,samples\n";
    char buf[64];
    for (const auto& prof : p.by_layer) {
        for (std::size_t i = 0; i < prof.entropy.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g", prof.entropy[i], prof.standard_error[i]);
            out << layer_name(prof.layer) << ',' << i << ',' << buf << ','
                << (prof.method == ProfileMethod::Exact ? "exact" : "monte_carlo") << ','
                << prof.samples << "\n";
        }
    }
}

} // namespace chainpolar
