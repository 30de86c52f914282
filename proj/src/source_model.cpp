#include "chainpolar/source_model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "chainpolar/prob.hpp"

namespace chainpolar {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kFactorTol = 1e-12;

int var_card(const JointSource& s, unsigned bit) {
    switch (bit) {
        case VAR_U: return s.card_u;
        case VAR_V: return s.card_v;
        case VAR_X: return s.card_x;
        case VAR_Y: return s.card_y;
        case VAR_Z: return s.card_z;
        default: throw std::invalid_argument("var_card: not a single variable");
    }
}

// Marginal distribution of the variables in `mask`, flattened row-major
// in the order U,V,X,Y,Z restricted to the mask.
std::vector<double> marginal(const JointSource& s, unsigned mask) {
    std::size_t cells = 1;
    for (unsigned b : {VAR_U, VAR_V, VAR_X, VAR_Y, VAR_Z})
        if (mask & b) cells *= static_cast<std::size_t>(var_card(s, b));
    std::vector<double> out(cells, 0.0);
    for (int u = 0; u < s.card_u; ++u)
        for (int v = 0; v < s.card_v; ++v)
            for (int x = 0; x < s.card_x; ++x)
                for (int y = 0; y < s.card_y; ++y)
                    for (int z = 0; z < s.card_z; ++z) {
                        std::size_t idx = 0;
                        if (mask & VAR_U) idx = idx * s.card_u + u;
                        if (mask & VAR_V) idx = idx * s.card_v + v;
                        if (mask & VAR_X) idx = idx * s.card_x + x;
                        if (mask & VAR_Y) idx = idx * s.card_y + y;
                        if (mask & VAR_Z) idx = idx * s.card_z + z;
                        out[idx] += s.p(u, v, x, y, z);
                    }
    return out;
}

double entropy_of_table(const std::vector<double>& p) {
    double h = 0.0;
    for (double q : p)
        if (q > 1e-15) h -= q * std::log2(q);
    return h;
}

} // namespace

std::uint64_t JointSource::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const int cards[5] = {card_u, card_v, card_x, card_y, card_z};
    mix(cards, sizeof cards);
    mix(factor_uvx.data(), factor_uvx.size() * sizeof(double));
    mix(factor_yz_given_x.data(), factor_yz_given_x.size() * sizeof(double));
    return h;
}

JointSource make_source(int card_u, int card_v, int card_x, int card_y, int card_z,
                        std::vector<double> factor_uvx,
                        std::vector<double> factor_yz_given_x) {
    JointSource s;
    s.card_u = card_u;
    s.card_v = card_v;
    s.card_x = card_x;
    s.card_y = card_y;
    s.card_z = card_z;
    const std::size_t want_uvx = static_cast<std::size_t>(card_u) * card_v * card_x;
    const std::size_t want_yz = static_cast<std::size_t>(card_x) * card_y * card_z;
    if (factor_uvx.size() != want_uvx)
        throw std::invalid_argument("make_source: factor_uvx size mismatch");
    if (factor_yz_given_x.size() != want_yz)
        throw std::invalid_argument("make_source: factor_yz_given_x size mismatch");
    s.factor_uvx = std::move(factor_uvx);
    s.factor_yz_given_x = std::move(factor_yz_given_x);
    s.pmf.assign(s.pmf_size(), 0.0);
    for (int u = 0; u < card_u; ++u)
        for (int v = 0; v < card_v; ++v)
            for (int x = 0; x < card_x; ++x) {
                const double puvx = s.factor_uvx[(static_cast<std::size_t>(u) * card_v + v) * card_x + x];
                for (int y = 0; y < card_y; ++y)
                    for (int z = 0; z < card_z; ++z)
                        s.pmf[(((static_cast<std::size_t>(u) * card_v + v) * card_x + x) * card_y + y) * card_z + z] =
                            puvx * s.channel(x, y, z);
            }
    return s;
}

ValidationReport validate(const JointSource& s) {
    ValidationReport rep;
    auto structural = [&rep](const std::string& msg) {
        rep.structural_ok = false;
        rep.violations.push_back(msg);
    };

    if (s.card_u != 2 || s.card_v != 2 || s.card_x != 2)
        structural("alphabets of U, V, X must be binary");
    if (s.card_y < 1 || s.card_z < 1) structural("alphabets of Y, Z must be nonempty");
    if (s.pmf.size() != s.pmf_size()) structural("pmf table has wrong size");

    for (double q : s.pmf)
        if (q < 0.0) {
            structural("pmf has a negative entry");
            break;
        }

    double total = 0.0;
    for (double q : s.pmf) total += q;
    if (std::fabs(total - 1.0) > kNormTol) {
        std::ostringstream os;
        os << "pmf sums to " << total << ", not 1 within 1e-12";
        structural(os.str());
    }

    for (int x = 0; x < s.card_x; ++x) {
        double row = 0.0;
        for (int y = 0; y < s.card_y; ++y)
            for (int z = 0; z < s.card_z; ++z) row += s.channel(x, y, z);
        if (std::fabs(row - 1.0) > kNormTol) {
            std::ostringstream os;
            os << "factor_yz_given_x row for x=" << x << " sums to " << row;
            structural(os.str());
        }
    }

    bool factored = true;
    for (int u = 0; u < s.card_u && factored; ++u)
        for (int v = 0; v < s.card_v && factored; ++v)
            for (int x = 0; x < s.card_x && factored; ++x) {
                const double puvx =
                    s.factor_uvx[(static_cast<std::size_t>(u) * s.card_v + v) * s.card_x + x];
                for (int y = 0; y < s.card_y; ++y)
                    for (int z = 0; z < s.card_z; ++z)
                        if (std::fabs(s.p(u, v, x, y, z) - puvx * s.channel(x, y, z)) > kFactorTol) {
                            structural("pmf does not factor as p(u,v,x) * p(y,z|x)");
                            factored = false;
                        }
            }

    // Inner chain U - V - X: p(u,v,x) p(v) = p(u,v) p(v,x) for all cells.
    for (int v = 0; v < s.card_v; ++v) {
        double pv = 0, puv[2] = {0, 0}, pvx[2] = {0, 0};
        for (int u = 0; u < s.card_u; ++u)
            for (int x = 0; x < s.card_x; ++x) {
                const double f = s.factor_uvx[(static_cast<std::size_t>(u) * s.card_v + v) * s.card_x + x];
                pv += f;
                puv[u] += f;
                pvx[x] += f;
            }
        bool bad = false;
        for (int u = 0; u < s.card_u && !bad; ++u)
            for (int x = 0; x < s.card_x && !bad; ++x) {
                const double f = s.factor_uvx[(static_cast<std::size_t>(u) * s.card_v + v) * s.card_x + x];
                if (std::fabs(f * pv - puv[u] * pvx[x]) > 1e-11) {
                    structural("factor_uvx violates the U - V - X chain (U and X not independent given V)");
                    bad = true;
                }
            }
        if (bad) break;
    }

    if (!rep.structural_ok) return rep;

    const double secrecy_margin =
        mutual_information_bits(s, VAR_V, VAR_Y, VAR_U) - mutual_information_bits(s, VAR_V, VAR_Z, VAR_U);
    if (!(secrecy_margin > 0.0)) {
        rep.assumptions_ok = false;
        std::ostringstream os;
        os << "I(V;Y|U) - I(V;Z|U) = " << secrecy_margin << " is not > 0";
        rep.violations.push_back(os.str());
    }
    const double iuy = mutual_information_bits(s, VAR_U, VAR_Y);
    const double iuz = mutual_information_bits(s, VAR_U, VAR_Z);
    if (iuy > iuz + 1e-12) {
        rep.assumptions_ok = false;
        std::ostringstream os;
        os << "I(U;Y) = " << iuy << " exceeds I(U;Z) = " << iuz;
        rep.violations.push_back(os.str());
    }
    return rep;
}

void require_valid(const JointSource& s) {
    const ValidationReport rep = validate(s);
    if (rep.ok()) return;
    std::string msg = "source failed validation:";
    for (const auto& v : rep.violations) msg += "\n  " + v;
    throw std::runtime_error(msg);
}

double entropy_bits(const JointSource& s, unsigned target, unsigned given) {
    if (target == 0) throw std::invalid_argument("entropy_bits: empty target group");
    if ((target & given) != 0) throw std::invalid_argument("entropy_bits: target and given groups overlap");
    const double hj = entropy_of_table(marginal(s, target | given));
    if (given == 0) return hj;
    return hj - entropy_of_table(marginal(s, given));
}

double mutual_information_bits(const JointSource& s, unsigned a, unsigned b, unsigned given) {
    if (a == 0 || b == 0) throw std::invalid_argument("mutual_information_bits: empty group");
    if ((a & b) || (a & given) || (b & given))
        throw std::invalid_argument("mutual_information_bits: groups overlap");
    return entropy_bits(s, a, given) - entropy_bits(s, a, b | given);
}

RateTuple theorem1_corner(const JointSource& s) {
    RateTuple r;
    r.r_o = std::min(mutual_information_bits(s, VAR_U, VAR_Y), mutual_information_bits(s, VAR_U, VAR_Z));
    r.r_m = mutual_information_bits(s, VAR_V, VAR_Z, VAR_U);
    r.r_s = mutual_information_bits(s, VAR_V, VAR_Y, VAR_U) - r.r_m;
    r.r_r = mutual_information_bits(s, VAR_X, VAR_Z, VAR_V);
    auto clamp0 = [](double& v) {
        if (v < 0 && v > -1e-13) v = 0;
    };
    clamp0(r.r_o);
    clamp0(r.r_m);
    clamp0(r.r_s);
    clamp0(r.r_r);
    return r;
}

Tuple5 sample_one(const JointSource& s, Rng& rng) {
    Tuple5 t{};
    const int uvx = rng.categorical(s.factor_uvx.data(), static_cast<int>(s.factor_uvx.size()));
    t.x = uvx % s.card_x;
    t.v = (uvx / s.card_x) % s.card_v;
    t.u = uvx / (s.card_x * s.card_v);
    const double* row = s.factor_yz_given_x.data() + static_cast<std::size_t>(t.x) * s.card_y * s.card_z;
    const int yz = rng.categorical(row, s.card_y * s.card_z);
    t.y = yz / s.card_z;
    t.z = yz % s.card_z;
    return t;
}

std::vector<Tuple5> sample(const JointSource& s, std::size_t count, Rng& rng) {
    std::vector<Tuple5> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_one(s, rng));
    return out;
}

const char* layer_name(Layer layer) {
    switch (layer) {
        case Layer::U: return "U";
        case Layer::UY: return "U|Y";
        case Layer::UZ: return "U|Z";
        case Layer::VU: return "V|U";
        case Layer::VUY: return "V|UY";
        case Layer::VUZ: return "V|UZ";
        case Layer::XV: return "X|V";
        case Layer::XVZ: return "X|VZ";
    }
    return "?";
}

bool layer_is_conditioned(Layer layer) { return layer != Layer::U; }

double LayerModel::conditional_entropy() const {
    double h = 0.0;
    for (int sdx = 0; sdx < side_card; ++sdx) {
        const double ps = side_prob(sdx);
        if (ps <= 1e-15) continue;
        h += ps * binary_entropy(pj(sdx, 1) / ps);
    }
    return h;
}

int layer_side_symbol(const JointSource& s, Layer layer, const Tuple5& t) {
    switch (layer) {
        case Layer::U: return 0;
        case Layer::UY: return t.y;
        case Layer::UZ: return t.z;
        case Layer::VU: return t.u;
        case Layer::VUY: return t.u * s.card_y + t.y;
        case Layer::VUZ: return t.u * s.card_z + t.z;
        case Layer::XV: return t.v;
        case Layer::XVZ: return t.v * s.card_z + t.z;
    }
    return 0;
}

int layer_bit_symbol(Layer layer, const Tuple5& t) {
    switch (layer) {
        case Layer::U:
        case Layer::UY:
        case Layer::UZ: return t.u;
        case Layer::VU:
        case Layer::VUY:
        case Layer::VUZ: return t.v;
        case Layer::XV:
        case Layer::XVZ: return t.x;
    }
    return 0;
}

LayerModel layer_model(const JointSource& s, Layer layer) {
    LayerModel m;
    switch (layer) {
        case Layer::U: m.side_card = 1; break;
        case Layer::UY: m.side_card = s.card_y; break;
        case Layer::UZ: m.side_card = s.card_z; break;
        case Layer::VU: m.side_card = s.card_u; break;
        case Layer::VUY: m.side_card = s.card_u * s.card_y; break;
        case Layer::VUZ: m.side_card = s.card_u * s.card_z; break;
        case Layer::XV: m.side_card = s.card_v; break;
        case Layer::XVZ: m.side_card = s.card_v * s.card_z; break;
    }
    m.joint.assign(2 * static_cast<std::size_t>(m.side_card), 0.0);
    for (int u = 0; u < s.card_u; ++u)
        for (int v = 0; v < s.card_v; ++v)
            for (int x = 0; x < s.card_x; ++x)
                for (int y = 0; y < s.card_y; ++y)
                    for (int z = 0; z < s.card_z; ++z) {
                        Tuple5 t{u, v, x, y, z};
                        const int side = layer_side_symbol(s, layer, t);
                        const int bit = layer_bit_symbol(layer, t);
                        m.joint[2 * static_cast<std::size_t>(side) + bit] += s.p(u, v, x, y, z);
                    }
    m.log_joint.resize(m.joint.size());
    for (std::size_t i = 0; i < m.joint.size(); ++i)
        m.log_joint[i] = m.joint[i] > 1e-15 ? std::log(m.joint[i]) : kNegInf;
    return m;
}

// --- file format ------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& msg) {
    std::ostringstream os;
    os << name << ":" << line << ": " << msg;
    throw std::runtime_error(os.str());
}

} // namespace

JointSource parse_source_stream(std::istream& in, const std::string& name) {
    int card[5] = {0, 0, 0, 0, 0};
    const char* keys[5] = {"card_u", "card_v", "card_x", "card_y", "card_z"};
    std::vector<double> uvx, yz;
    int want_uvx = -1, want_yz = -1;
    std::vector<double>* filling = nullptr;
    int want = 0;
    int fill_start_line = 0;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;

        if (filling) {
            // Inside a table block: every token must be a number.
            do {
                try {
                    std::size_t used = 0;
                    double val = std::stod(tok, &used);
                    if (used != tok.size()) throw std::invalid_argument(tok);
                    filling->push_back(val);
                } catch (const std::exception&) {
                    parse_fail(name, lineno, "expected a numeric table entry, got '" + tok + "'");
                }
                if (static_cast<int>(filling->size()) == want) {
                    if (ls >> tok) parse_fail(name, lineno, "extra values after table of " + std::to_string(want));
                    filling = nullptr;
                    break;
                }
            } while (ls >> tok);
            continue;
        }

        bool is_card = false;
        for (int i = 0; i < 5; ++i) {
            if (tok == keys[i]) {
                int value = 0;
                if (!(ls >> value) || value < 1)
                    parse_fail(name, lineno, std::string(keys[i]) + " needs a positive integer");
                card[i] = value;
                is_card = true;
                break;
            }
        }
        if (is_card) continue;

        if (tok == "factor_uvx" || tok == "factor_yz_given_x") {
            for (int i = 0; i < 5; ++i)
                if (card[i] == 0)
                    parse_fail(name, lineno, "all five card_* entries must precede the tables");
            want_uvx = card[0] * card[1] * card[2];
            want_yz = card[2] * card[3] * card[4];
            if (tok == "factor_uvx") {
                filling = &uvx;
                want = want_uvx;
            } else {
                filling = &yz;
                want = want_yz;
            }
            fill_start_line = lineno;
            if (ls >> tok) parse_fail(name, lineno, "table values start on the following lines");
            continue;
        }

        parse_fail(name, lineno, "unrecognized directive '" + tok + "'");
    }

    if (filling)
        parse_fail(name, fill_start_line,
                   "table truncated: expected " + std::to_string(want) + " values, got " +
                       std::to_string(filling->size()));
    for (int i = 0; i < 5; ++i)
        if (card[i] == 0) parse_fail(name, lineno, std::string("missing ") + keys[i]);
    if (static_cast<int>(uvx.size()) != want_uvx)
        parse_fail(name, lineno, "missing or incomplete factor_uvx table");
    if (static_cast<int>(yz.size()) != want_yz)
        parse_fail(name, lineno, "missing or incomplete factor_yz_given_x table");

    return make_source(card[0], card[1], card[2], card[3], card[4], std::move(uvx), std::move(yz));
}

JointSource parse_source_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open source file");
    return parse_source_stream(in, path);
}

void write_source_file(const JointSource& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.precision(17);
    out << "card_u " << s.card_u << "\ncard_v " << s.card_v << "\ncard_x " << s.card_x
        << "\ncard_y " << s.card_y << "\ncard_z " << s.card_z << "\n";
    out << "factor_uvx\n";
    for (std::size_t i = 0; i < s.factor_uvx.size(); ++i)
        out << s.factor_uvx[i] << (((i + 1) % 8 == 0) ? "\n" : " ");
    out << "\nfactor_yz_given_x\n";
    for (std::size_t i = 0; i < s.factor_yz_given_x.size(); ++i)
        out << s.factor_yz_given_x[i] << (((i + 1) % 8 == 0) ? "\n" : " ");
    out << "\n";
}

} // namespace chainpolar
