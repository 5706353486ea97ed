#include "mstsim/registers.hpp"

#include <algorithm>
#include <sstream>

namespace mstsim {

unsigned bits_for(std::uint64_t maxval) {
    unsigned b = 1;
    while (b < 64 && (maxval >> b) != 0) ++b;
    return b;
}

int floor_log2(std::uint64_t x) {
    int r = -1;
    while (x) {
        x >>= 1;
        ++r;
    }
    return r;
}

int ceil_log2(std::uint64_t x) {
    if (x <= 1) return 0;
    return floor_log2(x - 1) + 1;
}

Dims Dims::of(const WeightedGraph& g) {
    Dims d;
    auto n = static_cast<std::uint64_t>(std::max(1, g.n()));
    d.n = static_cast<int>(n);
    d.id = bits_for(std::max<std::uint64_t>(g.max_id(), n * n));
    d.w = bits_for(std::max<std::uint64_t>(g.max_weight(), 1)) + 1;
    d.cnt = bits_for(2 * n);
    d.port = bits_for(static_cast<std::uint64_t>(g.max_degree()));
    d.maxlev = floor_log2(n);
    d.lev = bits_for(static_cast<std::uint64_t>(d.maxlev + 1));
    d.time = bits_for(512 * n + 4096);
    return d;
}

std::string to_string(const Info& x) {
    if (!x.present) return "none";
    std::ostringstream os;
    os << x.z << ',' << x.lev << ',';
    if (x.w == kInfWeight) os << "inf";
    else os << x.w;
    return os.str();
}

std::uint64_t Randomizer::rnd(unsigned width) {
    std::uint64_t v = rng();
    return width >= 64 ? v : (v & ((std::uint64_t{1} << width) - 1));
}

void Randomizer::text(const std::string&, std::string& s, const std::string& alphabet, unsigned cap, unsigned) {
    auto len = rng() % (cap + 1);
    s.assign(len, alphabet[0]);
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
}

void Randomizer::info(const std::string&, Info& x) {
    x.present = rng() & 1;
    x.z = rnd(dims.id);
    x.lev = static_cast<std::uint32_t>(rnd(dims.lev));
    x.w = rnd(dims.w - 1);
    if ((rng() & 15) == 0) x.w = kInfWeight;
}

namespace {
bool parse_u64(const std::string& s, std::uint64_t& v) {
    try {
        size_t pos = 0;
        v = std::stoull(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}
}  // namespace

void Setter::num(const std::string& name, std::uint64_t& v, unsigned width) {
    if (name != target) return;
    std::uint64_t x;
    if (!parse_u64(value, x)) throw Error("invalid-fault", "bad value for " + name);
    if (width < 64) x &= (std::uint64_t{1} << width) - 1;
    v = x;
    hit = true;
}

void Setter::flag(const std::string& name, bool& b) {
    if (name != target) return;
    b = value == "1" || value == "true";
    hit = true;
}

void Setter::text(const std::string& name, std::string& s, const std::string& alphabet, unsigned cap, unsigned) {
    if (name != target) return;
    if (value.size() > cap) throw Error("invalid-fault", "value too long for " + name);
    for (char c : value)
        if (alphabet.find(c) == std::string::npos) throw Error("invalid-fault", "symbol outside alphabet for " + name);
    s = value;
    hit = true;
}

void Setter::info(const std::string& name, Info& x) {
    if (name != target) return;
    hit = true;
    if (value == "none") {
        x = Info{};
        return;
    }
    std::istringstream ss(value);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    std::uint64_t z, l, w;
    if (!parse_u64(a, z) || !parse_u64(b, l)) throw Error("invalid-fault", "bad info value for " + name);
    if (c == "inf") w = kInfWeight;
    else if (!parse_u64(c, w)) throw Error("invalid-fault", "bad info value for " + name);
    x = Info{true, z, static_cast<std::uint32_t>(l), w};
}

bool BitFlipper::take(std::uint64_t width, std::uint64_t& local) {
    auto it = std::lower_bound(pos.begin(), pos.end(), offset);
    bool hit = it != pos.end() && *it < offset + width;
    if (hit) {
        local = *it - offset;
        pos.erase(it);
    }
    offset += width;
    return hit;
}

void BitFlipper::num(const std::string&, std::uint64_t& v, unsigned width) {
    std::uint64_t b;
    std::uint64_t start = offset;
    while (true) {
        offset = start;
        if (!take(width, b)) break;
        v ^= std::uint64_t{1} << b;
    }
    offset = start + width;
}

void BitFlipper::flag(const std::string&, bool& b) {
    std::uint64_t x;
    if (take(1, x)) b = !b;
}

void BitFlipper::text(const std::string&, std::string& s, const std::string& alphabet, unsigned, unsigned symbits) {
    std::uint64_t start = offset, b;
    std::uint64_t width = s.size() * symbits;
    while (true) {
        offset = start;
        if (!take(width, b)) break;
        size_t i = b / symbits;
        auto sym = alphabet.find(s[i]);
        if (sym == std::string::npos) sym = 0;
        sym = (sym ^ (std::uint64_t{1} << (b % symbits))) % alphabet.size();
        if (alphabet[sym] == s[i]) sym = (sym + 1) % alphabet.size();
        s[i] = alphabet[sym];
    }
    offset = start + width;
}

void BitFlipper::info(const std::string&, Info& x) {
    std::uint64_t b;
    if (take(1, b)) x.present = !x.present;
    if (!x.present) return;
    std::uint64_t start = offset;
    std::uint64_t width = dims.id + dims.lev + dims.w;
    while (true) {
        offset = start;
        if (!take(width, b)) break;
        if (b < dims.id) x.z ^= std::uint64_t{1} << b;
        else if (b < dims.id + dims.lev) x.lev ^= 1u << (b - dims.id);
        else {
            auto k = b - dims.id - dims.lev;
            if (x.w == kInfWeight) x.w = 0;
            x.w ^= std::uint64_t{1} << k;
        }
    }
    offset = start + width;
}

}  // namespace mstsim
