#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mstsim/graph.hpp"

namespace mstsim {

constexpr Weight kInfWeight = std::numeric_limits<Weight>::max();

// Number of bits needed to hold any value in [0, maxval].
unsigned bits_for(std::uint64_t maxval);
int floor_log2(std::uint64_t x);
int ceil_log2(std::uint64_t x);

// Register widths derived from the instance. Every program sizes its fields from these.
struct Dims {
    unsigned id = 1;     // node ids
    unsigned w = 1;      // weights, one extra bit for the infinity sentinel
    unsigned cnt = 1;    // counts up to 2n
    unsigned port = 1;   // port numbers 0..Delta
    unsigned lev = 1;    // level indices 0..maxlev
    unsigned time = 1;   // round counters up to ~ 256 n
    int maxlev = 0;      // largest level any string may need (floor log2 n)
    int n = 1;
    static Dims of(const WeightedGraph& g);
};

// Info(F) = id(root) . level . omega. Absent when !present.
struct Info {
    bool present = false;
    NodeId z = 0;
    std::uint32_t lev = 0;
    Weight w = 0;
    bool operator==(const Info&) const = default;
};
std::string to_string(const Info& x);

// Walks the named registers of a state. Used for bit accounting, fault injection and dumps.
class RegVisitor {
public:
    explicit RegVisitor(const Dims& d) : dims(d) {}
    virtual ~RegVisitor() = default;
    const Dims& dims;

    virtual void num(const std::string& name, std::uint64_t& v, unsigned width) = 0;
    virtual void flag(const std::string& name, bool& b) = 0;
    // String register over `alphabet`; each symbol costs `symbits`.
    virtual void text(const std::string& name, std::string& s, const std::string& alphabet, unsigned cap,
                      unsigned symbits) = 0;
    virtual void info(const std::string& name, Info& x) = 0;

    template <class T>
    void u(const std::string& name, T& v, unsigned width) {
        std::uint64_t x = static_cast<std::uint64_t>(v);
        num(name, x, width);
        v = static_cast<T>(x);
    }
};

class BitCounter : public RegVisitor {
public:
    using RegVisitor::RegVisitor;
    std::uint64_t bits = 0;
    void num(const std::string&, std::uint64_t&, unsigned width) override { bits += width; }
    void flag(const std::string&, bool&) override { bits += 1; }
    void text(const std::string&, std::string& s, const std::string&, unsigned, unsigned symbits) override {
        bits += s.size() * symbits;
    }
    void info(const std::string&, Info& x) override {
        bits += 1;
        if (x.present) bits += dims.id + dims.lev + dims.w;
    }
};

class Randomizer : public RegVisitor {
public:
    Randomizer(const Dims& d, std::mt19937_64& r) : RegVisitor(d), rng(r) {}
    std::mt19937_64& rng;
    std::uint64_t rnd(unsigned width);
    void num(const std::string&, std::uint64_t& v, unsigned width) override { v = rnd(width); }
    void flag(const std::string&, bool& b) override { b = rng() & 1; }
    void text(const std::string&, std::string& s, const std::string& alphabet, unsigned cap, unsigned) override;
    void info(const std::string&, Info& x) override;
};

// Sets one register by name from its textual form. Throws Error("invalid-fault") if no register matched.
class Setter : public RegVisitor {
public:
    Setter(const Dims& d, std::string n, std::string v) : RegVisitor(d), target(std::move(n)), value(std::move(v)) {}
    std::string target, value;
    bool hit = false;
    void num(const std::string& name, std::uint64_t& v, unsigned width) override;
    void flag(const std::string& name, bool& b) override;
    void text(const std::string& name, std::string& s, const std::string& alphabet, unsigned cap, unsigned) override;
    void info(const std::string& name, Info& x) override;
};

// Flips `count` uniformly chosen stored bits. Two passes: first counts, second flips.
class BitFlipper : public RegVisitor {
public:
    BitFlipper(const Dims& d, std::vector<std::uint64_t> positions) : RegVisitor(d), pos(std::move(positions)) {}
    std::vector<std::uint64_t> pos;  // sorted bit offsets to flip
    std::uint64_t offset = 0;
    void num(const std::string&, std::uint64_t& v, unsigned width) override;
    void flag(const std::string&, bool& b) override;
    void text(const std::string&, std::string& s, const std::string& alphabet, unsigned, unsigned symbits) override;
    void info(const std::string&, Info& x) override;

private:
    bool take(std::uint64_t width, std::uint64_t& local);
};

class Dumper : public RegVisitor {
public:
    using RegVisitor::RegVisitor;
    std::vector<std::pair<std::string, std::string>> out;
    void num(const std::string& name, std::uint64_t& v, unsigned) override { out.push_back({name, std::to_string(v)}); }
    void flag(const std::string& name, bool& b) override { out.push_back({name, b ? "1" : "0"}); }
    void text(const std::string& name, std::string& s, const std::string&, unsigned, unsigned) override {
        out.push_back({name, s});
    }
    void info(const std::string& name, Info& x) override { out.push_back({name, to_string(x)}); }
};

}  // namespace mstsim
