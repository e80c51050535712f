#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

// Counter-based randomness (Philox4x32-10). Every deviate is a pure function of
// (master_seed, stream_id, index), so simulations are bit-identical for any
// thread count or evaluation order.

namespace hs {

struct Philox4x32 {
    static constexpr uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    static constexpr uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;

    static std::array<uint32_t, 4> block(std::array<uint32_t, 4> c, std::array<uint32_t, 2> k) {
        for (int r = 0; r < 10; ++r) {
            uint64_t p0 = uint64_t(M0) * c[0];
            uint64_t p1 = uint64_t(M1) * c[2];
            uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
            uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
            k[0] += W0;
            k[1] += W1;
        }
        return c;
    }
};

// Identifies an independent substream. kind/population/index are packed into a
// 64-bit stream id; collisions across entities are impossible by construction.
enum class StreamKind : uint64_t { Generic = 0, Weights = 1, InitState = 2, NetNoise = 3, Scratch = 7 };

inline uint64_t stream_id(StreamKind kind, uint64_t population, uint64_t index) {
    return (uint64_t(kind) << 56) | ((population & 0xFFu) << 48) | (index & 0xFFFFFFFFFFFFull);
}

class SeededStream {
  public:
    SeededStream(uint64_t master_seed, uint64_t sid) : seed_(master_seed), sid_(sid) {}
    SeededStream(uint64_t master_seed, StreamKind kind, uint64_t population, uint64_t index)
        : SeededStream(master_seed, stream_id(kind, population, index)) {}

    uint64_t master_seed() const { return seed_; }
    uint64_t id() const { return sid_; }

    // i-th uniform deviate in (0,1), 53-bit resolution
    double u01(uint64_t i) const {
        auto [x0, x1] = pair_u64(i >> 1, 0);
        return to_unit(i & 1 ? x1 : x0);
    }

    // i-th standard normal deviate (Box-Muller on a dedicated counter domain)
    double normal(uint64_t i) const {
        auto [x0, x1] = pair_u64(i >> 1, 1);
        double u1 = to_unit(x0), u2 = to_unit(x1);
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * M_PI * u2;
        return (i & 1) ? r * std::sin(th) : r * std::cos(th);
    }

    // same values as normal(first_index + i), computing each pair's block once
    void fill_normal(double* out, uint64_t n, uint64_t first_index = 0) const {
        uint64_t i = first_index, end = first_index + n;
        if (i < end && (i & 1)) {
            out[i - first_index] = normal(i);
            ++i;
        }
        for (; i + 1 < end; i += 2) {
            auto [x0, x1] = pair_u64(i >> 1, 1);
            double r = std::sqrt(-2.0 * std::log(to_unit(x0)));
            double th = 2.0 * M_PI * to_unit(x1);
            out[i - first_index] = r * std::cos(th);
            out[i + 1 - first_index] = r * std::sin(th);
        }
        if (i < end) out[i - first_index] = normal(i);
    }

    std::vector<double> normals(uint64_t n) const {
        std::vector<double> z(n);
        fill_normal(z.data(), n);
        return z;
    }

  private:
    struct U64Pair {
        uint64_t a, b;
    };

    U64Pair pair_u64(uint64_t block_index, uint32_t domain) const {
        std::array<uint32_t, 4> ctr = {uint32_t(block_index), uint32_t(block_index >> 32), uint32_t(sid_),
                                       uint32_t(sid_ >> 32) ^ (domain << 30)};
        std::array<uint32_t, 2> key = {uint32_t(seed_), uint32_t(seed_ >> 32)};
        auto c = Philox4x32::block(ctr, key);
        return {uint64_t(c[0]) | (uint64_t(c[1]) << 32), uint64_t(c[2]) | (uint64_t(c[3]) << 32)};
    }

    static double to_unit(uint64_t x) { return double(x >> 11) * 0x1p-53 + 0x1p-54; }

    uint64_t seed_, sid_;
};

inline std::vector<double> seeded_gaussian(const SeededStream& s, uint64_t n) { return s.normals(n); }

} // namespace hs
