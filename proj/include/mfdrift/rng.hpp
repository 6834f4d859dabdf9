#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mfdrift {

/// Philox4x32-10 block function: maps (counter, key) to four 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to derive stream keys.
std::uint64_t mix64(std::uint64_t x);

/// Inverse of the standard normal CDF (Wichura AS241, double precision).
double normal_quantile(double p);

/// Counter-based random stream. Every draw is a pure function of
/// (key, draw index), so a stream can be recreated anywhere.
class RandomStream
{
  public:
    explicit RandomStream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();

    /// Standard normal via inverse CDF of one uniform (bit-stable).
    double standard_normal();

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t draws() const noexcept { return counter_ * 2 - buffered_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

/// Hierarchical seed derivation: a master seed plus a path of
/// (purpose tag, index) pairs. Children depend only on the path, never on
/// the order in which siblings are derived.
class SeedTree
{
  public:
    explicit SeedTree(std::uint64_t master_seed);

    SeedTree child(std::string_view tag, std::uint64_t index) const;
    RandomStream stream() const { return RandomStream(key_); }

    std::uint64_t master_seed() const noexcept { return master_; }
    std::uint64_t key() const noexcept { return key_; }
    std::size_t depth() const noexcept { return depth_; }

  private:
    SeedTree(std::uint64_t master, std::uint64_t key, std::size_t depth)
        : master_(master), key_(key), depth_(depth)
    {}

    std::uint64_t master_;
    std::uint64_t key_;
    std::size_t depth_ = 0;
};

inline RandomStream derive_stream(const SeedTree& tree, std::string_view tag,
                                  std::uint64_t index)
{
    return tree.child(tag, index).stream();
}

/// Convenience wrapper used at call sites that consume normals.
inline double standard_normal(RandomStream& stream) { return stream.standard_normal(); }

}  // namespace mfdrift
