#pragma once

// Signed-digit recoding of unsigned magnitudes and the CSD form of a
// signed matrix.
//
// Recoding scans LSb to MSb for chains of consecutive 1 bits. A chain of
// length 1 is kept. A chain of length 2 is replaced by -1 at its start and
// +1 one past its end when the coin comes up heads, and kept otherwise.
// Longer chains are always replaced. Chains separated by a single zero are
// not merged, so the result is not always the minimal (NAF) recoding.

#include "serialforge/matrix.hpp"
#include "serialforge/random.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace serialforge {

/// Digits over {-1, 0, +1}, LSb first, one longer than the source width.
struct CsdDigits {
    std::vector<std::int8_t> digits;

    std::int64_t value() const noexcept;
    unsigned nonzero_count() const noexcept;
};

enum class CoinMode { Random, AlwaysHeads, AlwaysTails };

/// Decides length-2 chains. Random mode consumes one draw per decision.
class Coin {
public:
    static Coin random(Rng rng) { return Coin(CoinMode::Random, rng); }
    static Coin heads() { return Coin(CoinMode::AlwaysHeads, Rng{0}); }
    static Coin tails() { return Coin(CoinMode::AlwaysTails, Rng{0}); }
    static Coin for_mode(CoinMode mode, std::uint64_t seed);

    bool flip();
    CoinMode mode() const noexcept { return mode_; }

private:
    Coin(CoinMode mode, Rng rng) : mode_(mode), rng_(rng) {}
    CoinMode mode_;
    Rng rng_;
};

CsdDigits convert_to_csd(std::uint64_t value, unsigned bitwidth, Coin& coin);

/// Widest source matrix csd_transform accepts; the pair is one bit wider.
inline constexpr unsigned kMaxCsdSourceBitwidth = kMaxBitwidth - 1;

/// pn_split followed by recoding every nonzero magnitude. Positive digits
/// stay in the element's home matrix and negative digits move to the other
/// one. Coins are drawn in scan order, LSb to MSb within an element and
/// row-major across elements, from the stream tagged "csd".
MatrixPair csd_transform(const IntMatrix& m, std::uint64_t seed, CoinMode mode = CoinMode::Random);

inline constexpr unsigned kMaxSavingsBitwidth = 16;

/// 1 - E[nonzero CSD digits] / E[popcount] over every unsigned value of the
/// bit-width, by exhaustive enumeration.
double csd_savings(unsigned bitwidth);

}  // namespace serialforge
