#include "serialforge/csd.hpp"

#include "serialforge/error.hpp"

#include <bit>
#include <string>

namespace serialforge {

std::int64_t CsdDigits::value() const noexcept
{
    std::int64_t sum = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) sum += std::int64_t{digits[k]} * (std::int64_t{1} << k);
    return sum;
}

unsigned CsdDigits::nonzero_count() const noexcept
{
    unsigned n = 0;
    for (auto d : digits) n += (d != 0);
    return n;
}

Coin Coin::for_mode(CoinMode mode, std::uint64_t seed)
{
    switch (mode) {
    case CoinMode::AlwaysHeads: return heads();
    case CoinMode::AlwaysTails: return tails();
    case CoinMode::Random: break;
    }
    return random(Rng::stream(seed, "csd"));
}

bool Coin::flip()
{
    switch (mode_) {
    case CoinMode::AlwaysHeads: return true;
    case CoinMode::AlwaysTails: return false;
    case CoinMode::Random: break;
    }
    return rng_.coin();
}

CsdDigits convert_to_csd(std::uint64_t value, unsigned bitwidth, Coin& coin)
{
    if (bitwidth < 1 || bitwidth > 63) throw ArgumentError("csd bitwidth must be in [1, 63]");
    if (bitwidth < 64 && (value >> bitwidth) != 0)
        throw ArgumentError("value " + std::to_string(value) + " does not fit " + std::to_string(bitwidth) + " bits");

    CsdDigits out;
    out.digits.assign(bitwidth + 1, 0);
    auto& target = out.digits;
    int chain_start = -1;
    for (int i = 0; i <= static_cast<int>(bitwidth); ++i) {
        const bool bit = i < static_cast<int>(bitwidth) && ((value >> i) & 1U);
        if (bit) {
            if (chain_start == -1) chain_start = i;
            continue;
        }
        if (chain_start == -1) continue;
        const int chain_length = i - chain_start;
        if (chain_length == 1) {
            target[chain_start] = 1;
        } else if (chain_length == 2) {
            if (coin.flip()) {
                target[chain_start] = -1;
                target[i] = 1;
            } else {
                target[chain_start] = 1;
                target[i - 1] = 1;
            }
        } else {
            target[chain_start] = -1;
            target[i] = 1;
        }
        chain_start = -1;
    }
    return out;
}

MatrixPair csd_transform(const IntMatrix& m, std::uint64_t seed, CoinMode mode)
{
    if (m.bitwidth() > kMaxCsdSourceBitwidth)
        throw ArgumentError("csd_transform supports source bit-widths up to "
                            + std::to_string(kMaxCsdSourceBitwidth));
    const MatrixPair split = pn_split(m);
    const unsigned width = m.bitwidth() + 1;
    IntMatrix p(m.rows(), m.cols(), width, Signedness::Unsigned);
    IntMatrix n(m.rows(), m.cols(), width, Signedness::Unsigned);
    Coin coin = Coin::for_mode(mode, seed);

    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const std::int64_t v = m(r, c);
            if (v == 0) continue;
            const bool negative = v < 0;
            const auto mag = static_cast<std::uint64_t>(negative ? split.n(r, c) : split.p(r, c));
            const CsdDigits d = convert_to_csd(mag, m.bitwidth(), coin);
            std::int64_t home = 0, other = 0;
            for (std::size_t k = 0; k < d.digits.size(); ++k) {
                if (d.digits[k] > 0) home |= std::int64_t{1} << k;
                else if (d.digits[k] < 0) other |= std::int64_t{1} << k;
            }
            (negative ? n : p).set(r, c, home);
            (negative ? p : n).set(r, c, other);
        }
    }
    return MatrixPair{std::move(p), std::move(n)};
}

double csd_savings(unsigned bitwidth)
{
    if (bitwidth < 1 || bitwidth > kMaxSavingsBitwidth)
        throw ArgumentError("csd_savings enumerates exhaustively; bitwidth must be in [1, "
                            + std::to_string(kMaxSavingsBitwidth) + "]");
    // Both coin outcomes give the same digit count, so one fixed outcome suffices.
    Coin coin = Coin::heads();
    std::uint64_t popcount_total = 0, digit_total = 0;
    const std::uint64_t count = std::uint64_t{1} << bitwidth;
    for (std::uint64_t v = 0; v < count; ++v) {
        popcount_total += static_cast<std::uint64_t>(std::popcount(v));
        digit_total += convert_to_csd(v, bitwidth, coin).nonzero_count();
    }
    return 1.0 - static_cast<double>(digit_total) / static_cast<double>(popcount_total);
}

}  // namespace serialforge
