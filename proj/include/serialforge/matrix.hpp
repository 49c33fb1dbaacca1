#pragma once

// Integer matrices with a declared bit-width, the two random sparsity
// generators, sparsity statistics and the positive/negative split.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace serialforge {

enum class Signedness { Unsigned, Signed };

inline constexpr unsigned kMaxBitwidth = 32;

/// Dense row-major integer matrix. Every element fits `bitwidth` bits of the
/// declared signedness; construction and `set` enforce this.
class IntMatrix {
public:
    IntMatrix(std::size_t rows, std::size_t cols, unsigned bitwidth, Signedness signedness);
    IntMatrix(std::size_t rows, std::size_t cols, unsigned bitwidth, Signedness signedness,
              std::vector<std::int64_t> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    unsigned bitwidth() const noexcept { return bitwidth_; }
    Signedness signedness() const noexcept { return signedness_; }
    bool is_signed() const noexcept { return signedness_ == Signedness::Signed; }

    std::int64_t min_value() const noexcept;
    std::int64_t max_value() const noexcept;
    bool fits(std::int64_t value) const noexcept { return value >= min_value() && value <= max_value(); }

    std::int64_t operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    std::int64_t at(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, std::int64_t value);

    std::span<const std::int64_t> data() const noexcept { return data_; }

    IntMatrix transposed() const;

    friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    unsigned bitwidth_;
    Signedness signedness_;
    std::vector<std::int64_t> data_;
};

/// Value range of a `bitwidth`-bit integer of the given signedness.
std::int64_t min_representable(unsigned bitwidth, Signedness signedness) noexcept;
std::int64_t max_representable(unsigned bitwidth, Signedness signedness) noexcept;

/// Sparsity statistics. Bits are counted on magnitudes (popcount of |v|),
/// which is what the unsigned P/N hardware consumes.
struct SparsityStats {
    double element_sparsity = 0.0;
    double bit_sparsity = 0.0;
    std::uint64_t ones_count = 0;
};

SparsityStats stats(const IntMatrix& m);

/// Total popcount of element magnitudes.
std::uint64_t ones_count(const IntMatrix& m) noexcept;

/// Two unsigned matrices with p - n equal to a source matrix.
struct MatrixPair {
    IntMatrix p;
    IntMatrix n;

    std::size_t rows() const noexcept { return p.rows(); }
    std::size_t cols() const noexcept { return p.cols(); }
    unsigned bitwidth() const noexcept { return p.bitwidth(); }
    std::uint64_t ones() const noexcept { return ones_count(p) + ones_count(n); }

    /// Elementwise p - n, row-major.
    std::vector<std::int64_t> reconstruct() const;
};

/// Each bit of each unsigned element is set independently with
/// probability 1 - bit_sparsity.
IntMatrix gen_bit_sparse(std::size_t rows, std::size_t cols, unsigned bitwidth,
                         double bit_sparsity, std::uint64_t seed);

/// Elements uniform over the representable range, then exactly
/// round(rows*cols*element_sparsity) distinct positions forced to zero.
IntMatrix gen_element_sparse(std::size_t rows, std::size_t cols, unsigned bitwidth,
                             Signedness signedness, double element_sparsity, std::uint64_t seed);

/// Positive entries to p, magnitudes of negative entries to n. Both halves
/// keep the source bit-width (|min| of a b-bit signed value fits b bits).
MatrixPair pn_split(const IntMatrix& m);

}  // namespace serialforge
