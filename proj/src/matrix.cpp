#include "serialforge/matrix.hpp"

#include "serialforge/error.hpp"
#include "serialforge/random.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace serialforge {

namespace {

void check_bitwidth(unsigned bitwidth)
{
    if (bitwidth < 1 || bitwidth > kMaxBitwidth)
        throw ArgumentError("bitwidth must be in [1, " + std::to_string(kMaxBitwidth) + "], got "
                            + std::to_string(bitwidth));
}

void check_dims(std::size_t rows, std::size_t cols)
{
    if (rows == 0 || cols == 0) throw ArgumentError("matrix dimensions must be positive");
}

void check_fraction(double f, const char* name)
{
    if (!(f >= 0.0 && f <= 1.0)) throw ArgumentError(std::string(name) + " must be in [0, 1]");
}

std::uint64_t magnitude(std::int64_t v) noexcept
{
    return v < 0 ? 0 - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
}

}  // namespace

std::int64_t min_representable(unsigned bitwidth, Signedness signedness) noexcept
{
    if (signedness == Signedness::Unsigned) return 0;
    return -(std::int64_t{1} << (bitwidth - 1));
}

std::int64_t max_representable(unsigned bitwidth, Signedness signedness) noexcept
{
    if (signedness == Signedness::Unsigned) return (std::int64_t{1} << bitwidth) - 1;
    return (std::int64_t{1} << (bitwidth - 1)) - 1;
}

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols, unsigned bitwidth, Signedness signedness)
    : rows_(rows), cols_(cols), bitwidth_(bitwidth), signedness_(signedness)
{
    check_dims(rows, cols);
    check_bitwidth(bitwidth);
    data_.assign(rows * cols, 0);
}

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols, unsigned bitwidth, Signedness signedness,
                     std::vector<std::int64_t> data)
    : rows_(rows), cols_(cols), bitwidth_(bitwidth), signedness_(signedness), data_(std::move(data))
{
    check_dims(rows, cols);
    check_bitwidth(bitwidth);
    if (data_.size() != rows * cols)
        throw ArgumentError("matrix data length " + std::to_string(data_.size()) + " != rows*cols "
                            + std::to_string(rows * cols));
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!fits(data_[i]))
            throw ArgumentError("value " + std::to_string(data_[i]) + " at (" + std::to_string(i / cols)
                                + ", " + std::to_string(i % cols) + ") does not fit "
                                + std::to_string(bitwidth) + "-bit "
                                + (is_signed() ? "signed" : "unsigned"));
    }
}

std::int64_t IntMatrix::min_value() const noexcept { return min_representable(bitwidth_, signedness_); }
std::int64_t IntMatrix::max_value() const noexcept { return max_representable(bitwidth_, signedness_); }

std::int64_t IntMatrix::at(std::size_t r, std::size_t c) const
{
    if (r >= rows_ || c >= cols_) throw ArgumentError("matrix index out of range");
    return data_[r * cols_ + c];
}

void IntMatrix::set(std::size_t r, std::size_t c, std::int64_t value)
{
    if (r >= rows_ || c >= cols_) throw ArgumentError("matrix index out of range");
    if (!fits(value)) throw ArgumentError("value " + std::to_string(value) + " does not fit matrix width");
    data_[r * cols_ + c] = value;
}

IntMatrix IntMatrix::transposed() const
{
    std::vector<std::int64_t> out(data_.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out[c * rows_ + r] = data_[r * cols_ + c];
    return IntMatrix(cols_, rows_, bitwidth_, signedness_, std::move(out));
}

std::uint64_t ones_count(const IntMatrix& m) noexcept
{
    std::uint64_t ones = 0;
    for (std::int64_t v : m.data()) ones += static_cast<std::uint64_t>(std::popcount(magnitude(v)));
    return ones;
}

SparsityStats stats(const IntMatrix& m)
{
    SparsityStats s;
    std::size_t zeros = 0;
    for (std::int64_t v : m.data()) zeros += (v == 0);
    s.ones_count = ones_count(m);
    const double elements = static_cast<double>(m.size());
    const double bits = elements * m.bitwidth();
    s.element_sparsity = static_cast<double>(zeros) / elements;
    s.bit_sparsity = 1.0 - static_cast<double>(s.ones_count) / bits;
    return s;
}

std::vector<std::int64_t> MatrixPair::reconstruct() const
{
    std::vector<std::int64_t> out(p.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p.data()[i] - n.data()[i];
    return out;
}

IntMatrix gen_bit_sparse(std::size_t rows, std::size_t cols, unsigned bitwidth, double bit_sparsity,
                         std::uint64_t seed)
{
    check_dims(rows, cols);
    check_bitwidth(bitwidth);
    check_fraction(bit_sparsity, "bit_sparsity");
    Rng rng = Rng::stream(seed, "gen_bit_sparse");
    const double p_one = 1.0 - bit_sparsity;
    std::vector<std::int64_t> data(rows * cols);
    for (auto& v : data) {
        std::int64_t value = 0;
        for (unsigned k = 0; k < bitwidth; ++k)
            if (rng.bernoulli(p_one)) value |= std::int64_t{1} << k;
        v = value;
    }
    return IntMatrix(rows, cols, bitwidth, Signedness::Unsigned, std::move(data));
}

IntMatrix gen_element_sparse(std::size_t rows, std::size_t cols, unsigned bitwidth,
                             Signedness signedness, double element_sparsity, std::uint64_t seed)
{
    check_dims(rows, cols);
    check_bitwidth(bitwidth);
    check_fraction(element_sparsity, "element_sparsity");
    Rng rng = Rng::stream(seed, "gen_element_sparse");
    const std::int64_t lo = min_representable(bitwidth, signedness);
    const std::int64_t hi = max_representable(bitwidth, signedness);
    const std::size_t total = rows * cols;
    std::vector<std::int64_t> data(total);
    for (auto& v : data) v = rng.between(lo, hi);

    const auto forced = static_cast<std::size_t>(std::llround(element_sparsity * static_cast<double>(total)));
    // Partial Fisher-Yates: the first `forced` slots of a shuffled index list.
    std::vector<std::size_t> index(total);
    std::iota(index.begin(), index.end(), std::size_t{0});
    for (std::size_t i = 0; i < forced; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(index[i], index[j]);
        data[index[i]] = 0;
    }
    return IntMatrix(rows, cols, bitwidth, signedness, std::move(data));
}

MatrixPair pn_split(const IntMatrix& m)
{
    IntMatrix p(m.rows(), m.cols(), m.bitwidth(), Signedness::Unsigned);
    IntMatrix n(m.rows(), m.cols(), m.bitwidth(), Signedness::Unsigned);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const std::int64_t v = m(r, c);
            if (v > 0) p.set(r, c, v);
            else if (v < 0) n.set(r, c, -v);
        }
    }
    return MatrixPair{std::move(p), std::move(n)};
}

}  // namespace serialforge
