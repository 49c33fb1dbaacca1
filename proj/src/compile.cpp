#include "serialforge/compile.hpp"

#include "serialforge/error.hpp"

#include <string>
#include <utility>

namespace serialforge {

namespace {

std::uint32_t ceil_log2(std::size_t v) noexcept
{
    std::uint32_t d = 0;
    while ((std::size_t{1} << d) < v) ++d;
    return d;
}

class Builder {
public:
    Builder(Netlist& net, std::uint32_t depth) : net_(net), depth_(depth) {}

    /// Reduces live leaves (in increasing row order) over a full tree of
    /// `depth_` levels.
    std::optional<NodeId> reduce(std::vector<std::pair<std::uint32_t, NodeId>>& level, PlaneSummary& summary)
    {
        std::vector<std::pair<std::uint32_t, NodeId>> next;
        for (std::uint32_t d = 0; d < depth_; ++d) {
            next.clear();
            for (std::size_t i = 0; i < level.size(); ++i) {
                const std::uint32_t parent = level[i].first >> 1;
                if (i + 1 < level.size() && (level[i + 1].first >> 1) == parent) {
                    next.emplace_back(parent, net_.add(NodeKind::SerialAdder, {level[i].second, level[i + 1].second}));
                    ++summary.tree_adders;
                    ++i;
                } else {
                    next.emplace_back(parent, net_.add(NodeKind::DelayFF, {level[i].second}));
                    ++summary.tree_delay_ffs;
                }
            }
            level.swap(next);
        }
        if (level.empty()) return std::nullopt;
        return level.front().second;
    }

    std::optional<NodeId> link(std::optional<NodeId> plane, std::optional<NodeId> upper)
    {
        if (plane && upper) return net_.add(NodeKind::SerialAdder, {*plane, *upper});
        if (plane) return net_.add(NodeKind::DelayFF, {*plane});
        if (upper) return net_.add(NodeKind::DelayFF, {*upper});
        return std::nullopt;
    }

private:
    Netlist& net_;
    std::uint32_t depth_;
};

}  // namespace

Compilation compile_detailed(const MatrixPair& pair, unsigned input_bitwidth, CompileOptions options)
{
    const IntMatrix& p = pair.p;
    const IntMatrix& n = pair.n;
    if (p.rows() != n.rows() || p.cols() != n.cols() || p.bitwidth() != n.bitwidth())
        throw ArgumentError("matrix pair halves must share dimensions and bit-width");
    if (p.is_signed() || n.is_signed()) throw ArgumentError("matrix pair halves must be unsigned");
    if (input_bitwidth < 1 || input_bitwidth > 32) throw ArgumentError("input bit-width must be in [1, 32]");

    NetlistMeta meta;
    meta.rows = static_cast<std::uint32_t>(p.rows());
    meta.cols = static_cast<std::uint32_t>(p.cols());
    meta.input_bitwidth = input_bitwidth;
    meta.weight_bitwidth = p.bitwidth();
    meta.tree_depth = ceil_log2(p.rows());
    meta.extension = options.extension;

    Compilation out{Netlist(meta), {}};
    Netlist& net = out.netlist;
    for (std::uint32_t r = 0; r < meta.rows; ++r) net.add(NodeKind::InputTap, {}, r);

    Builder builder(net, meta.tree_depth);
    std::vector<std::pair<std::uint32_t, NodeId>> leaves;
    leaves.reserve(meta.rows);

    for (std::uint32_t c = 0; c < meta.cols; ++c) {
        std::array<std::optional<NodeId>, 2> chains;
        for (PairHalf half : {PairHalf::P, PairHalf::N}) {
            const IntMatrix& m = half == PairHalf::P ? p : n;
            std::vector<std::optional<NodeId>> roots(meta.weight_bitwidth);
            for (std::uint32_t k = 0; k < meta.weight_bitwidth; ++k) {
                PlaneSummary summary;
                summary.col = c;
                summary.half = half;
                summary.bit = k;
                leaves.clear();
                for (std::uint32_t r = 0; r < meta.rows; ++r)
                    if ((m(r, c) >> k) & 1) leaves.emplace_back(r, net.taps()[r]);
                summary.live_leaves = static_cast<std::uint32_t>(leaves.size());
                roots[k] = builder.reduce(leaves, summary);
                summary.root = roots[k];
                out.planes.push_back(summary);
            }
            std::optional<NodeId> chain;
            for (std::uint32_t k = meta.weight_bitwidth; k-- > 0;) chain = builder.link(roots[k], chain);
            chains[static_cast<std::size_t>(half)] = chain;
        }

        NodeId result;
        const auto& [pos, neg] = chains;
        if (pos || neg) {
            const NodeId a = pos ? *pos : net.const_zero();
            const NodeId b = neg ? *neg : net.const_zero();
            result = net.add(NodeKind::SerialSubtractor, {a, b});
        } else {
            result = net.const_zero();
        }
        net.add(NodeKind::OutputCapture, {result}, c);
    }
    return out;
}

Netlist compile(const MatrixPair& pair, unsigned input_bitwidth, CompileOptions options)
{
    return std::move(compile_detailed(pair, input_bitwidth, options).netlist);
}

}  // namespace serialforge
