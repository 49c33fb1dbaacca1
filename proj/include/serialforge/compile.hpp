#pragma once

// Matrix-to-netlist compiler for the bit-serial vector-matrix multiplier.
//
// Per column, per half of the pair (P then N) and per weight bit k, the rows
// whose weight has bit k set are reduced by a balanced binary tree of depth
// ceil(log2 R) laid over the row indices. Set bits connect their InputTap
// straight to the tree (no AND gate); a tree position with two live inputs
// is a SerialAdder, with one a DelayFF, with none it does not exist.
//
// Bit planes are combined MSb first: chain_k = plane_k + 2 * chain_{k+1},
// where the factor 2 is the extra register the higher link has passed
// through. The MSb link has no upper input and is a DelayFF, as is any link
// whose plane is empty. The P and N chains then meet in one
// SerialSubtractor, feeding the column's OutputCapture.

#include "serialforge/matrix.hpp"
#include "serialforge/netlist.hpp"

#include <optional>
#include <vector>

namespace serialforge {

struct CompileOptions {
    /// Default extra sign-extension cycles recorded in the netlist meta.
    unsigned extension = 0;
};

enum class PairHalf : std::uint8_t { P = 0, N = 1 };

/// Reduction tree of one (column, half, bit) plane.
struct PlaneSummary {
    std::uint32_t col = 0;
    PairHalf half = PairHalf::P;
    std::uint32_t bit = 0;
    std::uint32_t live_leaves = 0;
    std::uint32_t tree_adders = 0;
    std::uint32_t tree_delay_ffs = 0;
    /// Root of the tree, absent when the plane is empty.
    std::optional<NodeId> root;
};

struct Compilation {
    Netlist netlist;
    std::vector<PlaneSummary> planes;
};

Compilation compile_detailed(const MatrixPair& pair, unsigned input_bitwidth, CompileOptions options = {});

Netlist compile(const MatrixPair& pair, unsigned input_bitwidth, CompileOptions options = {});

}  // namespace serialforge
