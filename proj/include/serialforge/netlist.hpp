#pragma once

// Bit-serial netlist: a DAG of single-bit registered primitives.
//
// Every SerialAdder, SerialSubtractor and DelayFF registers its output, so a
// value read at cycle t was computed from its inputs at cycle t-1. InputTap
// and ConstZero are combinational sources; OutputCapture is the serial
// result shift register of one column. `stage` is the structural depth
// (1 + max over inputs, sources at 0).

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace serialforge {

enum class NodeKind : std::uint8_t { SerialAdder, SerialSubtractor, DelayFF, InputTap, ConstZero, OutputCapture };

std::string_view to_string(NodeKind kind) noexcept;
NodeKind node_kind_from_string(std::string_view name);

/// Number of inputs a node of this kind takes.
unsigned arity(NodeKind kind) noexcept;

using NodeId = std::uint32_t;

struct Node {
    NodeId id = 0;
    NodeKind kind = NodeKind::ConstZero;
    std::array<NodeId, 2> inputs{};
    /// Row for InputTap, column for OutputCapture, unused otherwise.
    std::uint32_t arg = 0;
    std::uint32_t stage = 0;

    std::span<const NodeId> input_span() const noexcept { return {inputs.data(), arity(kind)}; }
};

struct NetlistMeta {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t input_bitwidth = 0;
    std::uint32_t weight_bitwidth = 0;
    /// ceil(log2 rows).
    std::uint32_t tree_depth = 0;
    /// Extra sign-extension cycles streamed by default.
    std::uint32_t extension = 0;

    /// Cycle at which every column's result LSb reaches its capture
    /// register: tree depth, one accumulate cycle, one subtract cycle.
    std::uint32_t output_offset() const noexcept { return tree_depth + 2; }

    friend bool operator==(const NetlistMeta&, const NetlistMeta&) = default;
};

class Netlist {
public:
    explicit Netlist(NetlistMeta meta);

    const NetlistMeta& meta() const noexcept { return meta_; }
    std::span<const Node> nodes() const noexcept { return nodes_; }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// OutputCapture node of each column, indexed by column.
    const std::vector<NodeId>& outputs() const noexcept { return outputs_; }
    /// InputTap node of each row, indexed by row.
    const std::vector<NodeId>& taps() const noexcept { return taps_; }

    /// Appends a node whose inputs already exist; returns its id.
    NodeId add(NodeKind kind, std::array<NodeId, 2> inputs = {}, std::uint32_t arg = 0);

    /// Shared ConstZero source, created on first use.
    NodeId const_zero();

    /// Full structural check: arity, ids, acyclicity (inputs precede users),
    /// stage consistency, one InputTap per row and one OutputCapture per
    /// column. Throws ArgumentError.
    void validate() const;

    friend bool operator==(const Netlist& a, const Netlist& b);

private:
    NetlistMeta meta_;
    std::vector<Node> nodes_;
    std::vector<NodeId> outputs_;
    std::vector<NodeId> taps_;
    std::int64_t const_zero_ = -1;
};

struct NetlistStats {
    std::uint64_t adders = 0;
    std::uint64_t subtractors = 0;
    std::uint64_t delay_ffs = 0;
    std::uint64_t total_nodes = 0;

    friend bool operator==(const NetlistStats&, const NetlistStats&) = default;
};

NetlistStats stats(const Netlist& n) noexcept;

nlohmann::json netlist_to_json(const Netlist& n);
Netlist netlist_from_json(const nlohmann::json& j);

void export_netlist(const Netlist& n, const std::filesystem::path& path);
Netlist import_netlist(const std::filesystem::path& path);

/// One `NODE <id> <KIND> <in0> <in1>` line per node in id order. Kinds with
/// an argument print as `InputTap(<row>)` / `OutputCapture(<col>)`; absent
/// inputs print as `-`.
std::string structural_dump(const Netlist& n);

}  // namespace serialforge
