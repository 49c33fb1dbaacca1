#include "serialforge/netlist.hpp"

#include "serialforge/error.hpp"
#include "serialforge/matrix_io.hpp"

#include <algorithm>
#include <sstream>

namespace serialforge {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {
    "SerialAdder", "SerialSubtractor", "DelayFF", "InputTap", "ConstZero", "OutputCapture"};

bool has_arg(NodeKind kind) noexcept { return kind == NodeKind::InputTap || kind == NodeKind::OutputCapture; }

std::uint32_t ceil_log2(std::uint32_t v) noexcept
{
    std::uint32_t d = 0;
    while ((std::uint64_t{1} << d) < v) ++d;
    return d;
}

}  // namespace

std::string_view to_string(NodeKind kind) noexcept { return kKindNames[static_cast<std::size_t>(kind)]; }

NodeKind node_kind_from_string(std::string_view name)
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<NodeKind>(i);
    throw ParseError("unknown node kind \"" + std::string(name) + "\"");
}

unsigned arity(NodeKind kind) noexcept
{
    switch (kind) {
    case NodeKind::SerialAdder:
    case NodeKind::SerialSubtractor: return 2;
    case NodeKind::DelayFF:
    case NodeKind::OutputCapture: return 1;
    case NodeKind::InputTap:
    case NodeKind::ConstZero: return 0;
    }
    return 0;
}

Netlist::Netlist(NetlistMeta meta) : meta_(meta)
{
    if (meta_.rows == 0 || meta_.cols == 0) throw ArgumentError("netlist dimensions must be positive");
    if (meta_.tree_depth != ceil_log2(meta_.rows))
        throw ArgumentError("netlist tree_depth must equal ceil(log2(rows))");
    outputs_.assign(meta_.cols, 0);
    taps_.assign(meta_.rows, 0);
}

NodeId Netlist::add(NodeKind kind, std::array<NodeId, 2> inputs, std::uint32_t arg)
{
    const auto id = static_cast<NodeId>(nodes_.size());
    Node node;
    node.id = id;
    node.kind = kind;
    node.arg = has_arg(kind) ? arg : 0;
    std::uint32_t deepest = 0;
    for (unsigned i = 0; i < arity(kind); ++i) {
        if (inputs[i] >= id) throw ArgumentError("netlist input must reference an existing node");
        node.inputs[i] = inputs[i];
        deepest = std::max(deepest, nodes_[inputs[i]].stage);
    }
    node.stage = arity(kind) == 0 ? 0 : deepest + 1;
    if (kind == NodeKind::InputTap) {
        if (arg >= meta_.rows) throw ArgumentError("InputTap row out of range");
        taps_[arg] = id;
    } else if (kind == NodeKind::OutputCapture) {
        if (arg >= meta_.cols) throw ArgumentError("OutputCapture column out of range");
        outputs_[arg] = id;
    } else if (kind == NodeKind::ConstZero && const_zero_ < 0) {
        const_zero_ = id;
    }
    nodes_.push_back(node);
    return id;
}

NodeId Netlist::const_zero()
{
    if (const_zero_ < 0) return add(NodeKind::ConstZero);
    return static_cast<NodeId>(const_zero_);
}

void Netlist::validate() const
{
    std::vector<int> tap_seen(meta_.rows, 0), out_seen(meta_.cols, 0);
    for (const Node& node : nodes_) {
        std::uint32_t deepest = 0;
        for (NodeId in : node.input_span()) {
            if (in >= node.id) throw ArgumentError("node " + std::to_string(node.id) + " breaks topological order");
            if (nodes_[in].kind == NodeKind::OutputCapture)
                throw ArgumentError("OutputCapture cannot drive node " + std::to_string(node.id));
            deepest = std::max(deepest, nodes_[in].stage);
        }
        const std::uint32_t expected = arity(node.kind) == 0 ? 0 : deepest + 1;
        if (node.stage != expected) throw ArgumentError("node " + std::to_string(node.id) + " has inconsistent stage");
        if (node.kind == NodeKind::InputTap) {
            if (node.arg >= meta_.rows) throw ArgumentError("InputTap row out of range");
            ++tap_seen[node.arg];
        } else if (node.kind == NodeKind::OutputCapture) {
            if (node.arg >= meta_.cols) throw ArgumentError("OutputCapture column out of range");
            ++out_seen[node.arg];
        }
    }
    for (std::size_t r = 0; r < tap_seen.size(); ++r)
        if (tap_seen[r] != 1) throw ArgumentError("row " + std::to_string(r) + " needs exactly one InputTap");
    for (std::size_t c = 0; c < out_seen.size(); ++c)
        if (out_seen[c] != 1) throw ArgumentError("column " + std::to_string(c) + " needs exactly one OutputCapture");
}

bool operator==(const Netlist& a, const Netlist& b)
{
    if (!(a.meta_ == b.meta_) || a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
        const Node& x = a.nodes_[i];
        const Node& y = b.nodes_[i];
        if (x.kind != y.kind || x.arg != y.arg || x.stage != y.stage) return false;
        for (unsigned k = 0; k < arity(x.kind); ++k)
            if (x.inputs[k] != y.inputs[k]) return false;
    }
    return true;
}

NetlistStats stats(const Netlist& n) noexcept
{
    NetlistStats s;
    for (const Node& node : n.nodes()) {
        switch (node.kind) {
        case NodeKind::SerialAdder: ++s.adders; break;
        case NodeKind::SerialSubtractor: ++s.subtractors; break;
        case NodeKind::DelayFF: ++s.delay_ffs; break;
        default: break;
        }
    }
    s.total_nodes = n.size();
    return s;
}

nlohmann::json netlist_to_json(const Netlist& n)
{
    const NetlistMeta& m = n.meta();
    nlohmann::json nodes = nlohmann::json::array();
    for (const Node& node : n.nodes()) {
        nlohmann::json entry{{"id", node.id}, {"kind", to_string(node.kind)}};
        if (has_arg(node.kind)) entry["args"] = {node.arg};
        entry["inputs"] = std::vector<NodeId>(node.input_span().begin(), node.input_span().end());
        nodes.push_back(std::move(entry));
    }
    return nlohmann::json{{"meta",
                           {{"rows", m.rows},
                            {"cols", m.cols},
                            {"input_bitwidth", m.input_bitwidth},
                            {"weight_bitwidth", m.weight_bitwidth},
                            {"tree_depth", m.tree_depth},
                            {"extra_extension", m.extension}}},
                          {"nodes", std::move(nodes)}};
}

Netlist netlist_from_json(const nlohmann::json& j)
{
    try {
        const auto& jm = j.at("meta");
        NetlistMeta meta;
        meta.rows = jm.at("rows").get<std::uint32_t>();
        meta.cols = jm.at("cols").get<std::uint32_t>();
        meta.input_bitwidth = jm.at("input_bitwidth").get<std::uint32_t>();
        meta.weight_bitwidth = jm.at("weight_bitwidth").get<std::uint32_t>();
        meta.tree_depth = jm.at("tree_depth").get<std::uint32_t>();
        meta.extension = jm.value("extra_extension", std::uint32_t{0});
        Netlist out(meta);

        const auto& jnodes = j.at("nodes");
        std::vector<const nlohmann::json*> by_id(jnodes.size(), nullptr);
        for (const auto& entry : jnodes) {
            const auto id = entry.at("id").get<std::size_t>();
            if (id >= by_id.size() || by_id[id]) throw ParseError("node ids must be unique and dense");
            by_id[id] = &entry;
        }
        for (const auto* entry : by_id) {
            const NodeKind kind = node_kind_from_string(entry->at("kind").get<std::string>());
            const auto inputs = entry->value("inputs", std::vector<NodeId>{});
            if (inputs.size() != arity(kind))
                throw ParseError("node " + entry->at("id").dump() + " has wrong input count");
            std::array<NodeId, 2> in{};
            std::copy(inputs.begin(), inputs.end(), in.begin());
            std::uint32_t arg = 0;
            if (has_arg(kind)) {
                const auto args = entry->at("args").get<std::vector<std::uint32_t>>();
                if (args.size() != 1) throw ParseError("node " + entry->at("id").dump() + " needs one arg");
                arg = args[0];
            }
            out.add(kind, in, arg);
        }
        out.validate();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed netlist: ") + e.what());
    }
}

void export_netlist(const Netlist& n, const std::filesystem::path& path)
{
    write_text_file(path, netlist_to_json(n).dump() + "\n");
}

Netlist import_netlist(const std::filesystem::path& path)
{
    return netlist_from_json(parse_json(read_text_file(path)));
}

std::string structural_dump(const Netlist& n)
{
    std::ostringstream out;
    for (const Node& node : n.nodes()) {
        out << "NODE " << node.id << ' ' << to_string(node.kind);
        if (has_arg(node.kind)) out << '(' << node.arg << ')';
        for (unsigned k = 0; k < 2; ++k) {
            out << ' ';
            if (k < arity(node.kind)) out << node.inputs[k];
            else out << '-';
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace serialforge
