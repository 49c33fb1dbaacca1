#include "serialforge/sim.hpp"

#include "serialforge/error.hpp"

#include <algorithm>
#include <sstream>

namespace serialforge {

namespace {

struct Gate {
    NodeKind kind;
    NodeId id;
    NodeId a;
    NodeId b;
};

class LaneEngine {
public:
    LaneEngine(const Netlist& net, unsigned extension) : net_(net), meta_(net.meta())
    {
        bits_ = stream_bits(meta_, extension);
        if (bits_ > kMaxStreamBits)
            throw ArgumentError("stream width BW_i + BW_w + E = " + std::to_string(bits_) + " exceeds "
                                + std::to_string(kMaxStreamBits));
        for (const Node& node : net.nodes()) {
            switch (node.kind) {
            case NodeKind::SerialAdder:
            case NodeKind::SerialSubtractor:
                gates_.push_back({node.kind, node.id, node.inputs[0], node.inputs[1]});
                break;
            case NodeKind::DelayFF: gates_.push_back({node.kind, node.id, node.inputs[0], 0}); break;
            default: break;
            }
        }
        value_.assign(net.size(), 0);
        next_.assign(gates_.size(), 0);
        carry_.assign(net.size(), 0);
    }

    std::uint32_t bits() const noexcept { return bits_; }

    /// Runs up to 64 vectors, one per lane. Returns per-lane outputs and
    /// sets `latency` to the measured first-input to last-capture span.
    std::vector<std::vector<std::int64_t>> run(std::span<const std::vector<std::int64_t>> lanes,
                                               std::uint32_t& latency, std::vector<TraceRow>* trace)
    {
        const std::uint32_t rows = meta_.rows;
        const std::uint32_t cols = meta_.cols;
        const std::uint32_t offset = meta_.output_offset();
        const std::uint32_t total = offset + bits_;

        std::fill(value_.begin(), value_.end(), 0);
        std::fill(carry_.begin(), carry_.end(), 0);
        for (const Gate& g : gates_)
            if (g.kind == NodeKind::SerialSubtractor) carry_[g.id] = ~std::uint64_t{0};

        // Bit t of every row, lanes packed; bits past 63 repeat the sign.
        std::vector<std::uint64_t> tap_words(static_cast<std::size_t>(rows) * total, 0);
        for (std::size_t lane = 0; lane < lanes.size(); ++lane) {
            const auto& in = lanes[lane];
            for (std::uint32_t r = 0; r < rows; ++r) {
                const std::int64_t x = in[r];
                std::uint64_t* row = &tap_words[static_cast<std::size_t>(r) * total];
                for (std::uint32_t t = 0; t < total; ++t)
                    row[t] |= static_cast<std::uint64_t>((x >> std::min<std::uint32_t>(t, 63)) & 1) << lane;
            }
        }

        std::vector<std::uint64_t> captured(static_cast<std::size_t>(cols) * bits_, 0);
        const auto& taps = net_.taps();
        const auto& outs = net_.outputs();
        std::int64_t first_input = -1, last_capture = -1;

        for (std::uint32_t t = 0; t < total; ++t) {
            for (std::uint32_t r = 0; r < rows; ++r) value_[taps[r]] = tap_words[static_cast<std::size_t>(r) * total + t];
            if (first_input < 0) first_input = t;

            if (t >= offset) {
                const std::uint32_t bit = t - offset;
                for (std::uint32_t c = 0; c < cols; ++c)
                    captured[static_cast<std::size_t>(c) * bits_ + bit] = value_[net_.node(outs[c]).inputs[0]];
                last_capture = t;
            }

            if (trace) {
                for (const Gate& g : gates_)
                    trace->push_back({t, g.id, static_cast<std::uint8_t>(value_[g.id] & 1),
                                      static_cast<std::uint8_t>(g.kind == NodeKind::DelayFF ? 0 : carry_[g.id] & 1)});
            }

            for (std::size_t i = 0; i < gates_.size(); ++i) {
                const Gate& g = gates_[i];
                const std::uint64_t a = value_[g.a];
                switch (g.kind) {
                case NodeKind::DelayFF: next_[i] = a; break;
                case NodeKind::SerialAdder:
                case NodeKind::SerialSubtractor: {
                    const std::uint64_t b = g.kind == NodeKind::SerialAdder ? value_[g.b] : ~value_[g.b];
                    const std::uint64_t c = carry_[g.id];
                    const std::uint64_t half = a ^ b;
                    next_[i] = half ^ c;
                    carry_[g.id] = (a & b) | (c & half);
                    break;
                }
                default: break;
                }
            }
            for (std::size_t i = 0; i < gates_.size(); ++i) value_[gates_[i].id] = next_[i];
        }
        latency = static_cast<std::uint32_t>(last_capture - first_input + 1);

        std::vector<std::vector<std::int64_t>> results(lanes.size(), std::vector<std::int64_t>(cols));
        for (std::size_t lane = 0; lane < lanes.size(); ++lane) {
            for (std::uint32_t c = 0; c < cols; ++c) {
                std::uint64_t word = 0;
                for (std::uint32_t bit = 0; bit < bits_; ++bit)
                    word |= ((captured[static_cast<std::size_t>(c) * bits_ + bit] >> lane) & 1) << bit;
                results[lane][c] = wrap_to_bits(static_cast<std::int64_t>(word), bits_);
            }
        }
        return results;
    }

private:
    const Netlist& net_;
    const NetlistMeta& meta_;
    std::uint32_t bits_ = 0;
    std::vector<Gate> gates_;
    std::vector<std::uint64_t> value_;
    std::vector<std::uint64_t> next_;
    std::vector<std::uint64_t> carry_;
};

void check_input(const NetlistMeta& meta, std::span<const std::int64_t> input)
{
    if (input.size() != meta.rows)
        throw ArgumentError("input length " + std::to_string(input.size()) + " != netlist rows "
                            + std::to_string(meta.rows));
    const std::int64_t lo = -(std::int64_t{1} << (meta.input_bitwidth - 1));
    const std::int64_t hi = (std::int64_t{1} << (meta.input_bitwidth - 1)) - 1;
    for (std::size_t i = 0; i < input.size(); ++i)
        if (input[i] < lo || input[i] > hi)
            throw ArgumentError("input[" + std::to_string(i) + "] = " + std::to_string(input[i]) + " does not fit "
                                + std::to_string(meta.input_bitwidth) + "-bit signed");
}

}  // namespace

std::uint32_t stream_bits(const NetlistMeta& meta, unsigned extension) noexcept
{
    return meta.input_bitwidth + meta.weight_bitwidth + extension;
}

std::uint32_t expected_latency(const NetlistMeta& meta, unsigned extension) noexcept
{
    return stream_bits(meta, extension) + meta.tree_depth + 2;
}

std::int64_t wrap_to_bits(std::int64_t value, unsigned bits) noexcept
{
    if (bits >= 64) return value;
    const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
    std::uint64_t word = static_cast<std::uint64_t>(value) & mask;
    if (word >> (bits - 1)) word |= ~mask;
    return static_cast<std::int64_t>(word);
}

SimResult simulate(const Netlist& net, std::span<const std::int64_t> input, SimOptions options)
{
    check_input(net.meta(), input);
    LaneEngine engine(net, options.extension.value_or(net.meta().extension));
    const std::vector<std::int64_t> lane(input.begin(), input.end());
    SimResult result;
    result.stream_bits = engine.bits();
    auto outputs = engine.run(std::span(&lane, 1), result.latency_cycles, options.trace ? &result.trace : nullptr);
    result.outputs = std::move(outputs.front());
    return result;
}

BatchResult simulate_batch(const Netlist& net, std::span<const std::vector<std::int64_t>> inputs, SimOptions options)
{
    for (const auto& v : inputs) check_input(net.meta(), v);
    if (options.trace) throw ArgumentError("tracing is only supported for single-vector simulation");
    LaneEngine engine(net, options.extension.value_or(net.meta().extension));
    BatchResult batch;
    batch.results.reserve(inputs.size());
    for (std::size_t begin = 0; begin < inputs.size(); begin += 64) {
        const auto chunk = inputs.subspan(begin, std::min<std::size_t>(64, inputs.size() - begin));
        std::uint32_t latency = 0;
        auto outputs = engine.run(chunk, latency, nullptr);
        for (auto& out : outputs) {
            SimResult r;
            r.outputs = std::move(out);
            r.latency_cycles = latency;
            r.stream_bits = engine.bits();
            batch.results.push_back(std::move(r));
        }
    }
    for (const auto& r : batch.results) batch.total_cycles += r.latency_cycles;
    return batch;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace)
{
    out << "cycle,node_id,sum,carry\n";
    for (const TraceRow& row : trace)
        out << row.cycle << ',' << row.node << ',' << unsigned{row.sum} << ',' << unsigned{row.carry} << '\n';
}

AdderTrace adder_trace(std::uint64_t a, std::uint64_t b, unsigned cycles)
{
    if (cycles < 1 || cycles > 64) throw ArgumentError("adder trace needs 1 to 64 cycles");
    AdderTrace trace;
    std::string reg(cycles, '0');
    unsigned carry = 0;
    for (unsigned i = 0; i < cycles; ++i) {
        AdderCycle row;
        row.cycle = i + 1;
        row.carry_in = carry;
        row.a = static_cast<unsigned>((a >> i) & 1);
        row.b = static_cast<unsigned>((b >> i) & 1);
        row.sum = row.a ^ row.b ^ carry;
        row.carry_out = (row.a & row.b) | (carry & (row.a ^ row.b));
        carry = row.carry_out;
        reg = static_cast<char>('0' + row.sum) + reg.substr(0, cycles - 1);
        row.result = reg;
        trace.result |= std::uint64_t{row.sum} << i;
        trace.cycles.push_back(std::move(row));
    }
    return trace;
}

std::string format_adder_trace(const AdderTrace& trace)
{
    std::ostringstream out;
    out << "Cycle C_in A B S C_out Result\n";
    for (const AdderCycle& row : trace.cycles)
        out << row.cycle << ' ' << row.carry_in << ' ' << row.a << ' ' << row.b << ' ' << row.sum << ' '
            << row.carry_out << ' ' << row.result << '\n';
    out << "Result " << (trace.cycles.empty() ? std::string{} : trace.cycles.back().result) << " = " << trace.result
        << '\n';
    return out.str();
}

}  // namespace serialforge
