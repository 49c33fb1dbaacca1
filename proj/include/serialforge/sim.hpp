#pragma once

// Cycle-accurate simulation of a bit-serial netlist.
//
// Each input row streams S = BW_i + BW_w + E bits, two's complement LSb
// first, with the sign bit repeated after the input width. Results appear
// at cycle `output_offset()` and S bits are captured per column, so the
// captured word equals the exact dot-product difference modulo 2^S.
//
// Registers update with two-phase synchronous semantics: every node reads
// the current outputs of its inputs, then all registers commit. Inputs are
// bit-sliced, so up to 64 independent vectors share one pass.

#include "serialforge/netlist.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace serialforge {

struct SimOptions {
    /// Overrides the netlist's default extension when set.
    std::optional<unsigned> extension;
    /// Record per-cycle register state (single-vector simulate only).
    bool trace = false;
};

struct TraceRow {
    std::uint32_t cycle = 0;
    NodeId node = 0;
    std::uint8_t sum = 0;
    std::uint8_t carry = 0;
};

struct SimResult {
    /// Captured S-bit words read as two's complement, one per column.
    std::vector<std::int64_t> outputs;
    /// Cycles from the first input bit to the last captured output bit, inclusive.
    std::uint32_t latency_cycles = 0;
    /// S, the number of streamed and captured bits.
    std::uint32_t stream_bits = 0;
    std::vector<TraceRow> trace;
};

struct BatchResult {
    std::vector<SimResult> results;
    /// Sequential initiation: batch size times the per-vector latency.
    std::uint64_t total_cycles = 0;
};

inline constexpr unsigned kMaxStreamBits = 64;

/// S for a netlist under an extension.
std::uint32_t stream_bits(const NetlistMeta& meta, unsigned extension) noexcept;

/// BW_i + BW_w + ceil(log2 R) + 2 + E.
std::uint32_t expected_latency(const NetlistMeta& meta, unsigned extension) noexcept;

SimResult simulate(const Netlist& net, std::span<const std::int64_t> input, SimOptions options = {});

BatchResult simulate_batch(const Netlist& net, std::span<const std::vector<std::int64_t>> inputs,
                           SimOptions options = {});

/// Writes `cycle,node_id,sum,carry` with a header row.
void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

/// Reduces a value to S-bit two's complement.
std::int64_t wrap_to_bits(std::int64_t value, unsigned bits) noexcept;

/// One cycle of the standalone bit-serial adder.
struct AdderCycle {
    unsigned cycle = 0;  // 1-based
    unsigned carry_in = 0;
    unsigned a = 0;
    unsigned b = 0;
    unsigned sum = 0;
    unsigned carry_out = 0;
    /// Result shift register after this cycle, MSb on the left; sums enter
    /// from the left and shift right.
    std::string result;
};

struct AdderTrace {
    std::vector<AdderCycle> cycles;
    /// Value held by the result register at the end, (a + b) mod 2^cycles.
    std::uint64_t result = 0;
};

AdderTrace adder_trace(std::uint64_t a, std::uint64_t b, unsigned cycles);

/// Table with header `Cycle C_in A B S C_out Result`, one line per cycle,
/// then `Result <bits> = <decimal>`.
std::string format_adder_trace(const AdderTrace& trace);

}  // namespace serialforge
