#ifndef TPP_ASSEMBLER_HPP
#define TPP_ASSEMBLER_HPP

#include <string>

#include "tpp/isa.hpp"

namespace tpp {

struct AssembleOptions {
  // Wire budget for the encoded TPP block (MTU minus encapsulation headers).
  std::size_t max_bytes = 1458;
};

// Assembles newline-separated instructions:
//
//   # comment
//   .hopsize 3        header fields (all optional; sensible defaults inferred)
//   .hops 5
//   .memlen 30
//   .session 7
//   .sp 0
//   .hopindex 0
//   .flags 0
//   PUSH [Queue:QueueOccupancy]
//   LOAD [Switch:SwitchID], [Packet:Hop[1]]
//   CSTORE [Link:AppSpecific_0], [Packet:Hop[0]], [Packet:Hop[1]]
//   PacketMemory:
//   Hop0: 3, 4, 80
//
// Switch operands are mnemonics or raw hex addresses ([0xb000]).  Opcodes are
// case-insensitive.  Hop values in the PacketMemory section are 16-bit words,
// decimal or 0x-hex.  When .hopsize/.hops are omitted they are inferred from
// the instructions (5 hops by default).
TppProgram assemble(const std::string& source, const AssembleOptions& opts = {});

// Canonical text form; assemble(disassemble(p)) encodes bit-identically.
std::string disassemble(const TppProgram& p);

}  // namespace tpp

#endif
