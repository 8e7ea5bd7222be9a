#ifndef TPP_ISA_HPP
#define TPP_ISA_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tpp/errors.hpp"

namespace tpp {

// All switch words are 16-bit; wider counters are exposed as lo/hi word pairs.
using Word = uint16_t;

constexpr std::size_t kHeaderBytes = 12;
constexpr std::size_t kInstructionBytes = 4;
constexpr std::size_t kMaxInstructions = 5;
constexpr uint16_t kTppEtherType = 0x6666;
constexpr uint16_t kTppUdpPort = 0x6666;

enum class Opcode : uint8_t {
  Load = 1,
  Store = 2,
  Push = 3,
  Pop = 4,
  Cstore = 5,
  Cexec = 6,
};

const char* opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(const std::string& name);

inline bool is_write(Opcode op) { return op == Opcode::Store || op == Opcode::Pop || op == Opcode::Cstore; }
inline bool is_conditional(Opcode op) { return op == Opcode::Cstore || op == Opcode::Cexec; }

// One 4-byte instruction.  byte0 = opcode, bytes1-2 = switch address
// (big-endian), byte3 = packet operand:
//   LOAD/STORE: bit7 clear, low 7 bits = hop-relative word offset
//   PUSH/POP:   unused (zero)
//   CSTORE:     (pre_offset << 4) | post_offset
//   CEXEC:      hop-relative word offset of a 4-word (mask, value) block
struct Instruction {
  Opcode op;
  uint16_t addr = 0;
  uint8_t arg = 0;

  uint8_t hop_offset() const { return arg & 0x7f; }
  uint8_t pre_offset() const { return arg >> 4; }
  uint8_t post_offset() const { return arg & 0x0f; }

  bool operator==(const Instruction&) const = default;
};

Instruction make_load(uint16_t addr, uint8_t hop_offset);
Instruction make_store(uint16_t addr, uint8_t hop_offset);
Instruction make_push(uint16_t addr);
Instruction make_pop(uint16_t addr);
Instruction make_cstore(uint16_t addr, uint8_t pre, uint8_t post);
Instruction make_cexec(uint16_t addr, uint8_t block_offset);

// Header flag bits (low nibble of byte 0).
constexpr uint8_t kFlagExecError = 0x1;
constexpr uint8_t kFlagWriteSkipped = 0x2;

struct TppHeader {
  uint8_t version = 1;
  uint8_t flags = 0;
  uint8_t insn_count = 0;
  uint8_t hop_size_words = 0;
  uint8_t hop_index = 0;
  uint16_t sp = 0;       // byte offset into packet memory
  uint16_t mem_len = 0;  // packet memory bytes
  uint16_t session_id = 0;
  uint16_t checksum = 0;  // recomputed on encode

  bool operator==(const TppHeader&) const = default;
};

enum class Encap : uint8_t {
  Standalone,   // UDP dst port 0x6666
  Transparent,  // ethertype 0x6666 wrapping an inner frame
};

struct TppProgram {
  TppHeader header;
  std::vector<Instruction> instructions;
  std::vector<uint8_t> memory;
  Encap encap = Encap::Standalone;

  std::size_t wire_size() const {
    return kHeaderBytes + kInstructionBytes * instructions.size() + memory.size();
  }

  Word mem_word(std::size_t byte_offset) const;
  void set_mem_word(std::size_t byte_offset, Word v);

  // Hop-address law: slot byte address = hop_index * hop_size_words * 2 + 2 * offset.
  std::size_t hop_slot_addr(unsigned offset) const {
    return std::size_t(header.hop_index) * header.hop_size_words * 2 + 2u * offset;
  }

  bool operator==(const TppProgram& other) const {
    return header == other.header && instructions == other.instructions && memory == other.memory;
  }
};

// Bare TPP block codec (header + instructions + packet memory).
// decode(encode(p)) == p, bit exact; throws TruncatedPacket / ChecksumMismatch /
// BadMagic on malformed input.
std::vector<uint8_t> encode(const TppProgram& p);
TppProgram decode(std::span<const uint8_t> bytes);

// Ones-complement sum over header (checksum field zeroed) and instructions.
uint16_t header_checksum(const TppHeader& h, const std::vector<Instruction>& insns);

}  // namespace tpp

#endif
