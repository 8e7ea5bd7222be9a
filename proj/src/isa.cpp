#include "tpp/isa.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace tpp {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UnknownMnemonic: return "UnknownMnemonic";
    case Errc::NoInstructions: return "NoInstructions";
    case Errc::TooManyInstructions: return "TooManyInstructions";
    case Errc::BadOperandArity: return "BadOperandArity";
    case Errc::MemoryTooLarge: return "MemoryTooLarge";
    case Errc::BadMagic: return "BadMagic";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::TruncatedPacket: return "TruncatedPacket";
    case Errc::BadOperand: return "BadOperand";
    case Errc::ParseError: return "ParseError";
    case Errc::RoutingLoop: return "RoutingLoop";
    case Errc::DanglingLink: return "DanglingLink";
    case Errc::PolicyViolation: return "PolicyViolation";
    case Errc::DecodeError: return "DecodeError";
    case Errc::MtuExceeded: return "MtuExceeded";
    case Errc::Exhausted: return "Exhausted";
    case Errc::Unsplittable: return "Unsplittable";
    case Errc::EmptyPath: return "EmptyPath";
    case Errc::StaleSamples: return "StaleSamples";
    case Errc::Saturated: return "Saturated";
    case Errc::MemoryOverflow: return "MemoryOverflow";
    case Errc::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Load: return "LOAD";
    case Opcode::Store: return "STORE";
    case Opcode::Push: return "PUSH";
    case Opcode::Pop: return "POP";
    case Opcode::Cstore: return "CSTORE";
    case Opcode::Cexec: return "CEXEC";
  }
  return "?";
}

std::optional<Opcode> opcode_from_name(const std::string& name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "LOAD") return Opcode::Load;
  if (up == "STORE") return Opcode::Store;
  if (up == "PUSH") return Opcode::Push;
  if (up == "POP") return Opcode::Pop;
  if (up == "CSTORE") return Opcode::Cstore;
  if (up == "CEXEC") return Opcode::Cexec;
  return std::nullopt;
}

Instruction make_load(uint16_t addr, uint8_t hop_offset) { return {Opcode::Load, addr, uint8_t(hop_offset & 0x7f)}; }
Instruction make_store(uint16_t addr, uint8_t hop_offset) { return {Opcode::Store, addr, uint8_t(hop_offset & 0x7f)}; }
Instruction make_push(uint16_t addr) { return {Opcode::Push, addr, 0}; }
Instruction make_pop(uint16_t addr) { return {Opcode::Pop, addr, 0}; }
Instruction make_cstore(uint16_t addr, uint8_t pre, uint8_t post) {
  return {Opcode::Cstore, addr, uint8_t((pre << 4) | (post & 0x0f))};
}
Instruction make_cexec(uint16_t addr, uint8_t block_offset) {
  return {Opcode::Cexec, addr, uint8_t(block_offset & 0x7f)};
}

Word TppProgram::mem_word(std::size_t byte_offset) const {
  if (byte_offset + 2 > memory.size()) return 0;
  return Word((memory[byte_offset] << 8) | memory[byte_offset + 1]);
}

void TppProgram::set_mem_word(std::size_t byte_offset, Word v) {
  if (byte_offset + 2 > memory.size()) return;
  memory[byte_offset] = uint8_t(v >> 8);
  memory[byte_offset + 1] = uint8_t(v & 0xff);
}

namespace {

void put_be16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v & 0xff));
}

uint16_t get_be16(std::span<const uint8_t> b, std::size_t off) {
  return uint16_t((b[off] << 8) | b[off + 1]);
}

std::array<uint8_t, kHeaderBytes> header_bytes(const TppHeader& h, uint16_t checksum) {
  std::array<uint8_t, kHeaderBytes> out{};
  out[0] = uint8_t((h.version << 4) | (h.flags & 0x0f));
  out[1] = h.insn_count;
  out[2] = h.hop_size_words;
  out[3] = h.hop_index;
  out[4] = uint8_t(h.sp >> 8);
  out[5] = uint8_t(h.sp & 0xff);
  out[6] = uint8_t(h.mem_len >> 8);
  out[7] = uint8_t(h.mem_len & 0xff);
  out[8] = uint8_t(h.session_id >> 8);
  out[9] = uint8_t(h.session_id & 0xff);
  out[10] = uint8_t(checksum >> 8);
  out[11] = uint8_t(checksum & 0xff);
  return out;
}

uint16_t ones_complement_sum(std::span<const uint8_t> bytes) {
  uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) sum += uint32_t(bytes[i] << 8 | bytes[i + 1]);
  if (bytes.size() % 2) sum += uint32_t(bytes.back() << 8);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return uint16_t(~sum);
}

}  // namespace

uint16_t header_checksum(const TppHeader& h, const std::vector<Instruction>& insns) {
  std::vector<uint8_t> buf;
  buf.reserve(kHeaderBytes + kInstructionBytes * insns.size());
  auto hb = header_bytes(h, 0);
  buf.insert(buf.end(), hb.begin(), hb.end());
  for (const auto& in : insns) {
    buf.push_back(uint8_t(in.op));
    put_be16(buf, in.addr);
    buf.push_back(in.arg);
  }
  return ones_complement_sum(buf);
}

std::vector<uint8_t> encode(const TppProgram& p) {
  TppHeader h = p.header;
  h.insn_count = uint8_t(p.instructions.size());
  h.mem_len = uint16_t(p.memory.size());
  uint16_t csum = header_checksum(h, p.instructions);

  std::vector<uint8_t> out;
  out.reserve(p.wire_size());
  auto hb = header_bytes(h, csum);
  out.insert(out.end(), hb.begin(), hb.end());
  for (const auto& in : p.instructions) {
    out.push_back(uint8_t(in.op));
    put_be16(out, in.addr);
    out.push_back(in.arg);
  }
  out.insert(out.end(), p.memory.begin(), p.memory.end());
  return out;
}

TppProgram decode(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw TppError(Errc::TruncatedPacket, "short TPP header");
  TppProgram p;
  p.header.version = bytes[0] >> 4;
  p.header.flags = bytes[0] & 0x0f;
  p.header.insn_count = bytes[1];
  p.header.hop_size_words = bytes[2];
  p.header.hop_index = bytes[3];
  p.header.sp = get_be16(bytes, 4);
  p.header.mem_len = get_be16(bytes, 6);
  p.header.session_id = get_be16(bytes, 8);
  p.header.checksum = get_be16(bytes, 10);

  if (p.header.version != 1) throw TppError(Errc::BadMagic, "unsupported TPP version");
  if (p.header.insn_count > kMaxInstructions)
    throw TppError(Errc::TooManyInstructions, "insn_count exceeds limit");

  std::size_t want = kHeaderBytes + kInstructionBytes * p.header.insn_count + p.header.mem_len;
  if (bytes.size() < want) throw TppError(Errc::TruncatedPacket, "TPP shorter than declared size");

  std::size_t off = kHeaderBytes;
  for (unsigned i = 0; i < p.header.insn_count; ++i, off += kInstructionBytes) {
    uint8_t raw_op = bytes[off];
    if (raw_op < 1 || raw_op > 6) throw TppError(Errc::BadMagic, "unknown opcode");
    Instruction in;
    in.op = Opcode(raw_op);
    in.addr = get_be16(bytes, off + 1);
    in.arg = bytes[off + 3];
    p.instructions.push_back(in);
  }
  p.memory.assign(bytes.begin() + off, bytes.begin() + off + p.header.mem_len);

  if (header_checksum(p.header, p.instructions) != p.header.checksum)
    throw TppError(Errc::ChecksumMismatch, "TPP header checksum mismatch");
  return p;
}

}  // namespace tpp
