#include "tpp/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "tpp/memmap.hpp"

namespace tpp {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_paren = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '(' && i + 1 < line.size() && line[i + 1] == '*') in_paren = true;
    if (in_paren) {
      if (line[i] == ')' && line[i - 1] == '*') return line.substr(0, line.find("(*"));
      continue;
    }
    if (line[i] == '#') return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  int bracket = 0;
  for (char c : s) {
    if (c == '[') ++bracket;
    if (c == ']') --bracket;
    if (c == delim && bracket == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

long parse_number(const std::string& tok) {
  std::string s = trim(tok);
  long v = 0;
  int base = 10;
  std::size_t off = 0;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    off = 2;
  }
  auto [p, ec] = std::from_chars(s.data() + off, s.data() + s.size(), v, base);
  if (ec != std::errc() || p != s.data() + s.size())
    throw TppError(Errc::ParseError, "bad number '" + tok + "'");
  return v;
}

// "[Packet:Hop[3]]" -> 3
int parse_hop_operand(const std::string& tok) {
  std::string s = tok;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  std::string low(s);
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
  auto pos = low.find("packet:hop[");
  if (pos == std::string::npos) throw TppError(Errc::BadOperand, "expected [Packet:Hop[k]], got " + tok);
  auto open = low.find('[', pos + 10);
  auto close = low.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw TppError(Errc::BadOperand, "malformed hop operand " + tok);
  long k = parse_number(s.substr(open + 1, close - open - 1));
  if (k < 0 || k > 127) throw TppError(Errc::BadOperand, "hop offset out of range in " + tok);
  return int(k);
}

uint16_t parse_switch_operand(const std::string& tok) {
  std::string s = trim(tok);
  if (!s.empty() && s.front() == '[') s = s.substr(1, s.size() - 2);
  s = trim(s);
  if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) return uint16_t(parse_number(s));
  return resolve_address(s).raw;
}

}  // namespace

TppProgram assemble(const std::string& source, const AssembleOptions& opts) {
  TppProgram p;
  int hops = -1, hopsize = -1, memlen = -1;
  std::vector<std::pair<int, std::vector<Word>>> hop_init;
  bool in_memory = false;
  int push_depth = 0, max_push_depth = 0;
  int max_hop_words = 0;

  std::istringstream is(source);
  std::string raw_line;
  while (std::getline(is, raw_line)) {
    std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;

    std::string low(line);
    std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });

    if (low == "packetmemory:") {
      in_memory = true;
      continue;
    }
    if (in_memory) {
      auto colon = line.find(':');
      if (colon != std::string::npos && low.rfind("bytes", 0) == 0) {
        std::istringstream bs(line.substr(colon + 1));
        std::string tok;
        std::vector<Word> words;
        std::vector<uint8_t> bytes;
        while (bs >> tok) bytes.push_back(uint8_t(parse_number("0x" + tok)));
        hop_init.emplace_back(-1, std::vector<Word>());
        hop_init.back().second.reserve(bytes.size());
        for (uint8_t b : bytes) hop_init.back().second.push_back(b);
        continue;
      }
      if (colon == std::string::npos || low.rfind("hop", 0) != 0)
        throw TppError(Errc::ParseError, "expected 'HopN: v1, v2, ...' in PacketMemory section");
      long n = parse_number(line.substr(3, colon - 3));
      std::vector<Word> words;
      for (const auto& tok : split(line.substr(colon + 1), ','))
        if (!tok.empty()) words.push_back(Word(parse_number(tok)));
      hop_init.emplace_back(int(n), std::move(words));
      continue;
    }

    if (line[0] == '.') {
      auto sp = line.find(' ');
      std::string key = low.substr(0, sp == std::string::npos ? low.size() : sp);
      long val = sp == std::string::npos ? 0 : parse_number(line.substr(sp + 1));
      if (key == ".hops") hops = int(val);
      else if (key == ".hopsize") hopsize = int(val);
      else if (key == ".memlen") memlen = int(val);
      else if (key == ".session") p.header.session_id = uint16_t(val);
      else if (key == ".sp") p.header.sp = uint16_t(val);
      else if (key == ".hopindex") p.header.hop_index = uint8_t(val);
      else if (key == ".flags") p.header.flags = uint8_t(val & 0x0f);
      else throw TppError(Errc::ParseError, "unknown directive " + key);
      continue;
    }

    auto sp_pos = line.find_first_of(" \t");
    std::string opname = line.substr(0, sp_pos);
    auto op = opcode_from_name(opname);
    if (!op) throw TppError(Errc::UnknownMnemonic, "unknown opcode '" + opname + "'");
    std::vector<std::string> args;
    if (sp_pos != std::string::npos)
      for (auto& a : split(line.substr(sp_pos + 1), ','))
        if (!a.empty()) args.push_back(a);

    Instruction in;
    switch (*op) {
      case Opcode::Load:
      case Opcode::Store: {
        if (args.size() != 2) throw TppError(Errc::BadOperandArity, line);
        int k = parse_hop_operand(args[1]);
        in = (*op == Opcode::Load) ? make_load(parse_switch_operand(args[0]), uint8_t(k))
                                   : make_store(parse_switch_operand(args[0]), uint8_t(k));
        max_hop_words = std::max(max_hop_words, k + 1);
        break;
      }
      case Opcode::Push:
      case Opcode::Pop: {
        if (args.size() != 1) throw TppError(Errc::BadOperandArity, line);
        in = (*op == Opcode::Push) ? make_push(parse_switch_operand(args[0]))
                                   : make_pop(parse_switch_operand(args[0]));
        push_depth += (*op == Opcode::Push) ? 1 : -1;
        max_push_depth = std::max(max_push_depth, push_depth);
        break;
      }
      case Opcode::Cstore: {
        if (args.size() != 3) throw TppError(Errc::BadOperandArity, line);
        int pre = parse_hop_operand(args[1]);
        int post = parse_hop_operand(args[2]);
        if (pre > 15 || post > 15)
          throw TppError(Errc::BadOperand, "CSTORE hop offsets limited to 0..15");
        in = make_cstore(parse_switch_operand(args[0]), uint8_t(pre), uint8_t(post));
        max_hop_words = std::max(max_hop_words, std::max(pre, post) + 1);
        break;
      }
      case Opcode::Cexec: {
        if (args.size() != 2) throw TppError(Errc::BadOperandArity, line);
        int k = parse_hop_operand(args[1]);
        in = make_cexec(parse_switch_operand(args[0]), uint8_t(k));
        max_hop_words = std::max(max_hop_words, k + 4);
        break;
      }
    }
    p.instructions.push_back(in);
    if (p.instructions.size() > kMaxInstructions)
      throw TppError(Errc::TooManyInstructions, "TPPs carry at most 5 instructions");
  }

  if (p.instructions.empty()) throw TppError(Errc::NoInstructions, "no instructions in source");

  for (const auto& [n, words] : hop_init) {
    if (n < 0) {
      memlen = std::max(memlen, int(words.size()));
      continue;
    }
    max_hop_words = std::max(max_hop_words, int(words.size()));
    hops = std::max(hops, n + 1);
  }
  if (hopsize < 0) hopsize = std::max(std::max(max_hop_words, max_push_depth), 1);
  if (hops < 0) hops = 5;
  if (memlen < 0) memlen = hops * hopsize * 2;

  p.header.insn_count = uint8_t(p.instructions.size());
  p.header.hop_size_words = uint8_t(hopsize);
  p.header.mem_len = uint16_t(memlen);
  p.memory.assign(size_t(memlen), 0);
  for (const auto& [n, words] : hop_init) {
    if (n < 0) {
      for (std::size_t b = 0; b < words.size() && b < p.memory.size(); ++b)
        p.memory[b] = uint8_t(words[b]);
      continue;
    }
    for (std::size_t w = 0; w < words.size(); ++w)
      p.set_mem_word(std::size_t(n) * hopsize * 2 + 2 * w, words[w]);
  }

  if (p.wire_size() > opts.max_bytes)
    throw TppError(Errc::MemoryTooLarge, "encoded TPP exceeds MTU budget of " +
                                             std::to_string(opts.max_bytes) + " bytes");
  p.header.checksum = header_checksum(p.header, p.instructions);
  return p;
}

std::string disassemble(const TppProgram& p) {
  std::ostringstream os;
  auto hex = [](unsigned v, int w) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%0*x", w, v);
    return std::string(buf);
  };

  os << ".hopsize " << int(p.header.hop_size_words) << "\n";
  os << ".memlen " << p.header.mem_len << "\n";
  if (p.header.session_id) os << ".session " << p.header.session_id << "\n";
  if (p.header.sp) os << ".sp " << p.header.sp << "\n";
  if (p.header.hop_index) os << ".hopindex " << int(p.header.hop_index) << "\n";
  if (p.header.flags) os << ".flags " << int(p.header.flags) << "\n";

  auto sw = [&](uint16_t a) {
    auto m = mnemonic_for(a);
    return "[" + (m ? *m : hex(a, 4)) + "]";
  };
  auto hop = [&](int k) { return "[Packet:Hop[" + std::to_string(k) + "]]"; };

  for (const auto& in : p.instructions) {
    os << opcode_name(in.op) << " " << sw(in.addr);
    switch (in.op) {
      case Opcode::Load:
      case Opcode::Store:
      case Opcode::Cexec:
        os << ", " << hop(in.hop_offset());
        break;
      case Opcode::Cstore:
        os << ", " << hop(in.pre_offset()) << ", " << hop(in.post_offset());
        break;
      default:
        break;
    }
    os << "\n";
  }

  bool any_mem = std::any_of(p.memory.begin(), p.memory.end(), [](uint8_t b) { return b != 0; });
  if (any_mem) {
    os << "PacketMemory:\n";
    if (p.header.hop_size_words > 0 && p.header.mem_len % (2 * p.header.hop_size_words) == 0) {
      int hops = p.header.mem_len / (2 * p.header.hop_size_words);
      for (int h = 0; h < hops; ++h) {
        os << "Hop" << h << ":";
        for (int w = 0; w < p.header.hop_size_words; ++w) {
          os << (w ? ", " : " ")
             << hex(p.mem_word(std::size_t(h) * p.header.hop_size_words * 2 + 2 * w), 4);
        }
        os << "\n";
      }
    } else {
      os << "Bytes:";
      for (uint8_t b : p.memory) {
        char buf[8];
        std::snprintf(buf, sizeof buf, " %02x", b);
        os << buf;
      }
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace tpp
