#ifndef TPP_ANALYZER_HPP
#define TPP_ANALYZER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tpp/isa.hpp"

namespace tpp {

enum class AccessOp : uint8_t { Read, Write };

// (appid, op, address_range) access-control tuple.  Ranges are inclusive.
struct MemoryPolicy {
  uint64_t appid = 0;
  AccessOp op = AccessOp::Read;
  uint16_t start = 0;
  uint16_t end = 0;
};

struct TouchedRange {
  AccessOp op;
  uint16_t start;
  uint16_t end;
};

struct Violation {
  int insn_index;
  std::string reason;
};

struct AnalysisReport {
  std::vector<TouchedRange> touched_ranges;
  std::vector<Violation> violations;
  bool has_writes = false;
  bool hazard_order_ok = true;

  bool admissible() const { return violations.empty(); }
};

// Static analysis: covers every switch-memory operand, flags accesses not
// permitted by the (appid-matching) policy tuples, and checks that no
// conditional is followed by an instruction whose operand lives at an
// earlier pipeline stage.  deny_writes treats any STORE/CSTORE as a
// violation outright.
AnalysisReport analyze(const TppProgram& p, const std::vector<MemoryPolicy>& policies,
                       uint64_t appid, bool deny_writes = false);

std::string report_text(const AnalysisReport& r);

}  // namespace tpp

#endif
