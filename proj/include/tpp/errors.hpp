#ifndef TPP_ERRORS_HPP
#define TPP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tpp {

enum class Errc {
  UnknownMnemonic,
  NoInstructions,
  TooManyInstructions,
  BadOperandArity,
  MemoryTooLarge,
  BadMagic,
  ChecksumMismatch,
  TruncatedPacket,
  BadOperand,
  ParseError,
  RoutingLoop,
  DanglingLink,
  PolicyViolation,
  DecodeError,
  MtuExceeded,
  Exhausted,
  Unsplittable,
  EmptyPath,
  StaleSamples,
  Saturated,
  MemoryOverflow,
  ConfigError,
};

const char* errc_name(Errc c);

class TppError : public std::runtime_error {
 public:
  TppError(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace tpp

#endif
