#ifndef TPP_FRAME_HPP
#define TPP_FRAME_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tpp/isa.hpp"

namespace tpp {

// On-the-wire encapsulations for a TPP block:
//   transparent: Ethernet(ethertype 0x6666) | TPP | inner frame
//   standalone:  Ethernet(0x0800) | IPv4(proto 17) | UDP(dst 0x6666) | TPP
struct FrameInfo {
  Encap encap = Encap::Standalone;
  std::array<uint8_t, 6> dst_mac{};
  std::array<uint8_t, 6> src_mac{};
  // Standalone only.
  uint32_t src_ip = 0;
  uint32_t dst_ip = 0;
  uint16_t src_port = kTppUdpPort;
  uint16_t dst_port = kTppUdpPort;
  // Transparent only: the encapsulated frame, delivered unchanged.
  std::vector<uint8_t> inner;
};

std::vector<uint8_t> encode_frame(const TppProgram& p, const FrameInfo& info);

// Throws BadMagic unless the frame carries ethertype 0x6666 or a UDP datagram
// to port 0x6666; TruncatedPacket / ChecksumMismatch come from the TPP block.
std::pair<TppProgram, FrameInfo> decode_frame(std::span<const uint8_t> bytes);

}  // namespace tpp

#endif
