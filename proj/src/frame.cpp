#include "tpp/frame.hpp"

namespace tpp {

namespace {

constexpr uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::size_t kEthBytes = 14;
constexpr std::size_t kIpv4Bytes = 20;
constexpr std::size_t kUdpBytes = 8;

void put16(std::vector<uint8_t>& o, uint16_t v) {
  o.push_back(uint8_t(v >> 8));
  o.push_back(uint8_t(v));
}

void put32(std::vector<uint8_t>& o, uint32_t v) {
  put16(o, uint16_t(v >> 16));
  put16(o, uint16_t(v));
}

uint16_t get16(std::span<const uint8_t> b, std::size_t off) {
  return uint16_t((b[off] << 8) | b[off + 1]);
}

uint32_t get32(std::span<const uint8_t> b, std::size_t off) {
  return (uint32_t(get16(b, off)) << 16) | get16(b, off + 2);
}

uint16_t inet_checksum(std::span<const uint8_t> bytes) {
  uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) sum += uint32_t(bytes[i] << 8 | bytes[i + 1]);
  if (bytes.size() % 2) sum += uint32_t(bytes.back() << 8);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return uint16_t(~sum);
}

}  // namespace

std::vector<uint8_t> encode_frame(const TppProgram& p, const FrameInfo& info) {
  std::vector<uint8_t> tpp_bytes = encode(p);
  std::vector<uint8_t> out;

  out.insert(out.end(), info.dst_mac.begin(), info.dst_mac.end());
  out.insert(out.end(), info.src_mac.begin(), info.src_mac.end());

  if (info.encap == Encap::Transparent) {
    put16(out, kTppEtherType);
    out.insert(out.end(), tpp_bytes.begin(), tpp_bytes.end());
    out.insert(out.end(), info.inner.begin(), info.inner.end());
    return out;
  }

  put16(out, kEtherTypeIpv4);
  std::vector<uint8_t> ip;
  ip.push_back(0x45);  // v4, 20-byte header
  ip.push_back(0);
  put16(ip, uint16_t(kIpv4Bytes + kUdpBytes + tpp_bytes.size()));
  put16(ip, 0);  // id
  put16(ip, 0);  // flags/frag
  ip.push_back(64);  // ttl
  ip.push_back(17);  // udp
  put16(ip, 0);  // checksum placeholder
  put32(ip, info.src_ip);
  put32(ip, info.dst_ip);
  uint16_t csum = inet_checksum(ip);
  ip[10] = uint8_t(csum >> 8);
  ip[11] = uint8_t(csum);
  out.insert(out.end(), ip.begin(), ip.end());

  put16(out, info.src_port);
  put16(out, info.dst_port);
  put16(out, uint16_t(kUdpBytes + tpp_bytes.size()));
  put16(out, 0);  // udp checksum optional
  out.insert(out.end(), tpp_bytes.begin(), tpp_bytes.end());
  return out;
}

std::pair<TppProgram, FrameInfo> decode_frame(std::span<const uint8_t> bytes) {
  if (bytes.size() < kEthBytes) throw TppError(Errc::TruncatedPacket, "short Ethernet frame");
  FrameInfo info;
  std::copy_n(bytes.begin(), 6, info.dst_mac.begin());
  std::copy_n(bytes.begin() + 6, 6, info.src_mac.begin());
  uint16_t ethertype = get16(bytes, 12);

  if (ethertype == kTppEtherType) {
    info.encap = Encap::Transparent;
    TppProgram p = decode(bytes.subspan(kEthBytes));
    p.encap = Encap::Transparent;
    std::size_t tpp_end = kEthBytes + p.wire_size();
    info.inner.assign(bytes.begin() + tpp_end, bytes.end());
    return {std::move(p), std::move(info)};
  }

  if (ethertype != kEtherTypeIpv4 || bytes.size() < kEthBytes + kIpv4Bytes + kUdpBytes)
    throw TppError(Errc::BadMagic, "not a TPP frame");
  std::size_t ihl = (bytes[kEthBytes] & 0x0f) * 4u;
  uint8_t proto = bytes[kEthBytes + 9];
  if ((bytes[kEthBytes] >> 4) != 4 || proto != 17 || bytes.size() < kEthBytes + ihl + kUdpBytes)
    throw TppError(Errc::BadMagic, "not a TPP frame");
  std::size_t udp_off = kEthBytes + ihl;
  uint16_t dport = get16(bytes, udp_off + 2);
  if (dport != kTppUdpPort) throw TppError(Errc::BadMagic, "UDP destination is not the TPP port");

  info.encap = Encap::Standalone;
  info.src_ip = get32(bytes, kEthBytes + 12);
  info.dst_ip = get32(bytes, kEthBytes + 16);
  info.src_port = get16(bytes, udp_off);
  info.dst_port = dport;
  TppProgram p = decode(bytes.subspan(udp_off + kUdpBytes));
  p.encap = Encap::Standalone;
  return {std::move(p), std::move(info)};
}

}  // namespace tpp
