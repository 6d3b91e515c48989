#include "acrlnc/packets.hpp"

#include <string>

#include "acrlnc/errors.hpp"

namespace acrlnc {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

}  // namespace

Bytes encode_wire(const CodedPacket& p) {
  if (p.coeffs.empty()) throw InvalidInput("encode_wire: window length must be at least 1");
  if (p.coeffs.size() > 0xFFFF) {
    throw InvalidInput("encode_wire: window length " + std::to_string(p.coeffs.size()) +
                       " overflows the 16-bit w field");
  }

  Bytes out;
  out.reserve(kWireHeaderSize + p.coeffs.size() + p.payload.size());
  put_u32(out, p.dst_addr);
  put_u32(out, p.src_addr);
  put_u16(out, p.dst_port);
  put_u16(out, p.src_port);
  out.push_back(static_cast<std::uint8_t>(p.rep_flag));
  put_u32(out, p.w_min);
  put_u16(out, static_cast<std::uint16_t>(p.coeffs.size()));
  out.insert(out.end(), p.coeffs.begin(), p.coeffs.end());
  out.insert(out.end(), p.payload.begin(), p.payload.end());
  return out;
}

CodedPacket decode_wire(std::span<const std::uint8_t> b) {
  if (b.size() < kWireHeaderSize) {
    throw MalformedPacket("decode_wire: " + std::to_string(b.size()) +
                          "-byte buffer is shorter than the 19-byte header");
  }

  CodedPacket p;
  p.dst_addr = get_u32(b, 0);
  p.src_addr = get_u32(b, 4);
  p.dst_port = get_u16(b, 8);
  p.src_port = get_u16(b, 10);
  const std::uint8_t flag = b[kRepFlagOffset];
  if (flag > 1) throw MalformedPacket("decode_wire: REP flag byte must be 0 or 1");
  p.rep_flag = static_cast<RepFlag>(flag);
  p.w_min = get_u32(b, 13);
  const std::size_t w = get_u16(b, 17);
  if (w == 0) throw MalformedPacket("decode_wire: zero window length");
  if (b.size() < kWireHeaderSize + w) {
    throw MalformedPacket("decode_wire: declared w=" + std::to_string(w) + " but only " +
                          std::to_string(b.size() - kWireHeaderSize) + " bytes follow the header");
  }
  p.coeffs.assign(b.begin() + kWireHeaderSize, b.begin() + static_cast<std::ptrdiff_t>(kWireHeaderSize + w));
  p.payload.assign(b.begin() + static_cast<std::ptrdiff_t>(kWireHeaderSize + w), b.end());
  return p;
}

}  // namespace acrlnc
