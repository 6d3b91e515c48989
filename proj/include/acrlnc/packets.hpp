#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "acrlnc/linear_system.hpp"

namespace acrlnc {

using PacketIndex = std::uint32_t;  // 1-based position in a service stream

struct InfoPacket {
  PacketIndex index = 0;
  Bytes payload;

  friend bool operator==(const InfoPacket&, const InfoPacket&) = default;
};

enum class RepFlag : std::uint8_t { New = 0, Rep = 1 };

// A random linear combination of the information packets
// w_min, w_min+1, ..., w_min+w-1 with coefficient coeffs[i] on packet w_min+i.
//
// Wire-visible: addresses, ports, rep_flag, w_min, coeffs, payload.
// service_id, birth_slot and tx_id are simulator metadata and are not
// carried by encode_wire.
struct CodedPacket {
  std::uint32_t service_id = 0;
  std::uint32_t src_addr = 0;
  std::uint32_t dst_addr = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  RepFlag rep_flag = RepFlag::New;
  PacketIndex w_min = 1;
  Bytes coeffs;
  Bytes payload;
  std::uint32_t birth_slot = 0;
  std::uint64_t tx_id = 0;

  std::size_t window() const { return coeffs.size(); }
  // Last index covered; meaningless when window() == 0.
  PacketIndex window_end() const { return w_min + static_cast<PacketIndex>(coeffs.size()) - 1; }
  bool is_rep() const { return rep_flag == RepFlag::Rep; }

  friend bool operator==(const CodedPacket&, const CodedPacket&) = default;
};

enum class FeedbackMode { Cumulative, PerPacket };

// What the decoder saw on each global path for the data slot a feedback
// message refers to.
enum class PathStatus : std::int8_t { Idle = -1, Erased = 0, Received = 1 };

struct FeedbackMessage {
  FeedbackMode mode = FeedbackMode::Cumulative;
  PacketIndex w_min_ack = 1;     // first index not yet decoded
  std::uint32_t dof_count = 0;   // independent combinations held beyond w_min_ack
  std::vector<std::uint64_t> acked_packet_ids;
  std::uint32_t emit_slot = 0;
  std::uint32_t data_slot = 0;   // emission slot of the packets observed in path_status
  std::vector<PathStatus> path_status;
};

// Wire layout (all integers big-endian):
//   dst_addr(4) | src_addr(4) | dst_port(2) | src_port(2) | rep_flag(1) |
//   w_min(4) | w(2) | coeffs(w) | payload(rest)
inline constexpr std::size_t kWireHeaderSize = 19;
inline constexpr std::size_t kRepFlagOffset = 12;

Bytes encode_wire(const CodedPacket& p);

// Throws MalformedPacket on truncated or inconsistent input.
CodedPacket decode_wire(std::span<const std::uint8_t> bytes);

}  // namespace acrlnc
