#include "acrlnc/coding.hpp"

#include "acrlnc/errors.hpp"
#include "acrlnc/gf256.hpp"

namespace acrlnc {

Decoder::Decoder(FeedbackMode mode, std::size_t payload_size)
    : mode_(mode), payload_size_(payload_size), matrix_(0, payload_size) {}

IngestResult Decoder::ingest(const CodedPacket& packet) {
  if (packet.payload.size() != payload_size_) throw InvalidInput("Decoder::ingest: payload length mismatch");
  IngestResult result;
  if (packet.coeffs.empty()) return result;
  if (packet.w_min == 0) throw InvalidInput("Decoder::ingest: w_min must be at least 1");

  const PacketIndex base = next_index();
  Bytes payload = packet.payload;
  const std::size_t needed = packet.window_end() >= base ? packet.window_end() - base + 1 : 0;
  if (needed > matrix_.cols()) matrix_.extend_cols(needed);
  Bytes row(matrix_.cols(), 0);

  for (std::size_t i = 0; i < packet.coeffs.size(); ++i) {
    const PacketIndex idx = packet.w_min + static_cast<PacketIndex>(i);
    const std::uint8_t c = packet.coeffs[i];
    if (idx < base) {
      gf::axpy(payload, decoded_[idx - 1], c);
    } else {
      row[idx - base] = c;
    }
  }

  if (needed == 0) {
    // Fully decoded window: the residual must vanish.
    if (!gf::is_zero(payload)) throw CorruptionError("Decoder::ingest: packet contradicts decoded data");
    return result;
  }

  result.innovative = matrix_.insert_row(row, payload, packet.tx_id);
  if (!result.innovative) return result;
  if (mode_ == FeedbackMode::PerPacket) acked_.push_back(packet.tx_id);

  const std::size_t prefix = matrix_.decodable_prefix();
  for (std::size_t j = 0; j < prefix; ++j) {
    const auto solved = matrix_.solved_payload(j);
    decoded_.emplace_back(solved.begin(), solved.end());
    result.delivered.push_back(InfoPacket{static_cast<PacketIndex>(decoded_.size()), decoded_.back()});
  }
  if (prefix > 0) matrix_.drop_leading(prefix);
  return result;
}

FeedbackMessage Decoder::feedback(std::uint32_t slot) {
  FeedbackMessage msg;
  msg.mode = mode_;
  msg.w_min_ack = next_index();
  msg.dof_count = static_cast<std::uint32_t>(matrix_.rank());
  msg.acked_packet_ids = std::move(acked_);
  acked_.clear();
  msg.emit_slot = slot;
  msg.data_slot = slot;
  return msg;
}

}  // namespace acrlnc
