#include "acrlnc/protocol.hpp"

#include <string>

#include "acrlnc/errors.hpp"

namespace acrlnc {

std::vector<Allocation> allocate_packets(std::span<const CodedPacket> packets, std::span<const PathType> types) {
  std::vector<std::size_t> type1;
  std::vector<std::size_t> type2;
  for (std::size_t p = 0; p < types.size(); ++p) {
    if (types[p] == PathType::New) type1.push_back(p);
    if (types[p] == PathType::Rep) type2.push_back(p);
  }
  std::size_t n_new = 0;
  for (const CodedPacket& pkt : packets) n_new += pkt.is_rep() ? 0 : 1;
  const std::size_t n_rep = packets.size() - n_new;
  if (n_new != type1.size() || n_rep != type2.size()) {
    throw ContractViolation("allocate_packets: " + std::to_string(n_new) + " NEW / " + std::to_string(n_rep) +
                            " REP packets for " + std::to_string(type1.size()) + " type-1 / " +
                            std::to_string(type2.size()) + " type-2 paths");
  }

  std::vector<Allocation> out;
  out.reserve(packets.size());
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  for (const CodedPacket& pkt : packets) {
    const std::size_t path = pkt.is_rep() ? type2[i2++] : type1[i1++];
    out.push_back(Allocation{path, encode_wire(pkt), &pkt});
  }
  return out;
}

void AckTracker::record_sent(const CodedPacket& p) {
  if (p.window_end() < base_) return;
  sent_[p.tx_id] = Sent{p.w_min, p.coeffs};
}

FeedbackMessage AckTracker::absorb(const FeedbackMessage& per_packet) {
  for (std::uint64_t id : per_packet.acked_packet_ids) {
    auto it = sent_.find(id);
    if (it == sent_.end()) continue;
    const Sent& s = it->second;
    const PacketIndex end = s.w_min + static_cast<PacketIndex>(s.coeffs.size()) - 1;
    if (end >= base_) {
      const std::size_t needed = end - base_ + 1;
      if (needed > matrix_.cols()) matrix_.extend_cols(needed);
      Bytes row(matrix_.cols(), 0);
      for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
        const PacketIndex idx = s.w_min + static_cast<PacketIndex>(i);
        if (idx >= base_) row[idx - base_] = s.coeffs[i];
      }
      matrix_.insert_row(row);
      const std::size_t prefix = matrix_.decodable_prefix();
      if (prefix > 0) {
        matrix_.drop_leading(prefix);
        base_ += static_cast<PacketIndex>(prefix);
      }
    }
    sent_.erase(it);
  }
  std::erase_if(sent_, [this](const auto& kv) {
    return kv.second.w_min + kv.second.coeffs.size() - 1 < base_;
  });

  FeedbackMessage fb = per_packet;
  fb.mode = FeedbackMode::Cumulative;
  fb.w_min_ack = base_;
  fb.dof_count = static_cast<std::uint32_t>(matrix_.rank());
  fb.acked_packet_ids.clear();
  return fb;
}

}  // namespace acrlnc
