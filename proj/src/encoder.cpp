#include "acrlnc/coding.hpp"

#include <algorithm>
#include <string>

#include "acrlnc/errors.hpp"
#include "acrlnc/gf256.hpp"

namespace acrlnc {

Encoder::Encoder(PacketHeader header, std::size_t max_window, std::uint64_t seed)
    : header_(header), max_window_(max_window), rng_(seed) {
  if (max_window_ == 0) throw InvalidInput("Encoder: max window must be positive");
}

void Encoder::push(InfoPacket packet) {
  if (packet.index != pushed_ + 1) {
    throw InvalidInput("Encoder::push: expected index " + std::to_string(pushed_ + 1) + ", got " +
                       std::to_string(packet.index));
  }
  if (!buffer_.empty() && packet.payload.size() != buffer_.front().payload.size()) {
    throw InvalidInput("Encoder::push: payload length differs from the stream's");
  }
  pushed_ = packet.index;
  buffer_.push_back(std::move(packet));
}

std::size_t Encoder::unsent() const { return pushed_ - w_max_; }

std::vector<CodedPacket> Encoder::encode_batch(std::size_t n_new, std::size_t n_rep, std::uint32_t slot) {
  const std::size_t w = window();
  if (n_rep > 0 && w == 0) throw ContractViolation("encode_batch: repetition requested over an empty window");
  if (w + n_new > max_window_) {
    throw ContractViolation("encode_batch: window " + std::to_string(w) + " + " + std::to_string(n_new) +
                            " new packets exceeds the maximum window " + std::to_string(max_window_));
  }
  if (n_new > unsent()) {
    throw ContractViolation("encode_batch: " + std::to_string(n_new) + " new packets requested but only " +
                            std::to_string(unsent()) + " are queued");
  }

  std::vector<CodedPacket> out;
  out.reserve(n_new + n_rep);
  for (std::size_t k = 0; k < n_rep; ++k) out.push_back(combine(w, RepFlag::Rep, slot));
  for (std::size_t k = 1; k <= n_new; ++k) out.push_back(combine(w + k, RepFlag::New, slot));
  w_max_ += static_cast<PacketIndex>(n_new);
  return out;
}

void Encoder::acknowledge(PacketIndex w_min_ack) {
  const PacketIndex target = std::min<PacketIndex>(w_min_ack, w_max_ + 1);
  if (target <= w_min_) return;
  w_min_ = target;
  while (!buffer_.empty() && buffer_.front().index < w_min_) buffer_.pop_front();
}

CodedPacket Encoder::combine(std::size_t width, RepFlag flag, std::uint32_t slot) {
  CodedPacket p;
  p.service_id = header_.service_id;
  p.src_addr = header_.src_addr;
  p.dst_addr = header_.dst_addr;
  p.src_port = header_.src_port;
  p.dst_port = header_.dst_port;
  p.rep_flag = flag;
  p.w_min = w_min_;
  p.birth_slot = slot;
  p.coeffs.resize(width);
  p.payload.assign(buffer_.front().payload.size(), 0);
  // Coefficients are drawn from the nonzero elements, so the vector is never zero.
  for (std::size_t i = 0; i < width; ++i) {
    p.coeffs[i] = rng_.nonzero_byte();
    gf::axpy(p.payload, buffer_[i].payload, p.coeffs[i]);
  }
  return p;
}

}  // namespace acrlnc
