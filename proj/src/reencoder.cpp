#include "acrlnc/coding.hpp"

#include <algorithm>

#include "acrlnc/errors.hpp"
#include "acrlnc/gf256.hpp"

namespace acrlnc {

namespace {

constexpr int kRedrawAttempts = 8;

}  // namespace

ReEncoder::ReEncoder(MixingMode mode, PacketHeader header, std::size_t max_window, std::uint64_t seed)
    : mode_(mode), header_(header), max_window_(max_window), rng_(seed) {
  if (max_window_ == 0) throw InvalidInput("ReEncoder: max window must be positive");
}

void ReEncoder::store(std::deque<CodedPacket>& buf, const CodedPacket& p) {
  buf.push_back(p);
  PacketIndex newest_end = 0;
  for (const auto& q : buf) newest_end = std::max(newest_end, q.window_end());
  // Keep every mix of the buffer within max_window packets.
  std::erase_if(buf, [&](const CodedPacket& q) { return q.w_min + max_window_ <= newest_end; });
  while (buf.size() > 2 * max_window_) buf.pop_front();
}

CodedPacket ReEncoder::combine(std::span<const CodedPacket* const> inputs, RepFlag flag, std::uint32_t slot) {
  PacketIndex lo = inputs.front()->w_min;
  PacketIndex hi = inputs.front()->window_end();
  for (const CodedPacket* in : inputs) {
    lo = std::min(lo, in->w_min);
    hi = std::max(hi, in->window_end());
  }
  const std::size_t width = hi - lo + 1;
  const std::size_t payload_size = inputs.front()->payload.size();

  Bytes coeffs;
  Bytes payload;
  for (int attempt = 0; attempt < kRedrawAttempts; ++attempt) {
    coeffs.assign(width, 0);
    payload.assign(payload_size, 0);
    for (const CodedPacket* in : inputs) {
      const std::uint8_t beta = rng_.nonzero_byte();
      gf::axpy(std::span(coeffs).subspan(in->w_min - lo, in->coeffs.size()), in->coeffs, beta);
      gf::axpy(payload, in->payload, beta);
    }
    if (!gf::is_zero(coeffs)) break;
  }
  if (gf::is_zero(coeffs)) {
    // Every draw cancelled out; the inputs are nonzero so forwarding one keeps the span.
    const CodedPacket* in = inputs.back();
    coeffs.assign(width, 0);
    std::copy(in->coeffs.begin(), in->coeffs.end(), coeffs.begin() + (in->w_min - lo));
    payload = in->payload;
  }

  const auto first = std::find_if(coeffs.begin(), coeffs.end(), [](std::uint8_t c) { return c != 0; });
  const auto last = std::find_if(coeffs.rbegin(), coeffs.rend(), [](std::uint8_t c) { return c != 0; }).base();

  CodedPacket out;
  out.service_id = header_.service_id;
  out.src_addr = header_.src_addr;
  out.dst_addr = header_.dst_addr;
  out.src_port = header_.src_port;
  out.dst_port = header_.dst_port;
  out.rep_flag = flag;
  out.w_min = lo + static_cast<PacketIndex>(first - coeffs.begin());
  out.coeffs.assign(first, last);
  out.payload = std::move(payload);
  out.birth_slot = slot;
  return out;
}

ReencodeResult ReEncoder::reencode(std::span<const Arrival> incoming, std::size_t n_new, std::size_t n_rep,
                                   std::uint32_t slot) {
  ReencodeResult result;
  std::vector<const CodedPacket*> pool;

  auto emit = [&](std::size_t count, RepFlag flag) {
    for (std::size_t k = 0; k < count; ++k) result.packets.push_back(combine(pool, flag, slot));
  };

  switch (mode_) {
    case MixingMode::Selective: {
      for (const Arrival& a : incoming) {
        if (a.packet.is_rep()) store(rep_buffer_, a.packet);
      }
      for (const Arrival& a : incoming) {
        if (!a.packet.is_rep()) pool.push_back(&a.packet);
      }
      if (n_new > 0) {
        if (pool.empty()) {
          result.new_starved = true;
        } else {
          // Output k mixes the k + 1 narrowest inputs, so the outputs stay nested like the
          // source's and the first min(n_new, inputs) of them are always independent.
          std::stable_sort(pool.begin(), pool.end(), [](const CodedPacket* a, const CodedPacket* b) {
            return a->window_end() < b->window_end();
          });
          const std::size_t skip = pool.size() > n_new ? pool.size() - n_new : 0;
          for (std::size_t k = 0; k < n_new; ++k) {
            const std::size_t take = std::min(pool.size(), skip + k + 1);
            result.packets.push_back(combine(std::span(pool).first(take), RepFlag::New, slot));
          }
        }
      }
      pool.clear();
      for (const auto& p : rep_buffer_) pool.push_back(&p);
      if (n_rep > 0) {
        if (pool.empty()) {
          result.rep_starved = true;
        } else {
          emit(n_rep, RepFlag::Rep);
        }
      }
      break;
    }
    case MixingMode::Traditional: {
      for (const Arrival& a : incoming) store(all_buffer_, a.packet);
      for (const auto& p : all_buffer_) pool.push_back(&p);
      if (pool.empty()) {
        result.new_starved = n_new > 0;
        result.rep_starved = n_rep > 0;
      } else {
        emit(n_new + n_rep, RepFlag::New);
      }
      break;
    }
    case MixingMode::None: {
      for (const Arrival& a : incoming) {
        if (a.in_slot >= link_buffers_.size()) link_buffers_.resize(a.in_slot + 1);
        store(link_buffers_[a.in_slot], a.packet);
      }
      const std::size_t total = n_new + n_rep;
      if (link_buffers_.size() < total) link_buffers_.resize(total);
      for (std::size_t s = 0; s < total; ++s) {
        RepFlag flag = RepFlag::Rep;
        for (const Arrival& a : incoming) {
          if (a.in_slot == s) flag = a.packet.rep_flag;
        }
        pool.clear();
        for (const auto& p : link_buffers_[s]) pool.push_back(&p);
        if (pool.empty()) {
          result.rep_starved = true;
          continue;
        }
        result.packets.push_back(combine(pool, flag, slot));
        result.in_slot.push_back(s);
      }
      break;
    }
  }
  return result;
}

void ReEncoder::flush(PacketIndex w_min_ack) {
  auto decoded = [w_min_ack](const CodedPacket& p) { return p.window_end() < w_min_ack; };
  std::erase_if(rep_buffer_, decoded);
  std::erase_if(all_buffer_, decoded);
  for (auto& b : link_buffers_) std::erase_if(b, decoded);
}

}  // namespace acrlnc
