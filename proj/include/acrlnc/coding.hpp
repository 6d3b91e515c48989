#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "acrlnc/linear_system.hpp"
#include "acrlnc/packets.hpp"
#include "acrlnc/rng.hpp"

namespace acrlnc {

// Header fields stamped on every packet a node emits for one service.
struct PacketHeader {
  std::uint32_t service_id = 0;
  std::uint32_t src_addr = 0;
  std::uint32_t dst_addr = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
};

// Sliding-window source encoder.
//
// The effective window is [w_min, w_max]; w_min is the first index the
// sender has not seen acknowledged, w_max the highest index included in any
// emitted packet. The window never exceeds max_window packets.
class Encoder {
 public:
  Encoder(PacketHeader header, std::size_t max_window, std::uint64_t seed);

  // Appends the next information packet of the stream. Indices must be
  // contiguous starting at 1.
  void push(InfoPacket packet);

  // Emits n_rep repetitions over the current window followed by n_new new
  // packets; the k-th new packet covers window length w + k. Throws
  // ContractViolation if w + n_new exceeds the maximum window, if the stream
  // has fewer than n_new unsent packets, or if n_rep > 0 with an empty window.
  std::vector<CodedPacket> encode_batch(std::size_t n_new, std::size_t n_rep, std::uint32_t slot = 0);

  // Cumulative acknowledgement: every index below w_min_ack is decoded.
  void acknowledge(PacketIndex w_min_ack);

  PacketIndex w_min() const { return w_min_; }
  PacketIndex w_max() const { return w_max_; }
  std::size_t window() const { return w_max_ >= w_min_ ? w_max_ - w_min_ + 1 : 0; }
  std::size_t max_window() const { return max_window_; }
  // Pushed packets not yet included in any emission.
  std::size_t unsent() const;
  PacketIndex pushed() const { return pushed_; }

 private:
  CodedPacket combine(std::size_t width, RepFlag flag, std::uint32_t slot);

  PacketHeader header_;
  std::size_t max_window_;
  Rng rng_;
  PacketIndex w_min_ = 1;
  PacketIndex w_max_ = 0;
  PacketIndex pushed_ = 0;
  std::deque<InfoPacket> buffer_;  // indices w_min_ .. pushed_
};

enum class MixingMode { Selective, Traditional, None };

struct Arrival {
  std::size_t in_slot = 0;  // incoming link slot the packet arrived on
  CodedPacket packet;
};

struct ReencodeResult {
  // Selective/Traditional: NEW outputs first, then REP outputs.
  // None: one output per incoming slot with a nonempty buffer, in slot order.
  std::vector<CodedPacket> packets;
  std::vector<std::size_t> in_slot;  // None mode only: origin slot of packets[i]
  bool new_starved = false;
  bool rep_starved = false;
};

// Intermediate-node re-encoder. Outputs are fresh random combinations of
// buffered inputs; the output coefficient vector is the exact composition of
// the input vectors, so the destination decodes re-encoded packets exactly
// like source packets.
class ReEncoder {
 public:
  ReEncoder(MixingMode mode, PacketHeader header, std::size_t max_window, std::uint64_t seed);

  // Consumes this slot's arrivals and produces n_new + n_rep outputs.
  //  Selective:   n_new combinations of this slot's NEW arrivals (tagged NEW),
  //               n_rep combinations of all buffered REP arrivals (tagged REP).
  //  Traditional: n_new + n_rep combinations of everything buffered, all NEW.
  //  None:        per incoming slot, a combination of that slot's buffer,
  //               tagged like this slot's arrival on it (REP if none).
  // A category with no inputs produces nothing and raises its starvation flag.
  ReencodeResult reencode(std::span<const Arrival> incoming, std::size_t n_new, std::size_t n_rep,
                          std::uint32_t slot = 0);

  // Drops buffered packets that only cover indices below w_min_ack.
  void flush(PacketIndex w_min_ack);

  MixingMode mode() const { return mode_; }
  std::size_t rep_buffered() const { return rep_buffer_.size(); }
  std::size_t all_buffered() const { return all_buffer_.size(); }

 private:
  void store(std::deque<CodedPacket>& buf, const CodedPacket& p);
  CodedPacket combine(std::span<const CodedPacket* const> inputs, RepFlag flag, std::uint32_t slot);

  MixingMode mode_;
  PacketHeader header_;
  std::size_t max_window_;
  Rng rng_;
  std::deque<CodedPacket> rep_buffer_;
  std::deque<CodedPacket> all_buffer_;
  std::vector<std::deque<CodedPacket>> link_buffers_;
};

struct IngestResult {
  std::vector<InfoPacket> delivered;  // newly decoded, in order
  bool innovative = false;
};

// Destination decoder with in-order delivery. The coefficient matrix is
// anchored at the first undecoded index and re-anchored as the prefix is
// solved; decoded payloads are kept to strip already-known columns from
// late packets.
class Decoder {
 public:
  Decoder(FeedbackMode mode, std::size_t payload_size);

  // Throws CorruptionError if the packet is inconsistent with what has
  // already been received, InvalidInput on a payload length mismatch.
  IngestResult ingest(const CodedPacket& packet);

  // Builds this slot's feedback and clears the per-slot acknowledgement list.
  FeedbackMessage feedback(std::uint32_t slot);

  PacketIndex next_index() const { return static_cast<PacketIndex>(decoded_.size() + 1); }
  std::size_t delivered_count() const { return decoded_.size(); }
  std::size_t dof_count() const { return matrix_.rank(); }
  const Bytes& decoded(PacketIndex index) const { return decoded_.at(index - 1); }

 private:
  FeedbackMode mode_;
  std::size_t payload_size_;
  CoeffMatrix matrix_;  // column j is index next_index() + j
  std::vector<Bytes> decoded_;
  std::vector<std::uint64_t> acked_;
};

}  // namespace acrlnc
