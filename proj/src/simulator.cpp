#include "acrlnc/simulator.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <memory>

#include "acrlnc/controller.hpp"
#include "acrlnc/errors.hpp"

namespace acrlnc {

namespace {

enum StreamTag : std::uint64_t { kLinkStream = 1, kEncoderStream = 2, kReEncStream = 3, kPayloadStream = 4 };

Bytes make_payload(std::uint64_t seed, std::size_t svc, PacketIndex idx, std::size_t len) {
  Rng r(derive_seed(seed, {kPayloadStream, svc, idx}));
  Bytes b(len);
  for (auto& x : b) x = r.byte();
  return b;
}

// Every hop goes through the wire codec; metadata rides alongside.
CodedPacket over_wire(const CodedPacket& p) {
  CodedPacket out = decode_wire(encode_wire(p));
  if (out.rep_flag != p.rep_flag) throw ContractViolation("wire codec altered the REP flag");
  out.service_id = p.service_id;
  out.birth_slot = p.birth_slot;
  out.tx_id = p.tx_id;
  return out;
}

struct ServiceRuntime {
  std::size_t index = 0;
  ServiceId id = 0;
  const ServiceSpec* spec = nullptr;
  PacketHeader header;
  bool active = false;

  RouteLayout layout;
  std::vector<GlobalPath> paths;
  std::vector<bool> vn_entry;         // per route position
  std::vector<std::size_t> horizon;   // per position: where the node's budget looks ahead to
  std::vector<MixingMode> mode;       // per position

  std::unique_ptr<Encoder> enc;
  std::unique_ptr<SourceBudget> budget;
  std::optional<AckTracker> tracker;
  std::unique_ptr<Decoder> dec;
  std::vector<std::unique_ptr<ReEncoder>> reenc;

  std::map<std::uint32_t, std::vector<CodedPacket>> dec_queue;
  std::map<std::uint32_t, std::vector<PathStatus>> status_by_slot;
  std::deque<std::pair<std::uint32_t, FeedbackMessage>> fb_queue;
  std::deque<std::pair<std::uint32_t, PacketIndex>> local_queue;
  std::vector<std::uint32_t> birth;
  std::uint64_t next_tx = 1;

  ServiceMetrics m;
  double delay_sum = 0.0;
  std::uint32_t last_delivery = 0;
  bool done = false;
};

class Engine {
 public:
  Engine(const Scenario& sc, std::uint64_t seed, const RunOptions& opts)
      : sc_(sc),
        seed_(seed),
        opts_(opts),
        topo_(build_topology(sc)),
        ctl_(topo_, sc.protocol.params.rtt, sc.protocol.associated_rate),
        latency_(one_way_latency(sc.protocol.params.rtt)),
        fb_delay_(sc.protocol.params.rtt - latency_),
        local_delay_(sc.protocol.local_feedback_delay.value_or(fb_delay_)) {
    channel_.reserve(topo_.link_count());
    for (std::size_t l = 0; l < topo_.link_count(); ++l) {
      channel_.push_back(topo_.link(l).erasure);
      link_rng_.emplace_back(derive_seed(seed_, {kLinkStream, l}));
      detectors_.emplace_back(3 * static_cast<std::size_t>(sc.protocol.params.rtt));
    }
    erased_now_.assign(topo_.link_count(), false);
    node_up_.assign(topo_.node_count(), true);

    for (std::size_t i = 0; i < sc.services.size(); ++i) {
      const ServiceSpec& spec = sc.services[i];
      auto s = std::make_unique<ServiceRuntime>();
      s->index = i;
      s->spec = &spec;
      const std::size_t src = *topo_.find_node(spec.src);
      const std::size_t dst = *topo_.find_node(spec.dst);
      s->id = ctl_.init_service(src, dst, spec.priority);
      s->header = PacketHeader{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(src),
                               static_cast<std::uint32_t>(dst), static_cast<std::uint16_t>(5000 + i),
                               static_cast<std::uint16_t>(80)};
      s->enc = std::make_unique<Encoder>(s->header, sc.protocol.params.max_window,
                                         derive_seed(seed_, {kEncoderStream, i}));
      for (PacketIndex k = 1; k <= spec.packets; ++k) {
        s->enc->push(InfoPacket{k, make_payload(seed_, i, k, spec.payload_bytes)});
      }
      s->dec = std::make_unique<Decoder>(sc.protocol.feedback, spec.payload_bytes);
      if (sc.protocol.feedback == FeedbackMode::PerPacket) s->tracker.emplace();
      s->birth.assign(spec.packets, 0);
      s->m.service = i;
      s->m.src = spec.src;
      s->m.dst = spec.dst;
      s->m.packets = spec.packets;
      services_.push_back(std::move(s));
    }
    for (auto& s : services_) attach(*s);
    for (auto& s : services_) s->m.min_cut = initial_min_cut(*s);
  }

  MetricsReport run() {
    std::uint32_t t = 0;
    for (; t < sc_.slots; ++t) {
      if (all_done()) break;
      apply_events(t);
      apply_link_changes();
      for (std::size_t l = 0; l < channel_.size(); ++l) {
        const bool down = !node_up_[topo_.link(l).from] || !node_up_[topo_.link(l).to];
        erased_now_[l] = link_rng_[l].bernoulli(channel_[l]) || down;
      }
      for (auto& s : services_) {
        if (s->done) continue;
        if (s->active) send(*s, t);
        receive(*s, t);
      }
    }
    return report(t);
  }

 private:
  MixingMode mode_for(std::size_t node) const {
    if (auto it = sc_.protocol.mixing_overrides.find(topo_.node(node).name); it != sc_.protocol.mixing_overrides.end()) {
      return it->second;
    }
    return opts_.mixing.value_or(sc_.protocol.mixing);
  }

  void attach(ServiceRuntime& s) {
    const auto info = ctl_.service(s.id);
    const auto reply = std::get<msg::GprtReply>(ctl_.handle(msg::GetGprt{s.id, std::nullopt}));
    rates_ = std::get<msg::LinkRatesReply>(ctl_.handle(msg::GetLinkRates{})).rates;
    s.active = info && !info->suspended && reply.found && !reply.gprt.paths.empty();
    if (!s.active) return;

    const bool rerouted = info->layout.nodes != s.layout.nodes || info->layout.hops != s.layout.hops;
    s.layout = info->layout;
    s.paths = reply.gprt.paths;
    const std::size_t n = s.layout.nodes.size();

    if (sc_.protocol.feedback == FeedbackMode::PerPacket) {
      for (NodeRole r : s.layout.roles) {
        if (r == NodeRole::ReEnc) throw ConfigError("per_packet feedback requires routes without reenc nodes");
      }
    }

    s.vn_entry.assign(n, false);
    s.horizon.assign(n, 0);
    s.mode.assign(n, MixingMode::Selective);
    for (std::size_t pos = 1; pos + 1 < n; ++pos) {
      const auto vn = topo_.vn_of(s.layout.nodes[pos]);
      s.vn_entry[pos] = !vn || topo_.vn_of(s.layout.nodes[pos - 1]) != vn;
      std::size_t end = pos;
      if (sc_.protocol.per_reenc_budget || !vn) {
        end = pos + 1;
        while (end + 1 < n && s.layout.roles[end] == NodeRole::Relay) ++end;
      } else {
        while (end + 2 < n && topo_.vn_of(s.layout.nodes[end + 1]) == vn) ++end;
        if (end == pos) end = pos + 1;
      }
      s.horizon[pos] = end;
      s.mode[pos] = mode_for(s.layout.nodes[pos]);
    }

    if (rerouted) {
      s.reenc.clear();
      s.reenc.resize(n);
      for (std::size_t pos = 1; pos + 1 < n; ++pos) {
        if (s.layout.roles[pos] != NodeRole::ReEnc) continue;
        s.reenc[pos] = std::make_unique<ReEncoder>(s.mode[pos], s.header, sc_.protocol.params.max_window,
                                                   derive_seed(seed_, {kReEncStream, s.index, s.layout.nodes[pos]}));
      }
    }

    std::vector<double> prior;
    for (const GlobalPath& g : s.paths) prior.push_back(g.rate);
    if (!s.budget) {
      s.budget = std::make_unique<SourceBudget>(sc_.protocol.params, std::move(prior));
    } else {
      s.budget->set_prior_rates(std::move(prior));
    }
  }

  double initial_min_cut(const ServiceRuntime& s) const {
    if (!s.active) return 0.0;
    std::vector<FlowEdge> edges;
    for (const auto& hop : s.layout.hops) {
      for (std::size_t l : hop) edges.push_back(FlowEdge{topo_.link(l).from, topo_.link(l).to, topo_.link(l).rate()});
    }
    return max_flow(topo_.node_count(), edges, s.layout.nodes.front(), s.layout.nodes.back());
  }

  bool all_done() const {
    return std::all_of(services_.begin(), services_.end(), [](const auto& s) { return s->done; });
  }

  void apply_events(std::uint32_t t) {
    bool topo_changed = false;
    for (const EventSpec& e : sc_.events) {
      if (e.slot != t) continue;
      if (e.kind == EventSpec::Kind::LinkErasure) {
        const std::size_t a = *topo_.find_node(e.from);
        const std::size_t b = *topo_.find_node(e.to);
        std::size_t k = 0;
        for (std::size_t l = 0; l < topo_.link_count(); ++l) {
          if (topo_.link(l).from != a || topo_.link(l).to != b) continue;
          if (!e.index || *e.index == k) channel_[l] = e.erasure;
          ++k;
        }
      } else {
        const std::size_t node = *topo_.find_node(e.node);
        const bool up = e.kind == EventSpec::Kind::NodeJoin;
        node_up_[node] = up;
        ctl_.handle(msg::EventTopoChange{node, up});
        topo_changed = true;
      }
    }
    if (topo_changed) {
      for (auto& s : services_) attach(*s);
    }
  }

  void apply_link_changes() {
    if (fired_.empty()) return;
    std::vector<bool> touched(services_.size(), false);
    for (std::size_t l : fired_) {
      ++link_changes_;
      const auto reply = std::get<msg::RecomputeReply>(ctl_.handle(msg::EventLinkChange{l, detectors_[l].recent_rate()}));
      for (ServiceId id : reply.affected) {
        for (auto& s : services_) touched[s->index] = touched[s->index] || s->id == id;
      }
    }
    fired_.clear();
    for (auto& s : services_) {
      if (touched[s->index]) attach(*s);
    }
  }

  // Transmits on link l; returns whether the packet got through.
  bool transmit(std::size_t l) {
    auto& lm = link_stats_[l];
    ++lm.first;
    const bool erased = erased_now_[l];
    lm.second += erased ? 1 : 0;
    if (sc_.protocol.change_detection && detectors_[l].observe(!erased)) fired_.push_back(l);
    return !erased;
  }

  void send(ServiceRuntime& s, std::uint32_t t) {
    while (!s.fb_queue.empty() && s.fb_queue.front().first <= t) {
      FeedbackMessage fb = std::move(s.fb_queue.front().second);
      s.fb_queue.pop_front();
      if (s.tracker) fb = s.tracker->absorb(fb);
      s.enc->acknowledge(fb.w_min_ack);
      s.budget->on_feedback(fb);
    }
    while (!s.local_queue.empty() && s.local_queue.front().first <= t) {
      for (auto& r : s.reenc) {
        if (r) r->flush(s.local_queue.front().second);
      }
      s.local_queue.pop_front();
    }

    const WindowState ws{s.enc->window(), s.enc->w_max(), s.enc->unsent()};
    const SlotPlan plan = s.budget->plan(t, ws);
    const PacketIndex w_max_before = s.enc->w_max();
    auto pkts = s.enc->encode_batch(plan.n_new, plan.n_rep, t);
    for (auto& p : pkts) {
      p.tx_id = s.next_tx++;
      if (s.tracker) s.tracker->record_sent(p);
    }
    for (PacketIndex idx = w_max_before + 1; idx <= s.enc->w_max(); ++idx) s.birth[idx - 1] = t;
    s.budget->commit(t, plan, s.enc->w_max());
    for (std::size_t p = 0; p < plan.types.size(); ++p) {
      if (plan.kinds[p] == RepKind::Fec) ++s.m.fec_sent;
      if (plan.kinds[p] == RepKind::FbFec) ++s.m.fbfec_sent;
    }
    s.m.new_sent += plan.n_new;
    s.m.rep_sent += plan.n_rep;

    const std::size_t n_paths = s.paths.size();
    std::vector<std::optional<CodedPacket>> cur(n_paths);
    std::vector<PathType> cur_type = plan.types;
    for (const Allocation& a : allocate_packets(pkts, plan.types)) cur[a.path] = *a.packet;

    const std::size_t hops = s.layout.hops.size();
    for (std::size_t h = 0; h < hops; ++h) {
      std::vector<std::optional<CodedPacket>> arrived(n_paths);
      for (std::size_t p = 0; p < n_paths; ++p) {
        if (cur[p] && transmit(s.paths[p].links[h])) arrived[p] = over_wire(*cur[p]);
      }
      const std::size_t pos = h + 1;
      if (pos == hops) {
        std::vector<PathStatus> status(n_paths, PathStatus::Idle);
        auto& q = s.dec_queue[t + latency_];
        for (std::size_t p = 0; p < n_paths; ++p) {
          if (arrived[p]) {
            status[p] = PathStatus::Received;
            q.push_back(std::move(*arrived[p]));
          } else if (cur_type[p] != PathType::Idle) {
            status[p] = PathStatus::Erased;
          }
        }
        s.status_by_slot[t] = std::move(status);
        break;
      }
      if (s.layout.roles[pos] != NodeRole::ReEnc) {
        cur = std::move(arrived);
        continue;
      }
      reencode_at(s, pos, h, t, arrived, cur, cur_type);
    }
  }

  void reencode_at(ServiceRuntime& s, std::size_t pos, std::size_t h, std::uint32_t t,
                   const std::vector<std::optional<CodedPacket>>& arrived, std::vector<std::optional<CodedPacket>>& cur,
                   std::vector<PathType>& cur_type) {
    const std::size_t n_paths = s.paths.size();
    ReEncoder& re = *s.reenc[pos];
    std::vector<Arrival> in;
    bool has_new = false;
    bool has_rep = false;
    for (std::size_t p = 0; p < n_paths; ++p) {
      if (!arrived[p]) continue;
      in.push_back(Arrival{p, *arrived[p]});
      (arrived[p]->is_rep() ? has_rep : has_new) = true;
    }
    std::vector<std::optional<CodedPacket>> out(n_paths);
    std::vector<PathType> types(n_paths, PathType::Idle);

    if (s.mode[pos] == MixingMode::None) {
      const auto res = re.reencode(in, n_paths, 0, t);
      for (std::size_t i = 0; i < res.packets.size(); ++i) {
        const std::size_t p = res.in_slot[i];
        types[p] = res.packets[i].is_rep() ? PathType::Rep : PathType::New;
        out[p] = res.packets[i];
      }
    } else if (s.mode[pos] == MixingMode::Traditional) {
      const auto res = re.reencode(in, n_paths, 0, t);
      for (std::size_t p = 0; p < res.packets.size(); ++p) {
        types[p] = PathType::New;
        out[p] = res.packets[p];
      }
    } else {
      if (s.vn_entry[pos] || sc_.protocol.per_reenc_budget) {
        std::vector<double> in2;
        for (std::size_t p = 0; p < n_paths; ++p) {
          if (cur_type[p] == PathType::Rep) in2.push_back(rates_[s.paths[p].links[h]]);
        }
        std::vector<double> out_rates(n_paths, 1.0);
        for (std::size_t p = 0; p < n_paths; ++p) {
          for (std::size_t k = pos; k < s.horizon[pos]; ++k) out_rates[p] = std::min(out_rates[p], rates_[s.paths[p].links[k]]);
        }
        const PathSplit split = bit_fill_vn(in2, out_rates, has_new);
        for (std::size_t p : split.type1) types[p] = PathType::New;
        for (std::size_t p : split.type2) types[p] = PathType::Rep;
      } else {
        for (std::size_t p = 0; p < n_paths; ++p) types[p] = cur_type[p] == PathType::Rep ? PathType::Rep : PathType::New;
      }
      const bool rep_ready = has_rep || re.rep_buffered() > 0;
      for (PathType& ty : types) {
        if (ty == PathType::New && !has_new) ty = PathType::Rep;
        if (ty == PathType::Rep && !rep_ready) ty = has_new ? PathType::New : PathType::Idle;
      }
      const auto n_new = static_cast<std::size_t>(std::count(types.begin(), types.end(), PathType::New));
      const auto n_rep = static_cast<std::size_t>(std::count(types.begin(), types.end(), PathType::Rep));
      const auto res = re.reencode(in, n_new, n_rep, t);
      std::size_t i_new = 0;
      std::size_t i_rep = n_new;
      if (res.new_starved) i_rep = 0;
      for (std::size_t p = 0; p < n_paths; ++p) {
        if (types[p] == PathType::New && !res.new_starved && i_new < n_new) {
          out[p] = res.packets[i_new++];
        } else if (types[p] == PathType::Rep && !res.rep_starved && i_rep < res.packets.size()) {
          out[p] = res.packets[i_rep++];
        } else {
          types[p] = PathType::Idle;
        }
      }
    }
    cur = std::move(out);
    cur_type = std::move(types);
  }

  void receive(ServiceRuntime& s, std::uint32_t t) {
    if (auto it = s.dec_queue.find(t); it != s.dec_queue.end()) {
      for (const CodedPacket& p : it->second) {
        IngestResult r;
        try {
          r = s.dec->ingest(p);
        } catch (const CorruptionError&) {
          ++s.m.decode_errors;
          continue;
        }
        for (const InfoPacket& info : r.delivered) {
          if (info.index != s.m.delivered + 1) ++s.m.order_errors;
          if (info.payload != make_payload(seed_, s.index, info.index, s.spec->payload_bytes)) ++s.m.decode_errors;
          const std::uint32_t delay = t - s.birth[info.index - 1];
          ++s.m.delivered;
          s.delay_sum += delay;
          s.m.max_delay = std::max(s.m.max_delay, delay);
          s.m.delivery_slots.push_back(t);
          s.last_delivery = t;
        }
      }
      s.dec_queue.erase(it);
    }
    if (s.m.delivered >= s.spec->packets) {
      s.done = true;
      return;
    }
    if (t < latency_) return;

    const std::uint32_t data_slot = t - latency_;
    FeedbackMessage fb = s.dec->feedback(t);
    fb.data_slot = data_slot;
    if (auto it = s.status_by_slot.find(data_slot); it != s.status_by_slot.end()) {
      fb.path_status = std::move(it->second);
      s.status_by_slot.erase(it);
    }
    s.local_queue.emplace_back(t + local_delay_, fb.w_min_ack);
    s.fb_queue.emplace_back(t + fb_delay_, std::move(fb));
  }

  MetricsReport report(std::uint32_t slots_run) {
    MetricsReport r;
    r.seed = seed_;
    r.mixing = opts_.mixing.value_or(sc_.protocol.mixing);
    r.slots_run = slots_run;
    r.link_changes = link_changes_;
    r.complete = all_done();
    for (auto& s : services_) {
      ServiceMetrics m = s->m;
      m.complete = s->done;
      m.suspended = !s->active;
      m.slots = s->done ? s->last_delivery + 1 : slots_run;
      const double span = m.slots > latency_ ? static_cast<double>(m.slots - latency_) : 0.0;
      m.throughput = span > 0.0 && m.min_cut > 0.0 ? static_cast<double>(m.delivered) / (span * m.min_cut) : 0.0;
      m.mean_delay = m.delivered > 0 ? s->delay_sum / static_cast<double>(m.delivered) : 0.0;
      r.services.push_back(std::move(m));
    }
    for (std::size_t l = 0; l < topo_.link_count(); ++l) {
      LinkMetrics lm;
      lm.link = l;
      lm.from = topo_.node(topo_.link(l).from).name;
      lm.to = topo_.node(topo_.link(l).to).name;
      lm.erasure = topo_.link(l).erasure;
      if (auto it = link_stats_.find(l); it != link_stats_.end()) {
        lm.sent = it->second.first;
        lm.erased = it->second.second;
      }
      r.links.push_back(lm);
    }
    return r;
  }

  const Scenario& sc_;
  std::uint64_t seed_;
  RunOptions opts_;
  Topology topo_;
  Controller ctl_;
  std::uint32_t latency_;
  std::uint32_t fb_delay_;
  std::uint32_t local_delay_;
  std::vector<double> channel_;
  std::vector<Rng> link_rng_;
  std::vector<ChangeDetector> detectors_;
  std::vector<bool> erased_now_;
  std::vector<bool> node_up_;
  std::vector<double> rates_;
  std::vector<std::size_t> fired_;
  std::size_t link_changes_ = 0;
  std::map<std::size_t, std::pair<std::uint64_t, std::uint64_t>> link_stats_;
  std::vector<std::unique_ptr<ServiceRuntime>> services_;
};

}  // namespace

MetricsReport run(const Scenario& sc, std::uint64_t seed, const RunOptions& opts) {
  Engine engine(sc, seed, opts);
  return engine.run();
}

}  // namespace acrlnc
