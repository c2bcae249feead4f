#include "hytop/comms.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace hytop {

KnowledgeBase::KnowledgeBase(NodeId owner, std::size_t node_count) : owner_(owner), entries_(node_count) {
  if (owner >= node_count) throw std::out_of_range("knowledge base owner out of range");
}

void KnowledgeBase::refresh_self(const Vec& position, double progress, double now, double rate) {
  KnowledgeEntry& e = entries_[owner_];
  e.known = true;
  e.position = position;
  e.progress = progress;
  e.rate = rate;
  e.timestamp = now;
  e.receive_time = now;
  e.first_hop = owner_;
  e.first_hop_delay = 0.0;
  e.hops = 0;
}

void KnowledgeBase::seed(NodeId node, const Vec& position, double progress, double timestamp) {
  KnowledgeEntry& e = entries_.at(node);
  e.known = true;
  e.position = position;
  e.progress = progress;
  e.timestamp = timestamp;
  e.receive_time = timestamp;
  e.first_hop = owner_;
  e.first_hop_delay = 0.0;
  e.hops = node == owner_ ? 0 : 1;
}

std::size_t KnowledgeBase::merge(const Message& msg, double receive_time) {
  if (receive_time < msg.emit_time) throw std::invalid_argument("merge: receive time precedes emission");
  std::size_t replaced = 0;
  for (const Record& r : msg.records) {
    if (r.node == owner_ || r.node >= entries_.size()) continue;
    KnowledgeEntry& e = entries_[r.node];
    if (e.known && !(r.timestamp > e.timestamp)) continue;
    e.known = true;
    e.position = r.position;
    e.progress = r.progress;
    e.rate = r.rate;
    e.timestamp = r.timestamp;
    e.receive_time = receive_time;
    if (r.node == msg.origin) {
      e.first_hop = owner_;
      e.first_hop_delay = receive_time - msg.emit_time;
      e.hops = 1;
    } else {
      e.first_hop = r.first_hop;
      e.first_hop_delay = r.first_hop_delay;
      e.hops = static_cast<std::uint16_t>(r.hops + 1);
    }
    ++replaced;
  }
  return replaced;
}

Message KnowledgeBase::snapshot(double emit_time) const {
  Message m;
  m.origin = owner_;
  m.emit_time = emit_time;
  m.records.reserve(entries_.size());
  for (NodeId n = 0; n < entries_.size(); ++n) {
    const KnowledgeEntry& e = entries_[n];
    if (!e.known) continue;
    m.records.push_back(
        Record{n, e.position, e.progress, e.rate, e.timestamp, e.first_hop, e.first_hop_delay, e.hops});
  }
  return m;
}

Message truncate(const Message& msg, std::size_t k, const Vec& sender_position) {
  if (k == 0) throw std::invalid_argument("truncate: k must be at least 1");
  std::vector<std::size_t> others;
  const Record* self = nullptr;
  for (std::size_t i = 0; i < msg.records.size(); ++i) {
    if (msg.records[i].node == msg.origin)
      self = &msg.records[i];
    else
      others.push_back(i);
  }
  if (others.size() <= k) return msg;
  std::sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
    const double da = (msg.records[a].position - sender_position).squaredNorm();
    const double db = (msg.records[b].position - sender_position).squaredNorm();
    return da != db ? da < db : msg.records[a].node < msg.records[b].node;
  });
  others.resize(k);
  Message out;
  out.origin = msg.origin;
  out.emit_time = msg.emit_time;
  if (self) out.records.push_back(*self);
  for (std::size_t i : others) out.records.push_back(msg.records[i]);
  std::sort(out.records.begin(), out.records.end(), [](const Record& a, const Record& b) { return a.node < b.node; });
  return out;
}

std::vector<Delivery> broadcast(NodeId sender, KnowledgeBase& kb, std::span<const Vec> positions,
                                double sender_progress, const ChannelModel& channel, double now,
                                std::size_t truncate_k, double sample_time, double sender_rate) {
  const double stamp = sample_time < 0.0 ? now : sample_time;
  kb.refresh_self(positions[sender], sender_progress, stamp, sender_rate);
  auto msg = std::make_shared<Message>(kb.snapshot(now));
  if (truncate_k > 0) *msg = truncate(*msg, truncate_k, positions[sender]);
  std::shared_ptr<const Message> shared = std::move(msg);
  std::vector<Delivery> out;
  for (NodeId j = 0; j < positions.size(); ++j) {
    if (j == sender) continue;
    const double d = distance(positions[sender], positions[j]);
    if (d <= channel.range) out.push_back(Delivery{j, shared, now + channel.delay(d)});
  }
  return out;
}

Network::Network(std::size_t node_count, NetworkConfig config, std::uint64_t seed)
    : config_(config), rng_(seed) {
  if (config_.broadcast_period <= 0.0) throw std::invalid_argument("broadcast period must be positive");
  if (config_.drop_probability < 0.0 || config_.drop_probability > 1.0)
    throw std::invalid_argument("drop probability must lie in [0, 1]");
  kbs_.reserve(node_count);
  for (NodeId n = 0; n < node_count; ++n) kbs_.emplace_back(n, node_count);
}

void Network::push(double time, Payload payload) { queue_.push(Event{time, seq_++, std::move(payload)}); }

bool Network::dropped() {
  if (config_.drop_probability <= 0.0) return false;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng_) < config_.drop_probability) {
    ++counters_.dropped;
    return true;
  }
  return false;
}

void Network::schedule_broadcast_round(double tick_start) {
  const std::size_t n = kbs_.size();
  for (NodeId s = 0; s < n; ++s) {
    const double offset = config_.broadcast_period * static_cast<double>(s) / static_cast<double>(n);
    push(tick_start + offset, BroadcastEmit{s, tick_start});
  }
}

void Network::log_delivery(NodeId origin, double emit_time, NodeId receiver, double delivery_time,
                           const char* kind) {
  if (!log_) return;
  nlohmann::json j{{"kind", kind},
                   {"origin", origin + 1},
                   {"emit_time", emit_time},
                   {"receiver", receiver + 1},
                   {"delivery_time", delivery_time}};
  *log_ << j.dump() << '\n';
}

void Network::emit_control(NodeId node, const std::shared_ptr<const ControlPacket>& packet, double now,
                           std::span<const Vec> positions) {
  ++counters_.control_emissions;
  for (NodeId j = 0; j < positions.size(); ++j) {
    if (j == node) continue;
    const double d = distance(positions[node], positions[j]);
    if (d > config_.channel.range) continue;
    if (dropped()) continue;
    push(now + config_.channel.delay(d), ControlArrival{j, packet});
    log_delivery(node, now, j, now + config_.channel.delay(d), "control");
  }
}

std::uint64_t Network::flood(NodeId origin, double now, std::variant<OrderPayload, ConfirmPayload> body, int depth,
                             std::span<const Vec> positions) {
  auto packet = std::make_shared<ControlPacket>();
  packet->id = next_packet_++;
  packet->origin = origin;
  packet->emit_time = now;
  packet->depth = depth;
  packet->body = std::move(body);
  FloodState& st = floods_[packet->id];
  st.emit_time = now;
  st.seen.assign(kbs_.size(), 0);
  st.seen[origin] = 1;
  emit_control(origin, packet, now, positions);
  return packet->id;
}

void Network::advance(double until, std::span<const Vec> positions, std::span<const double> progress,
                      const ControlHandler& on_control, std::span<const double> rates) {
  while (!queue_.empty() && queue_.top().time <= until) {
    Event ev = queue_.top();
    queue_.pop();
    if (auto* b = std::get_if<BroadcastEmit>(&ev.payload)) {
      ++counters_.broadcasts;
      auto deliveries = broadcast(b->sender, kbs_[b->sender], positions, progress[b->sender], config_.channel,
                                  ev.time, config_.truncate_k, b->sample_time,
                                  rates.empty() ? 1.0 : rates[b->sender]);
      for (Delivery& d : deliveries) {
        if (dropped()) continue;
        log_delivery(b->sender, ev.time, d.receiver, d.delivery_time, "broadcast");
        push(d.delivery_time, MessageArrival{d.receiver, std::move(d.message)});
      }
    } else if (auto* m = std::get_if<MessageArrival>(&ev.payload)) {
      ++counters_.deliveries;
      counters_.records_merged += kbs_[m->receiver].merge(*m->message, ev.time);
    } else if (auto* c = std::get_if<ControlArrival>(&ev.payload)) {
      ++counters_.control_deliveries;
      auto it = floods_.find(c->packet->id);
      if (it == floods_.end() || it->second.seen[c->receiver]) continue;
      it->second.seen[c->receiver] = 1;
      // Relay first, then let the receiver act on the packet.
      emit_control(c->receiver, c->packet, ev.time, positions);
      if (on_control) on_control(c->receiver, *c->packet, ev.time);
    }
  }
  // Forget floods that can no longer be in flight.
  const double horizon = until - 10.0 * config_.channel.max_delay() * static_cast<double>(kbs_.size());
  std::erase_if(floods_, [&](const auto& kv) { return kv.second.emit_time < horizon; });
}

}  // namespace hytop
