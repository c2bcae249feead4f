#pragma once

// Broadcast communication with distance- and length-dependent delays.
// Every agent keeps a KnowledgeBase of the freshest timestamped state it
// has heard for each peer and rebroadcasts it periodically; control
// packets (decision orders and confirmations) are flooded over the same
// medium.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <queue>
#include <unordered_map>
#include <span>
#include <variant>
#include <vector>

#include "hytop/geometry.hpp"
#include "hytop/graph.hpp"

namespace hytop {

/// One per-node entry of a broadcast packet. `progress` is the sender's
/// reference progress along its mission path, carried with the position.
struct Record {
  NodeId node = 0;
  Vec position = Vec::Zero();
  double progress = 0.0;
  double rate = 1.0;  // reference rate at the time of the report (0 while held)
  double timestamp = 0.0;
  // Relay provenance: the node that first heard `node` directly, the delay
  // of that first hop and the number of hops so far.
  NodeId first_hop = 0;
  double first_hop_delay = 0.0;
  std::uint16_t hops = 0;
};

struct Message {
  NodeId origin = 0;
  double emit_time = 0.0;
  std::vector<Record> records;
};

struct KnowledgeEntry {
  bool known = false;
  Vec position = Vec::Zero();
  double progress = 0.0;
  double rate = 1.0;
  double timestamp = 0.0;
  double receive_time = 0.0;
  NodeId first_hop = 0;
  double first_hop_delay = 0.0;
  std::uint16_t hops = 0;
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(NodeId owner, std::size_t node_count);

  NodeId owner() const { return owner_; }
  std::size_t size() const { return entries_.size(); }
  const KnowledgeEntry& entry(NodeId n) const { return entries_[n]; }

  /// Exact self-knowledge at time `now`.
  void refresh_self(const Vec& position, double progress, double now, double rate = 1.0);
  /// Prior knowledge (e.g. the shared initial configuration).
  void seed(NodeId node, const Vec& position, double progress, double timestamp);

  /// Latest-timestamp merge: a record replaces the stored entry only when
  /// strictly newer; the owner's own entry is never overwritten. Returns
  /// the number of replaced entries. Throws std::invalid_argument if
  /// receive_time precedes the emission time.
  std::size_t merge(const Message& msg, double receive_time);

  /// All known entries as a packet emitted by the owner at `emit_time`.
  Message snapshot(double emit_time) const;

 private:
  NodeId owner_ = 0;
  std::vector<KnowledgeEntry> entries_;
};

struct ChannelModel {
  double speed = 25.0;              // v, m/s
  double max_message_length = 0.1;  // dT_M, s
  double range = 10.0;              // R, m

  double delay(double distance) const { return distance / speed + max_message_length; }
  double max_delay() const { return delay(range); }
};

struct Delivery {
  NodeId receiver = 0;
  std::shared_ptr<const Message> message;
  double delivery_time = 0.0;
};

/// Keeps the k records nearest the sender (by recorded position) plus the
/// sender's own record; ties at the cut go to the lower node id.
Message truncate(const Message& msg, std::size_t k, const Vec& sender_position);

/// Refreshes the sender's own entry to its true state, snapshots its
/// knowledge base and returns one delivery per agent within range.
/// `truncate_k == 0` disables truncation.
std::vector<Delivery> broadcast(NodeId sender, KnowledgeBase& kb, std::span<const Vec> positions,
                                double sender_progress, const ChannelModel& channel, double now,
                                std::size_t truncate_k = 0, double sample_time = -1.0, double sender_rate = 1.0);

// --- decision protocol packets -------------------------------------------

struct OrderPayload {
  std::uint64_t decision_id = 0;
  NodeId central = 0;
  NodeId new_central = 0;
  double decision_time = 0.0;
  double timeout_at = 0.0;
  EdgeList base;
  EdgeList deleted;
  EdgeList proposed;
};

struct ConfirmPayload {
  std::uint64_t decision_id = 0;
  Edge edge;
  bool accepted = false;
  NodeId responder = 0;
};

struct ControlPacket {
  std::uint64_t id = 0;
  NodeId origin = 0;
  double emit_time = 0.0;
  int depth = 1;  // causal generation within one decision: 1 = order, 2 = reply
  std::variant<OrderPayload, ConfirmPayload> body;
};

struct NetworkConfig {
  ChannelModel channel;
  double broadcast_period = 0.25;
  std::size_t truncate_k = 0;
  double drop_probability = 0.0;
};

struct NetworkCounters {
  std::uint64_t broadcasts = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t dropped = 0;
  std::uint64_t control_emissions = 0;
  std::uint64_t control_deliveries = 0;
  std::uint64_t records_merged = 0;
};

/// Single-owner discrete-event network for one simulation instance.
class Network {
 public:
  using ControlHandler = std::function<void(NodeId receiver, const ControlPacket& packet, double time)>;

  Network(std::size_t node_count, NetworkConfig config, std::uint64_t seed);

  std::size_t size() const { return kbs_.size(); }
  KnowledgeBase& kb(NodeId n) { return kbs_[n]; }
  const KnowledgeBase& kb(NodeId n) const { return kbs_[n]; }
  const NetworkConfig& config() const { return config_; }
  const NetworkCounters& counters() const { return counters_; }

  /// Queues one periodic broadcast per node in [tick_start, tick_start + period),
  /// staggered by node id. Positions are sampled at `tick_start`.
  void schedule_broadcast_round(double tick_start);

  /// Floods a control packet from `origin` at time `now`; every node relays
  /// it once on first receipt. Returns the packet id.
  std::uint64_t flood(NodeId origin, double now, std::variant<OrderPayload, ConfirmPayload> body, int depth,
                      std::span<const Vec> positions);

  /// Processes all events with time <= until, in (time, sequence) order.
  /// `rates` may be empty (every reference treated as moving).
  void advance(double until, std::span<const Vec> positions, std::span<const double> progress,
               const ControlHandler& on_control, std::span<const double> rates = {});

  /// Newline-delimited JSON records (origin, emit_time, receiver, delivery_time).
  void set_message_log(std::ostream* log) { log_ = log; }

  std::size_t pending_events() const { return queue_.size(); }

 private:
  struct BroadcastEmit {
    NodeId sender;
    double sample_time;
  };
  struct MessageArrival {
    NodeId receiver;
    std::shared_ptr<const Message> message;
  };
  struct ControlArrival {
    NodeId receiver;
    std::shared_ptr<const ControlPacket> packet;
  };
  using Payload = std::variant<BroadcastEmit, MessageArrival, ControlArrival>;
  struct Event {
    double time;
    std::uint64_t seq;
    Payload payload;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  void push(double time, Payload payload);
  bool dropped();
  void emit_control(NodeId node, const std::shared_ptr<const ControlPacket>& packet, double now,
                    std::span<const Vec> positions);
  void log_delivery(NodeId origin, double emit_time, NodeId receiver, double delivery_time, const char* kind);

  NetworkConfig config_;
  std::vector<KnowledgeBase> kbs_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t next_packet_ = 1;
  struct FloodState {
    double emit_time = 0.0;
    std::vector<char> seen;
  };
  std::unordered_map<std::uint64_t, FloodState> floods_;
  Rng rng_;
  NetworkCounters counters_;
  std::ostream* log_ = nullptr;
};

}  // namespace hytop
