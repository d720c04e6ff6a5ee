#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridagg/bytes.hpp"

#include "json.hpp"

namespace gridagg {

// Every message class that crosses the bus.  The names below are the wire
// names used in envelope JSON.
enum class MsgKind {
  // attestation handshake
  Identify,
  CredOk,
  Challenge,
  Quote,
  AttestOk,
  // measurement traffic
  Measure,
  Plain,
  // homomorphic protocol
  ConfigReq,
  Pubkey,
  Roster,
  Ct,
  Combined,
  Partial,
  Sum,
  // releases to the utility
  Aggregate,
  Billing,
};

std::string_view kind_name(MsgKind kind);
MsgKind kind_from_name(std::string_view name);

// One bus message.  seq is per (sender, topic) and strictly increasing;
// the bus enforces that on publish.
struct Envelope {
  std::string topic;
  std::string sender;
  MsgKind kind = MsgKind::Plain;
  std::optional<uint32_t> slot;
  Bytes payload;
  uint64_t seq = 0;

  nlohmann::json to_json() const;
  static Envelope from_json(const nlohmann::json& j);

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

// In-process publish/subscribe bus with per-topic append-only logs.
//
// Delivery model: a subscription is a cursor into a topic's log, so each
// subscriber sees every envelope exactly once, in publish order; envelopes
// from one sender stay in the order that sender published them.  The log
// doubles as the recorded transcript used by the privacy audit — turning
// recording off makes transcript() unavailable but does not affect
// delivery, because delivery reads through the same log the transcript
// exposes.
class Bus {
 public:
  explicit Bus(bool record_by_default = true);

  // Validates the envelope (topic match, seq progression) and appends it.
  // Topics are created on first use.
  void publish(const std::string& topic, Envelope env);

  class Subscription {
   public:
    std::optional<Envelope> poll();
    std::vector<Envelope> drain();

   private:
    friend class Bus;
    struct TopicState;
    Subscription(std::shared_ptr<TopicState> state, size_t cursor)
        : state_(std::move(state)), cursor_(cursor) {}
    std::shared_ptr<TopicState> state_;
    size_t cursor_ = 0;
  };

  // New subscriptions only see envelopes published after the subscription
  // was created.
  Subscription subscribe(const std::string& topic);

  // Full recorded history of a topic, for auditing.  Throws
  // Errc::RecordingDisabled if recording was switched off for the topic.
  std::vector<Envelope> transcript(const std::string& topic) const;

  void set_recording(const std::string& topic, bool on);
  std::vector<std::string> topics() const;

  // Publishing handle for one logical sender; stamps sender id and
  // per-topic sequence numbers.  Not safe to share across threads.
  class Sender {
   public:
    void publish(const std::string& topic, MsgKind kind, std::optional<uint32_t> slot,
                 Bytes payload);
    const std::string& id() const { return id_; }

   private:
    friend class Bus;
    Sender(Bus* bus, std::string id) : bus_(bus), id_(std::move(id)) {}
    Bus* bus_;
    std::string id_;
    std::map<std::string, uint64_t> next_seq_;
  };

  Sender sender(std::string id) { return Sender(this, std::move(id)); }

 private:
  using TopicState = Subscription::TopicState;
  std::shared_ptr<TopicState> topic_state(const std::string& topic);
  std::shared_ptr<const TopicState> find_topic(const std::string& topic) const;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<TopicState>> topics_;
  bool record_by_default_;
};

}  // namespace gridagg
