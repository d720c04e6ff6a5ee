#include "gridagg/bus.hpp"

#include "json_guard.hpp"

#include <array>

#include "gridagg/errors.hpp"

namespace gridagg {

namespace {

struct KindName {
  MsgKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 16> kKindNames{{
    {MsgKind::Identify, "IDENTIFY"},
    {MsgKind::CredOk, "CRED_OK"},
    {MsgKind::Challenge, "CHALLENGE"},
    {MsgKind::Quote, "QUOTE"},
    {MsgKind::AttestOk, "ATTEST_OK"},
    {MsgKind::Measure, "MEASURE"},
    {MsgKind::Plain, "PLAIN"},
    {MsgKind::ConfigReq, "CONFIG_REQ"},
    {MsgKind::Pubkey, "PUBKEY"},
    {MsgKind::Roster, "ROSTER"},
    {MsgKind::Ct, "CT"},
    {MsgKind::Combined, "COMBINED"},
    {MsgKind::Partial, "PARTIAL"},
    {MsgKind::Sum, "SUM"},
    {MsgKind::Aggregate, "AGGREGATE"},
    {MsgKind::Billing, "BILLING"},
}};

}  // namespace

std::string_view kind_name(MsgKind kind) {
  for (const auto& e : kKindNames) {
    if (e.kind == kind) return e.name;
  }
  fail(Errc::InvalidArgument, "unknown message kind");
}

MsgKind kind_from_name(std::string_view name) {
  for (const auto& e : kKindNames) {
    if (e.name == name) return e.kind;
  }
  fail(Errc::ParseError, "unknown message kind '" + std::string(name) + "'");
}

nlohmann::json Envelope::to_json() const {
  nlohmann::json j{{"topic", topic},
                   {"sender", sender},
                   {"kind", kind_name(kind)},
                   {"payload", base64_encode(payload)},
                   {"seq", seq}};
  if (slot.has_value()) {
    j["slot"] = *slot;
  } else {
    j["slot"] = nullptr;
  }
  return j;
}

Envelope Envelope::from_json(const nlohmann::json& j) {
  return decode_json("envelope", [&] {
    Envelope env;
    env.topic = j.at("topic").get<std::string>();
    env.sender = j.at("sender").get<std::string>();
    env.kind = kind_from_name(j.at("kind").get<std::string>());
    if (!j.at("slot").is_null()) env.slot = j.at("slot").get<uint32_t>();
    env.payload = base64_decode(j.at("payload").get<std::string>());
    env.seq = j.at("seq").get<uint64_t>();
    return env;
  });
}

struct Bus::Subscription::TopicState {
  mutable std::mutex mu;
  std::vector<Envelope> log;
  bool recording = true;
  std::map<std::string, uint64_t> last_seq;
};

Bus::Bus(bool record_by_default) : record_by_default_(record_by_default) {}

std::shared_ptr<Bus::TopicState> Bus::topic_state(const std::string& topic) {
  if (topic.empty() || topic.find_first_of(" \t\n") != std::string::npos) {
    fail(Errc::InvalidArgument, "topic name must be non-empty without whitespace");
  }
  std::lock_guard lock(mu_);
  auto& slot = topics_[topic];
  if (!slot) {
    slot = std::make_shared<TopicState>();
    slot->recording = record_by_default_;
  }
  return slot;
}

std::shared_ptr<const Bus::TopicState> Bus::find_topic(const std::string& topic) const {
  std::lock_guard lock(mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) fail(Errc::InvalidArgument, "no such topic '" + topic + "'");
  return it->second;
}

void Bus::publish(const std::string& topic, Envelope env) {
  if (env.topic != topic) {
    fail(Errc::TopicMismatch,
         "envelope addressed to '" + env.topic + "' published on '" + topic + "'");
  }
  if (env.sender.empty()) fail(Errc::InvalidArgument, "envelope without sender");
  auto state = topic_state(topic);
  std::lock_guard lock(state->mu);
  uint64_t& last = state->last_seq[env.sender];
  if (env.seq <= last) {
    fail(Errc::SeqRegression, "seq " + std::to_string(env.seq) + " from '" + env.sender +
                                  "' not above " + std::to_string(last));
  }
  last = env.seq;
  state->log.push_back(std::move(env));
}

Bus::Subscription Bus::subscribe(const std::string& topic) {
  auto state = topic_state(topic);
  std::lock_guard lock(state->mu);
  return Subscription(state, state->log.size());
}

std::optional<Envelope> Bus::Subscription::poll() {
  std::lock_guard lock(state_->mu);
  if (cursor_ >= state_->log.size()) return std::nullopt;
  return state_->log[cursor_++];
}

std::vector<Envelope> Bus::Subscription::drain() {
  std::lock_guard lock(state_->mu);
  std::vector<Envelope> out(state_->log.begin() + static_cast<ptrdiff_t>(cursor_),
                            state_->log.end());
  cursor_ = state_->log.size();
  return out;
}

std::vector<Envelope> Bus::transcript(const std::string& topic) const {
  auto state = find_topic(topic);
  std::lock_guard lock(state->mu);
  if (!state->recording) {
    fail(Errc::RecordingDisabled, "transcript recording is off for '" + topic + "'");
  }
  return state->log;
}

void Bus::set_recording(const std::string& topic, bool on) {
  auto state = topic_state(topic);
  std::lock_guard lock(state->mu);
  state->recording = on;
}

std::vector<std::string> Bus::topics() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> names;
  names.reserve(topics_.size());
  for (const auto& [name, _] : topics_) names.push_back(name);
  return names;
}

void Bus::Sender::publish(const std::string& topic, MsgKind kind,
                          std::optional<uint32_t> slot, Bytes payload) {
  Envelope env;
  env.topic = topic;
  env.sender = id_;
  env.kind = kind;
  env.slot = slot;
  env.payload = std::move(payload);
  env.seq = ++next_seq_[topic];
  bus_->publish(topic, std::move(env));
}

}  // namespace gridagg
