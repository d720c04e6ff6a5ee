#pragma once

#include <stdexcept>
#include <string>

namespace gridagg {

// Every failure the library reports deliberately.  Codes are stable API:
// tests and callers match on the code, the message is for humans.
enum class Errc {
  // generic
  InvalidArgument,
  Overflow,
  IoError,
  ParseError,
  // consumption data
  MissingValue,
  IncompleteRow,
  OutOfRange,
  // message bus
  TopicMismatch,
  RecordingDisabled,
  SeqRegression,
  // attestation
  BadSignature,
  Revoked,
  WrongMeasurement,
  StaleChallenge,
  DigestMismatch,
  KeyConfirmationFailed,
  OutOfOrderMessage,
  // secure channel
  CounterExhausted,
  TagMismatch,
  Replay,
  UnknownSession,
  // aggregation enclave
  DuplicateSlot,
  WrongSlot,
  SlotAlreadyClosed,
  PeriodIncomplete,
  // homomorphic backend
  PrimalitySearchExhausted,
  NotInSubgroup,
  BadCredential,
  RosterMismatch,
  EmptyRound,
  MissingCiphertext,
  MissingPartial,
  MaskReuse,
  LogNotFound,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gridagg
