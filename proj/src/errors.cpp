#include "gridagg/errors.hpp"

namespace gridagg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Overflow: return "Overflow";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
    case Errc::MissingValue: return "MissingValue";
    case Errc::IncompleteRow: return "IncompleteRow";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::TopicMismatch: return "TopicMismatch";
    case Errc::RecordingDisabled: return "RecordingDisabled";
    case Errc::SeqRegression: return "SeqRegression";
    case Errc::BadSignature: return "BadSignature";
    case Errc::Revoked: return "Revoked";
    case Errc::WrongMeasurement: return "WrongMeasurement";
    case Errc::StaleChallenge: return "StaleChallenge";
    case Errc::DigestMismatch: return "DigestMismatch";
    case Errc::KeyConfirmationFailed: return "KeyConfirmationFailed";
    case Errc::OutOfOrderMessage: return "OutOfOrderMessage";
    case Errc::CounterExhausted: return "CounterExhausted";
    case Errc::TagMismatch: return "TagMismatch";
    case Errc::Replay: return "Replay";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::DuplicateSlot: return "DuplicateSlot";
    case Errc::WrongSlot: return "WrongSlot";
    case Errc::SlotAlreadyClosed: return "SlotAlreadyClosed";
    case Errc::PeriodIncomplete: return "PeriodIncomplete";
    case Errc::PrimalitySearchExhausted: return "PrimalitySearchExhausted";
    case Errc::NotInSubgroup: return "NotInSubgroup";
    case Errc::BadCredential: return "BadCredential";
    case Errc::RosterMismatch: return "RosterMismatch";
    case Errc::EmptyRound: return "EmptyRound";
    case Errc::MissingCiphertext: return "MissingCiphertext";
    case Errc::MissingPartial: return "MissingPartial";
    case Errc::MaskReuse: return "MaskReuse";
    case Errc::LogNotFound: return "LogNotFound";
  }
  return "UnknownError";
}

}  // namespace gridagg
