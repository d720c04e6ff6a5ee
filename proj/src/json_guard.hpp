#pragma once

#include <string>
#include <utility>

#include "gridagg/errors.hpp"

#include "json.hpp"

namespace gridagg {

// Runs a JSON decode body, converting nlohmann's exceptions (missing
// field, wrong type, bad value) into the library's ParseError so that
// every malformed payload surfaces through one error type.  Library
// errors thrown inside pass through untouched.
template <typename Fn>
auto decode_json(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return std::forward<Fn>(fn)();
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace gridagg
