#pragma once

#include <stdexcept>
#include <string>

namespace epkn {

// Error taxonomy shared by the whole library.  `usage` and `config` map to
// CLI exit code 2, everything else to a failed-run exit.
enum class errc {
  usage,                 // bad flag / argument combination
  config,                // unreadable or inconsistent config file
  domain,                // parameter outside the mathematical domain
  capacity,              // request exceeds a hard size guard
  index,                 // lookup outside a built table
  precision,             // estimated numerical error above the contract
  truncation_overflow,   // stick-breaking needs more sticks than allowed
  coherence_violation,   // closed-form identities disagree beyond tolerance
  empty_input,
  insufficient_points,
  io,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what_arg)
      : std::runtime_error(what_arg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) {
  throw error(code, msg);
}

}  // namespace epkn
