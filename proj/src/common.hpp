#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace seqmag {

using cd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
  invalid_argument = 1,  // bad parameter / config key; CLI exit 1
  runtime = 2,           // underflow, I/O, numerical failure; CLI exit 2
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, const std::string& msg,
                    ErrorCode code = ErrorCode::invalid_argument) {
  if (!cond) throw Error(code, msg);
}

}  // namespace seqmag
