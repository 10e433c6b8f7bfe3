#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gauntlet {

enum class ErrorKind {
  Usage,
  Config,
  Encoding,
  Format,
  Version,
  DegenerateInput,
  Calibration,
  Training,
  Metric,
  Io,
  Data,
  Remote,
  Timeout,
  Auth,
  CacheMiss,
  Internal,
};

std::string_view to_string(ErrorKind kind);

// Process exit status for a failure of the given kind:
// 1 usage/config, 2 data/format, 3 network/remote, 4 internal.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Failure talking to a remote service. status is 0 when no HTTP response
// was received (connection failure, timeout).
class RemoteError : public Error {
 public:
  RemoteError(ErrorKind kind, const std::string& message, int status,
              std::string body_excerpt)
      : Error(kind, message), status_(status),
        body_excerpt_(std::move(body_excerpt)) {}

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

// First n bytes of a response body, cut on a UTF-8 boundary.
std::string excerpt(std::string_view body, std::size_t n = 200);

}  // namespace gauntlet
