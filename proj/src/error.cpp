#include "gauntlet/error.hpp"

namespace gauntlet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Config: return "config";
    case ErrorKind::Encoding: return "encoding";
    case ErrorKind::Format: return "format";
    case ErrorKind::Version: return "version";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::Calibration: return "calibration";
    case ErrorKind::Training: return "training";
    case ErrorKind::Metric: return "metric";
    case ErrorKind::Io: return "io";
    case ErrorKind::Data: return "data";
    case ErrorKind::Remote: return "remote";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Auth: return "auth";
    case ErrorKind::CacheMiss: return "cache-miss";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Config:
      return 1;
    case ErrorKind::Encoding:
    case ErrorKind::Format:
    case ErrorKind::Version:
    case ErrorKind::DegenerateInput:
    case ErrorKind::Calibration:
    case ErrorKind::Training:
    case ErrorKind::Metric:
    case ErrorKind::Io:
    case ErrorKind::Data:
      return 2;
    case ErrorKind::Remote:
    case ErrorKind::Timeout:
    case ErrorKind::Auth:
    case ErrorKind::CacheMiss:
      return 3;
    case ErrorKind::Internal:
      return 4;
  }
  return 4;
}

std::string excerpt(std::string_view body, std::size_t n) {
  if (body.size() <= n) return std::string(body);
  std::size_t cut = n;
  // back off continuation bytes so the excerpt stays valid UTF-8
  while (cut > 0 && (static_cast<unsigned char>(body[cut]) & 0xC0) == 0x80) --cut;
  return std::string(body.substr(0, cut)) + "...";
}

}  // namespace gauntlet
