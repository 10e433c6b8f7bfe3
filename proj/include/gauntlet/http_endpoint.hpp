#pragma once

#include <string>
#include <string_view>

namespace gauntlet {

struct HttpEndpoint {
  std::string origin;  // scheme://host[:port], as cpp-httplib's Client wants it
  std::string path;    // always starts with '/'
};

// Splits an http(s) URL; ErrorKind::Config when malformed.
HttpEndpoint parse_http_url(std::string_view url);

}  // namespace gauntlet
