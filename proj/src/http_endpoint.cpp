#include "gauntlet/http_endpoint.hpp"

#include "gauntlet/error.hpp"

namespace gauntlet {

HttpEndpoint parse_http_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorKind::Config, "malformed URL (no scheme): " + std::string(url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::Config, "unsupported URL scheme: " + std::string(url));
  }
  const auto host_begin = scheme_end + 3;
  const auto slash = url.find('/', host_begin);
  const std::string_view host =
      url.substr(host_begin, slash == std::string_view::npos ? std::string_view::npos
                                                             : slash - host_begin);
  if (host.empty()) throw Error(ErrorKind::Config, "malformed URL (no host): " + std::string(url));
  HttpEndpoint ep;
  ep.origin = std::string(url.substr(0, host_begin + host.size()));
  ep.path = slash == std::string_view::npos ? "/" : std::string(url.substr(slash));
  return ep;
}

}  // namespace gauntlet
