// Copyright 2026 The annolex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "annolex/http.hpp"

#include "annolex/error.hpp"
#include "httplib.h"

namespace annolex::http {

BaseUrl parse_base_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error("http", "BadUrl", "missing scheme in '" + std::string(url) + "'");
  }
  std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error("http", "BadUrl", "unsupported scheme in '" + std::string(url) + "'");
  }
  auto path_begin = url.find('/', scheme_end + 3);
  BaseUrl b;
  if (path_begin == std::string_view::npos) {
    b.origin = std::string(url);
  } else {
    b.origin = std::string(url.substr(0, path_begin));
    b.path = std::string(url.substr(path_begin));
    while (!b.path.empty() && b.path.back() == '/') b.path.pop_back();
  }
  if (b.origin.size() <= scheme_end + 3) {
    throw Error("http", "BadUrl", "missing host in '" + std::string(url) + "'");
  }
  return b;
}

Response post_json(const BaseUrl& base, std::string_view endpoint, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   int timeout_ms) {
  httplib::Client client(base.origin);
  const auto sec = timeout_ms / 1000;
  const auto usec = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  std::string path = base.path + std::string(endpoint);
  auto res = client.Post(path, h, body, "application/json");
  Response out;
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace annolex::http
