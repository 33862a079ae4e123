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

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace annolex::http {

/// "https://host:port/v1" -> origin "https://host:port", path "/v1".
struct BaseUrl {
  std::string origin;
  std::string path;
};

/// Throws Error("http", "BadUrl") unless the scheme is http or https.
BaseUrl parse_base_url(std::string_view url);

struct Response {
  int status = 0;            // 0 when the request never produced a response
  std::string body;
  std::string transport_error;  // set iff status == 0
};

/// POSTs a JSON body to origin + path + endpoint. Never throws for network
/// failures; those come back as status 0 with transport_error set.
Response post_json(const BaseUrl& base, std::string_view endpoint, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers,
                   int timeout_ms);

/// 408, 425, 429 and 5xx, plus transport failures.
inline bool is_transient(const Response& r) {
  return r.status == 0 || r.status == 408 || r.status == 425 || r.status == 429 ||
         r.status >= 500;
}

}  // namespace annolex::http
