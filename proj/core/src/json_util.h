//
// Copyright 2026 The dptab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPTAB_SRC_JSON_UTIL_H_
#define DPTAB_SRC_JSON_UTIL_H_

#include <initializer_list>
#include <string>
#include <string_view>

#include "dptab/error.h"
#include "json.hpp"

namespace dptab::internal {

using Json = nlohmann::json;

inline Json ParseJson(std::string_view text, ErrorCode code,
                      const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    Fail(code, what + ": " + e.what());
  }
}

// Rejects keys outside `allowed`; typos in privacy parameters must not be
// silently ignored.
inline void CheckKeys(const Json& obj, std::initializer_list<std::string_view> allowed,
                      const std::string& context, ErrorCode code) {
  if (!obj.is_object()) Fail(code, context + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (std::string_view a : allowed) ok = ok || item.key() == a;
    if (!ok) Fail(code, context + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T Get(const Json& obj, const char* key, const std::string& context,
      ErrorCode code) {
  if (!obj.contains(key)) {
    Fail(code, context + ": missing key '" + std::string(key) + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    Fail(code, context + ": bad value for '" + std::string(key) +
                   "': " + e.what());
  }
}

template <typename T>
T GetOr(const Json& obj, const char* key, T fallback,
        const std::string& context, ErrorCode code) {
  if (!obj.contains(key)) return fallback;
  return Get<T>(obj, key, context, code);
}

}  // namespace dptab::internal

#endif  // DPTAB_SRC_JSON_UTIL_H_
