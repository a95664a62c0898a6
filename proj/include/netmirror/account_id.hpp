// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

namespace netmirror {

// Opaque account token. Never empty once validated by an ingestion path.
class AccountId {
 public:
  AccountId() = default;
  explicit AccountId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const AccountId&, const AccountId&) = default;
  friend bool operator==(const AccountId&, const AccountId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const AccountId& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

}  // namespace netmirror

template <>
struct std::hash<netmirror::AccountId> {
  std::size_t operator()(const netmirror::AccountId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
