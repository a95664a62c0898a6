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

#include <optional>
#include <string>
#include <string_view>

#include "netmirror/account_id.hpp"

namespace netmirror {

// The login boundary. The study build trusts the submitted account id; an
// OAuth client would implement the same interface and resolve the id from a
// provider callback instead.
class LoginProvider {
 public:
  virtual ~LoginProvider() = default;
  // Returns the authenticated account, or nullopt to reject the login.
  virtual std::optional<AccountId> authenticate(std::string_view credential) = 0;
};

class IdLoginProvider final : public LoginProvider {
 public:
  std::optional<AccountId> authenticate(std::string_view credential) override;
};

// Session bearer tokens: "<session_id>.<hex MAC>", keyed by a server secret.
class TokenSigner {
 public:
  // An empty secret draws a random key; tokens then die with the process.
  explicit TokenSigner(std::string_view secret);

  std::string issue(std::string_view session_id) const;
  // The session id the token was issued for, or nullopt if it does not verify.
  std::optional<std::string> verify(std::string_view token) const;

 private:
  std::string key_;
};

}  // namespace netmirror
