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
#include "netmirror/auth.hpp"

#include <sodium.h>

#include <stdexcept>

namespace netmirror {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialisation failed");
}

std::string hex(const unsigned char* data, std::size_t n) {
  std::string out(2 * n + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data, n);
  out.pop_back();
  return out;
}

}  // namespace

std::optional<AccountId> IdLoginProvider::authenticate(std::string_view credential) {
  if (credential.empty()) return std::nullopt;
  return AccountId(std::string(credential));
}

TokenSigner::TokenSigner(std::string_view secret) {
  ensure_sodium();
  key_.resize(crypto_auth_KEYBYTES);
  auto* key = reinterpret_cast<unsigned char*>(key_.data());
  if (secret.empty()) {
    randombytes_buf(key, key_.size());
  } else {
    crypto_generichash(key, key_.size(), reinterpret_cast<const unsigned char*>(secret.data()),
                       secret.size(), nullptr, 0);
  }
}

std::string TokenSigner::issue(std::string_view session_id) const {
  unsigned char mac[crypto_auth_BYTES];
  crypto_auth(mac, reinterpret_cast<const unsigned char*>(session_id.data()), session_id.size(),
              reinterpret_cast<const unsigned char*>(key_.data()));
  return std::string(session_id) + "." + hex(mac, sizeof mac);
}

std::optional<std::string> TokenSigner::verify(std::string_view token) const {
  const auto dot = token.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return std::nullopt;
  const std::string_view id = token.substr(0, dot);
  const std::string_view mac_hex = token.substr(dot + 1);
  if (mac_hex.size() != 2 * crypto_auth_BYTES) return std::nullopt;
  unsigned char mac[crypto_auth_BYTES];
  std::size_t len = 0;
  if (sodium_hex2bin(mac, sizeof mac, mac_hex.data(), mac_hex.size(), nullptr, &len, nullptr) != 0 ||
      len != sizeof mac) {
    return std::nullopt;
  }
  if (crypto_auth_verify(mac, reinterpret_cast<const unsigned char*>(id.data()), id.size(),
                         reinterpret_cast<const unsigned char*>(key_.data())) != 0) {
    return std::nullopt;
  }
  return std::string(id);
}

}  // namespace netmirror
