// Copyright 2026 The wugbench Authors.
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

#include "wugbench/vocabulary.hpp"

#include <utility>

#include "wugbench/error.hpp"

namespace wugbench {

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens_.reserve(tokens.size());
  for (auto& t : tokens) add(std::move(t));
}

TokenId Vocabulary::add(std::string token) {
  if (token.empty()) throw InputError("vocabulary: empty token");
  if (index_.contains(token)) {
    throw InputError("vocabulary: duplicate token '" + token + "'");
  }
  const TokenId id = tokens_.size();
  index_.emplace(token, id);
  tokens_.push_back(std::move(token));
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id_of(std::string_view token) const {
  if (auto id = find(token)) return *id;
  throw InputError("unknown token '" + std::string(token) + "'");
}

bool is_reserved_token(std::string_view token) {
  return token == kMaskToken || token == kStartToken || token == kEndToken ||
         token == kUnknownToken;
}

}  // namespace wugbench
