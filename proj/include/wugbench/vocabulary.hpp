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

#ifndef WUGBENCH_VOCABULARY_HPP_
#define WUGBENCH_VOCABULARY_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wugbench {

using TokenId = std::size_t;

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kStartToken = "[CLS]";
inline constexpr std::string_view kEndToken = "[SEP]";
inline constexpr std::string_view kUnknownToken = "[UNK]";

// Ordered word-level vocabulary with O(1) lookup in both directions.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  // Appends a token; throws InputError on duplicates.
  TokenId add(std::string token);

  std::optional<TokenId> find(std::string_view token) const;
  // Throws InputError naming the token when absent.
  TokenId id_of(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// True for the four reserved symbols above.
bool is_reserved_token(std::string_view token);

}  // namespace wugbench

#endif  // WUGBENCH_VOCABULARY_HPP_
