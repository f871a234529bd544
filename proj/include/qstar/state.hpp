// Copyright 2026 The qstar Authors.
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

#ifndef QSTAR_STATE_HPP_
#define QSTAR_STATE_HPP_

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace qstar {

// Actions are 1-based indices into [k].
using Action = int;

// Canonical state value shared by all models in this library.
//
// A tree state is a duplicate-free action sequence; its level is the
// sequence length plus one, so the empty sequence is the root at level 1.
// A game-over state f_h sits at level h. Node states are plain (level, index)
// pairs used by generic tabular models that have no tree structure.
class StateId {
 public:
  enum class Kind : unsigned char { kTree, kGameOver, kNode };

  StateId() : StateId(Kind::kTree, 1, 0, {}) {}

  static StateId root() { return StateId(); }
  // Throws ParameterError if the sequence repeats an action or holds an
  // index below 1.
  static StateId tree(std::vector<Action> actions);
  static StateId game_over(int level);
  static StateId node(int level, int index);

  Kind kind() const { return kind_; }
  bool is_tree() const { return kind_ == Kind::kTree; }
  bool is_game_over() const { return kind_ == Kind::kGameOver; }
  bool is_node() const { return kind_ == Kind::kNode; }
  bool is_root() const { return is_tree() && actions_.empty(); }

  int level() const { return level_; }
  int index() const { return index_; }
  const std::vector<Action>& actions() const { return actions_; }

  // Membership of an action in the sequence; always false off the tree.
  bool contains(Action a) const;
  // The child sequence s·a. Requires a tree state and a not in s.
  StateId extended(Action a) const;

  // "root", "2.5.1", "f3" or "n2:0".
  std::string to_string() const;
  static StateId parse(const std::string& text);

  friend bool operator==(const StateId&, const StateId&) = default;
  friend std::strong_ordering operator<=>(const StateId&,
                                          const StateId&) = default;

 private:
  StateId(Kind kind, int level, int index, std::vector<Action> actions)
      : kind_(kind), level_(level), index_(index), actions_(std::move(actions)) {}

  Kind kind_;
  int level_;
  int index_;
  std::vector<Action> actions_;
};

struct StateIdHash {
  std::size_t operator()(const StateId& s) const noexcept;
};

}  // namespace qstar

#endif  // QSTAR_STATE_HPP_
