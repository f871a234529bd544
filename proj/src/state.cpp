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

#include "qstar/state.hpp"

#include <algorithm>
#include <sstream>

#include "qstar/errors.hpp"

namespace qstar {

StateId StateId::tree(std::vector<Action> actions) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 1) {
      throw ParameterError("tree state action index must be >= 1");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (actions[i] == actions[j]) {
        throw ParameterError("tree state repeats action " +
                             std::to_string(actions[i]));
      }
    }
  }
  const int level = static_cast<int>(actions.size()) + 1;
  return StateId(Kind::kTree, level, 0, std::move(actions));
}

StateId StateId::game_over(int level) {
  if (level < 2) throw ParameterError("game-over level must be >= 2");
  return StateId(Kind::kGameOver, level, 0, {});
}

StateId StateId::node(int level, int index) {
  if (level < 1 || index < 0) {
    throw ParameterError("node state needs level >= 1 and index >= 0");
  }
  return StateId(Kind::kNode, level, index, {});
}

bool StateId::contains(Action a) const {
  return is_tree() &&
         std::find(actions_.begin(), actions_.end(), a) != actions_.end();
}

StateId StateId::extended(Action a) const {
  if (!is_tree()) throw ParameterError("only tree states can be extended");
  std::vector<Action> next = actions_;
  next.push_back(a);
  return tree(std::move(next));
}

std::string StateId::to_string() const {
  switch (kind_) {
    case Kind::kGameOver:
      return "f" + std::to_string(level_);
    case Kind::kNode:
      return "n" + std::to_string(level_) + ":" + std::to_string(index_);
    case Kind::kTree:
      break;
  }
  if (actions_.empty()) return "root";
  std::string out;
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(actions_[i]);
  }
  return out;
}

StateId StateId::parse(const std::string& text) {
  try {
    if (text == "root") return root();
    if (!text.empty() && text[0] == 'f') return game_over(std::stoi(text.substr(1)));
    if (!text.empty() && text[0] == 'n') {
      const auto colon = text.find(':');
      if (colon == std::string::npos) throw ParameterError("bad node state");
      return node(std::stoi(text.substr(1, colon - 1)),
                  std::stoi(text.substr(colon + 1)));
    }
    std::vector<Action> actions;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, '.')) actions.push_back(std::stoi(item));
    return tree(std::move(actions));
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse state '" + text + "'");
  }
}

std::size_t StateIdHash::operator()(const StateId& s) const noexcept {
  std::size_t h = static_cast<std::size_t>(s.kind()) * 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(static_cast<std::size_t>(s.level()));
  mix(static_cast<std::size_t>(s.index()));
  for (Action a : s.actions()) mix(static_cast<std::size_t>(a));
  return h;
}

}  // namespace qstar
