#pragma once

// Search for a legal total order of operations that extends a given
// precedence relation. This is the engine behind both the linearizability
// check (precedence = real-time order) and the per-process sequential
// consistency check (precedence = dependency order plus program order).
//
// A Model provides:
//   using State;                        // hashable, equality-comparable
//   bool apply(State&, std::size_t i);  // legal? (mutates State on success)
//   bool mutates(std::size_t i);        // false => apply never changes State
//   std::size_t hash(const State&);
//
// Non-mutating operations are placed greedily as soon as they are both
// enabled and legal: moving such an operation earlier never invalidates an
// order, so this prunes without losing completeness.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "atx/core.hpp"

namespace atx::checker {

class OpSet {
 public:
  static constexpr std::size_t kMax = 256;

  void set(std::size_t i) { w_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
  bool test(std::size_t i) const {
    return (w_[i / 64] >> (i % 64)) & 1u;
  }
  bool covers(const OpSet& o) const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if ((o.w_[k] & ~w_[k]) != 0) return false;
    return true;
  }
  std::size_t hash() const {
    std::size_t h = 14695981039346656037ull;
    for (auto x : w_) h = (h ^ x) * 1099511628211ull;
    return h;
  }
  bool operator==(const OpSet&) const = default;

 private:
  std::array<std::uint64_t, kMax / 64> w_{};
};

struct SearchLimits {
  std::size_t max_ops = 64;
  std::size_t max_nodes = 4'000'000;
};

struct SearchStats {
  std::size_t nodes = 0;
};

template <class Model>
class OrderSearch {
 public:
  using State = typename Model::State;

  // preds[i] = operations that must be ordered before i.
  OrderSearch(Model& model, std::vector<OpSet> preds, SearchLimits limits)
      : model_(model), preds_(std::move(preds)), limits_(limits) {
    if (preds_.size() > OpSet::kMax || preds_.size() > limits_.max_ops)
      throw Error(ErrorCode::SearchBoundExceeded,
                  "history has " + std::to_string(preds_.size()) +
                      " operations; search bound is " +
                      std::to_string(limits_.max_ops));
  }

  // Returns an order of all operations, or nullopt if none is legal.
  std::optional<std::vector<std::size_t>> run(const State& initial) {
    order_.clear();
    failed_.clear();
    stats_ = {};
    State s = initial;
    OpSet placed;
    if (dfs(s, placed, 0)) return order_;
    return std::nullopt;
  }

  const SearchStats& stats() const { return stats_; }

 private:
  struct Key {
    OpSet placed;
    State state;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    const Model* model;
    std::size_t operator()(const Key& k) const {
      return k.placed.hash() * 31u + model->hash(k.state);
    }
  };

  bool enabled(const OpSet& placed, std::size_t i) const {
    return !placed.test(i) && placed.covers(preds_[i]);
  }

  bool dfs(State& state, OpSet& placed, std::size_t count) {
    if (++stats_.nodes > limits_.max_nodes)
      throw Error(ErrorCode::SearchBoundExceeded,
                  "order search exceeded node budget");
    const std::size_t n = preds_.size();
    const std::size_t order_mark = order_.size();
    const OpSet placed_mark = placed;

    for (bool progress = true; progress;) {
      progress = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (model_.mutates(i) || !enabled(placed, i)) continue;
        if (model_.apply(state, i)) {
          placed.set(i);
          order_.push_back(i);
          ++count;
          progress = true;
        }
      }
    }
    auto undo = [&] {
      order_.resize(order_mark);
      placed = placed_mark;
    };
    if (count == n) return true;

    Key key{placed, state};
    if (failed_.count(key)) {
      undo();
      return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!model_.mutates(i) || !enabled(placed, i)) continue;
      State next = state;
      if (!model_.apply(next, i)) continue;
      placed.set(i);
      order_.push_back(i);
      if (dfs(next, placed, count + 1)) return true;
      order_.pop_back();
      placed = key.placed;
    }
    failed_.insert(std::move(key));
    undo();
    return false;
  }

  Model& model_;
  std::vector<OpSet> preds_;
  SearchLimits limits_;
  std::vector<std::size_t> order_;
  std::unordered_set<Key, KeyHash> failed_{16, KeyHash{&model_}};
  SearchStats stats_;
};

}  // namespace atx::checker
