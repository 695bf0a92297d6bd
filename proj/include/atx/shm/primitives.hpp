#pragma once

// Linearizable shared-memory objects. Each operation takes an internal
// lock, so the objects can be shared by real threads; under the
// deterministic scheduler every operation is a single atomic step.

#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "atx/core.hpp"

namespace atx::shm {

// Single-writer multi-reader register, initially empty (the bottom value).
template <class T>
class Register {
 public:
  explicit Register(Pid writer) : writer_(writer) {}

  void write(Pid p, T v) {
    if (p != writer_)
      throw Error(ErrorCode::NotWriter,
                  "process " + std::to_string(to_int(p)) +
                      " is not the writer of this register");
    std::lock_guard lock(mu_);
    value_ = std::move(v);
  }

  std::optional<T> read() const {
    std::lock_guard lock(mu_);
    return value_;
  }

  Pid writer() const { return writer_; }

 private:
  Pid writer_;
  mutable std::mutex mu_;
  std::optional<T> value_;
};

// N cells, cell i written only by process i (1-based), snapshot returns the
// whole vector at a single instant.
template <class T>
class AtomicSnapshot {
 public:
  explicit AtomicSnapshot(int n) : cells_(static_cast<std::size_t>(n)) {}

  void update(Pid p, T v) {
    std::lock_guard lock(mu_);
    cells_.at(index(p)) = std::move(v);
  }

  std::vector<std::optional<T>> snapshot() const {
    std::lock_guard lock(mu_);
    return cells_;
  }

  int size() const { return static_cast<int>(cells_.size()); }

 private:
  std::size_t index(Pid p) const {
    int i = to_int(p);
    if (i < 1 || i > static_cast<int>(cells_.size()))
      throw Error(ErrorCode::InvalidArgument,
                  "snapshot cell out of range: " + std::to_string(i));
    return static_cast<std::size_t>(i - 1);
  }

  mutable std::mutex mu_;
  std::vector<std::optional<T>> cells_;
};

// The first k invocations of propose return the first proposed value; the
// rest return nothing. Misuse (over capacity, same process twice) is
// recorded rather than thrown so callers' discipline can be asserted.
template <class T>
class KConsensus {
 public:
  explicit KConsensus(std::size_t k) : k_(k) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  }

  std::optional<T> propose(Pid p, T v) {
    std::lock_guard lock(mu_);
    ++invocations_;
    if (!proposers_.insert(p).second) ++repeat_proposals_;
    if (!decided_) decided_ = std::move(v);
    if (invocations_ > k_) {
      ++over_capacity_;
      return std::nullopt;
    }
    return decided_;
  }

  std::size_t capacity() const { return k_; }
  std::size_t invocations() const {
    std::lock_guard lock(mu_);
    return invocations_;
  }
  std::size_t over_capacity() const {
    std::lock_guard lock(mu_);
    return over_capacity_;
  }
  std::size_t repeat_proposals() const {
    std::lock_guard lock(mu_);
    return repeat_proposals_;
  }
  std::optional<T> decided() const {
    std::lock_guard lock(mu_);
    return decided_;
  }

 private:
  std::size_t k_;
  mutable std::mutex mu_;
  std::optional<T> decided_;
  std::size_t invocations_ = 0;
  std::size_t over_capacity_ = 0;
  std::size_t repeat_proposals_ = 0;
  std::set<Pid> proposers_;
};

// Unbounded list kC[0], kC[1], ... of k-consensus objects, created lazily.
template <class T>
class KConsensusList {
 public:
  explicit KConsensusList(std::size_t k) : k_(k) {}

  KConsensus<T>& at(std::size_t i) {
    std::lock_guard lock(mu_);
    while (objects_.size() <= i)
      objects_.push_back(std::make_unique<KConsensus<T>>(k_));
    return *objects_[i];
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return objects_.size();
  }

  std::vector<std::size_t> invocation_counts() const {
    std::lock_guard lock(mu_);
    std::vector<std::size_t> out;
    for (const auto& o : objects_) out.push_back(o->invocations());
    return out;
  }

 private:
  std::size_t k_;
  mutable std::mutex mu_;
  std::deque<std::unique_ptr<KConsensus<T>>> objects_;
};

}  // namespace atx::shm
