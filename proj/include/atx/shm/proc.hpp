#pragma once

// Resumable per-process operations. An algorithm written as a Proc
// suspends at `co_await step()` right before each shared-memory primitive
// access, so a scheduler can interleave processes one atomic step at a
// time. In free-running mode (real threads) the suspension points are
// no-ops and the operation runs straight through.

#include <coroutine>
#include <cstdint>
#include <exception>
#include <optional>
#include <utility>

namespace atx::shm {

struct Driver {
  std::coroutine_handle<> leaf;
  bool free_running = false;
  std::uint64_t steps = 0;
};

struct StepAwaiter {
  bool await_ready() const noexcept { return false; }

  template <class Promise>
  bool await_suspend(std::coroutine_handle<Promise> h) noexcept {
    Driver* d = h.promise().driver;
    ++d->steps;
    if (d->free_running) return false;
    d->leaf = h;
    return true;
  }

  void await_resume() const noexcept {}
};

// The code between one step() and the next must contain exactly one
// primitive operation.
inline StepAwaiter step() { return {}; }

template <class T>
class [[nodiscard]] Proc {
 public:
  struct promise_type {
    std::optional<T> value;
    std::exception_ptr error;
    std::coroutine_handle<> continuation;
    Driver* driver = nullptr;

    Proc get_return_object() {
      return Proc(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }

    struct FinalAwaiter {
      bool await_ready() noexcept { return false; }
      std::coroutine_handle<> await_suspend(
          std::coroutine_handle<promise_type> h) noexcept {
        auto next = h.promise().continuation;
        if (next) return next;
        return std::noop_coroutine();
      }
      void await_resume() noexcept {}
    };
    FinalAwaiter final_suspend() noexcept { return {}; }

    template <class U>
    void return_value(U&& v) {
      value.emplace(std::forward<U>(v));
    }
    void unhandled_exception() { error = std::current_exception(); }
  };

  using Handle = std::coroutine_handle<promise_type>;

  Proc() = default;
  explicit Proc(Handle h) : handle_(h) {}
  Proc(Proc&& other) noexcept : handle_(std::exchange(other.handle_, {})) {}
  Proc& operator=(Proc&& other) noexcept {
    if (this != &other) {
      reset();
      handle_ = std::exchange(other.handle_, {});
    }
    return *this;
  }
  Proc(const Proc&) = delete;
  Proc& operator=(const Proc&) = delete;
  ~Proc() { reset(); }

  // Awaiting a Proc from inside another Proc runs it as a sub-operation on
  // the same driver.
  bool await_ready() const noexcept { return false; }
  template <class Promise>
  std::coroutine_handle<> await_suspend(std::coroutine_handle<Promise> parent) {
    handle_.promise().continuation = parent;
    handle_.promise().driver = parent.promise().driver;
    return handle_;
  }
  T await_resume() { return take(); }

  // Top-level control.
  void start(Driver& d) {
    handle_.promise().driver = &d;
    d.leaf = handle_;
    d.leaf.resume();
  }
  bool valid() const { return static_cast<bool>(handle_); }
  bool done() const { return handle_ && handle_.done(); }
  T take() {
    auto& p = handle_.promise();
    if (p.error) std::rethrow_exception(p.error);
    return std::move(*p.value);
  }

 private:
  void reset() {
    if (handle_) handle_.destroy();
    handle_ = {};
  }

  Handle handle_;
};

// Advances a started top-level operation by one atomic step.
template <class T>
void advance(Proc<T>& op, Driver& d) {
  if (!op.done()) d.leaf.resume();
}

// Runs an operation without interleaving points (real-thread mode).
template <class T>
T run_free(Proc<T> op) {
  Driver d;
  d.free_running = true;
  op.start(d);
  return op.take();
}

}  // namespace atx::shm
