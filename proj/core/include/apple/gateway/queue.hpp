#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

namespace apple::gateway {

/// Multi-producer queue that never blocks producers: beyond `capacity` the
/// oldest element is discarded.
template <class T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

    /// Returns false when an older element had to be dropped.
    bool push(T value) {
        bool kept_all = true;
        {
            std::lock_guard lock(mu_);
            if (items_.size() >= capacity_) {
                items_.pop_front();
                ++dropped_;
                kept_all = false;
            }
            items_.push_back(std::move(value));
        }
        cv_.notify_one();
        return kept_all;
    }

    [[nodiscard]] std::optional<T> try_pop() {
        std::lock_guard lock(mu_);
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        return v;
    }

    /// Waits up to `timeout`; empty result on timeout or when closed and drained.
    template <class Rep, class Period>
    [[nodiscard]] std::optional<T> pop_for(std::chrono::duration<Rep, Period> timeout) {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        return v;
    }

    void close() {
        {
            std::lock_guard lock(mu_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    [[nodiscard]] bool closed() const {
        std::lock_guard lock(mu_);
        return closed_;
    }
    [[nodiscard]] std::size_t size() const {
        std::lock_guard lock(mu_);
        return items_.size();
    }
    [[nodiscard]] std::size_t dropped() const {
        std::lock_guard lock(mu_);
        return dropped_;
    }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<T> items_;
    std::size_t capacity_;
    std::size_t dropped_ = 0;
    bool closed_ = false;
};

}  // namespace apple::gateway
