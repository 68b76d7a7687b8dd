#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace streamad {

// Single-pass mean/variance accumulator (Welford). Population convention.
class StreamingStats {
 public:
  void add(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
    if (m2_ < 0.0) m2_ = 0.0;
  }

  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double m2() const noexcept { return m2_; }
  double variance() const noexcept { return count_ == 0 ? 0.0 : m2_ / static_cast<double>(count_); }
  double stddev() const noexcept { return std::sqrt(variance()); }

  bool operator==(const StreamingStats&) const = default;

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Fixed-capacity FIFO of the most recent values; the oldest is evicted on
// overflow.
template <typename T>
class SlidingWindow {
 public:
  explicit SlidingWindow(std::size_t capacity = 0) : capacity_(capacity) { items_.reserve(capacity); }

  void push(const T& value) {
    if (capacity_ == 0) return;
    if (items_.size() < capacity_) {
      items_.push_back(value);
    } else {
      items_[head_] = value;
      head_ = (head_ + 1) % capacity_;
    }
  }

  // Overwrites the most recently pushed value.
  void replace_last(const T& value) {
    if (items_.empty()) return;
    const std::size_t last = items_.size() < capacity_ ? items_.size() - 1 : (head_ + capacity_ - 1) % capacity_;
    items_[last] = value;
  }

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool full() const noexcept { return items_.size() == capacity_; }

  // Oldest first.
  std::vector<T> values() const {
    std::vector<T> out;
    out.reserve(items_.size());
    for (std::size_t k = 0; k < items_.size(); ++k) out.push_back(items_[(head_ + k) % items_.size()]);
    return out;
  }

  bool operator==(const SlidingWindow& other) const { return capacity_ == other.capacity_ && values() == other.values(); }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> items_;
};

}  // namespace streamad
