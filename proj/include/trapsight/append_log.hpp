#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <stdexcept>

namespace trapsight {

// Append-only sequence with one writer and any number of readers. Readers
// take a size snapshot and may then read that prefix without locking; the
// writer never moves an element once published.
template <typename T>
class AppendLog {
 public:
  static constexpr std::size_t kChunkSize = 4096;
  static constexpr std::size_t kMaxChunks = 1 << 16;

  AppendLog() : chunks_(std::make_unique<std::atomic<T*>[]>(kMaxChunks)) {}
  ~AppendLog() {
    for (std::size_t c = 0; c < kMaxChunks; ++c) delete[] chunks_[c].load(std::memory_order_relaxed);
  }
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  // Writer only. Callers serialize concurrent writers themselves.
  void push_back(T value) {
    const std::size_t i = size_.load(std::memory_order_relaxed);
    const std::size_t c = i / kChunkSize;
    if (c >= kMaxChunks) throw std::length_error("AppendLog capacity exhausted");
    T* chunk = chunks_[c].load(std::memory_order_relaxed);
    if (chunk == nullptr) {
      chunk = new T[kChunkSize];
      chunks_[c].store(chunk, std::memory_order_release);
    }
    chunk[i % kChunkSize] = std::move(value);
    size_.store(i + 1, std::memory_order_release);
  }

  std::size_t size() const noexcept { return size_.load(std::memory_order_acquire); }

  // Valid for i < a previously observed size().
  const T& operator[](std::size_t i) const {
    return chunks_[i / kChunkSize].load(std::memory_order_acquire)[i % kChunkSize];
  }

 private:
  std::unique_ptr<std::atomic<T*>[]> chunks_;
  std::atomic<std::size_t> size_{0};
};

}  // namespace trapsight
