#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <vector>

#include "trapsight/append_log.hpp"
#include "trapsight/detector.hpp"

namespace trapsight {

struct WarningBatch {
  std::vector<Warning> warnings;
  std::uint64_t cursor = 0;  // pass back to receive only later warnings
};

// Ordered warning feed. Each published warning gets the next sequence
// number; a client that always passes back the returned cursor sees every
// warning exactly once.
class WarningFeed {
 public:
  // With a path the feed is persisted as JSON Lines and reloaded on start.
  explicit WarningFeed(std::optional<std::filesystem::path> path = std::nullopt);

  Warning publish(Warning warning);
  WarningBatch since(std::uint64_t cursor, std::size_t limit = 1000) const;
  std::uint64_t head() const noexcept { return log_.size(); }

 private:
  std::optional<std::filesystem::path> path_;
  std::mutex write_mu_;
  AppendLog<Warning> log_;
};

}  // namespace trapsight
