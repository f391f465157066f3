#include "trapsight/warning_feed.hpp"

#include <fstream>

#include "trapsight/errors.hpp"
#include "trapsight/event_log.hpp"

namespace trapsight {

WarningFeed::WarningFeed(std::optional<std::filesystem::path> path) : path_(std::move(path)) {
  if (!path_ || !std::filesystem::exists(*path_)) return;
  std::ifstream in(*path_);
  std::string line;
  while (std::getline(in, line)) {
    Warning w;
    try {
      w = warning_from_json(nlohmann::json::parse(line));
    } catch (const std::exception&) {
      break;  // torn tail from an interrupted append
    }
    if (w.seq != log_.size() + 1) throw StoreError("warning feed out of sequence at " + std::to_string(w.seq));
    log_.push_back(std::move(w));
  }
}

Warning WarningFeed::publish(Warning warning) {
  std::lock_guard lock(write_mu_);
  warning.seq = log_.size() + 1;
  if (path_) {
    std::ofstream out(*path_, std::ios::app | std::ios::binary);
    out << to_json(warning).dump() << '\n';
    out.flush();
    if (!out) throw StoreError("cannot append to " + path_->string());
  }
  log_.push_back(warning);
  return warning;
}

WarningBatch WarningFeed::since(std::uint64_t cursor, std::size_t limit) const {
  WarningBatch batch;
  const std::size_t n = log_.size();
  std::size_t i = std::min<std::size_t>(cursor, n);
  for (; i < n && batch.warnings.size() < limit; ++i) batch.warnings.push_back(log_[i]);
  batch.cursor = std::max<std::uint64_t>(cursor, i);
  return batch;
}

}  // namespace trapsight
