#pragma once

// Persistence split in two: a blob store for frames and an append-only
// table of detection events.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trapsight/append_log.hpp"
#include "trapsight/event_log.hpp"
#include "trapsight/image_io.hpp"
#include "trapsight/time.hpp"

namespace trapsight {

struct ImageBlobRef {
  std::string id;    // derived from the content hash
  std::string path;  // relative to the store root
  Instant captured_at{};
  std::uint64_t bytes = 0;
  ImageFormat format = ImageFormat::pgm;

  friend bool operator==(const ImageBlobRef&, const ImageBlobRef&) = default;
};

// Day of month -> summed weevil count. Days without events are absent.
using CalendarCounts = std::map<unsigned, std::int64_t>;

class Store {
 public:
  virtual ~Store() = default;

  // Idempotent for identical bytes. Throws DecodeError for bytes that are
  // not a supported image and StoreError on I/O failure.
  virtual ImageBlobRef put_image(std::span<const std::uint8_t> bytes, Instant captured_at) = 0;
  virtual std::optional<ImageBlobRef> find_image(const std::string& id) const = 0;
  // Throws NotFoundError.
  virtual Bytes get_image(const std::string& id) const = 0;

  // Throws StoreError if the event's image_ref does not resolve.
  virtual EventRecord append_event(const DetectionEvent& event) = 0;
  // Records with from <= ts < to in storage order. Throws RangeError if
  // from > to.
  virtual std::vector<EventRecord> query_events(Instant from, Instant to) const = 0;
  virtual std::vector<EventRecord> all_events() const = 0;
  virtual std::size_t event_count() const = 0;
  virtual CalendarCounts calendar_counts(YearMonth month) const = 0;
};

struct FileStoreOptions {
  // Offset of the reporting timezone used for calendar buckets.
  std::chrono::minutes report_utc_offset{0};
};

struct RecoveryReport {
  std::size_t records_loaded = 0;
  std::vector<std::filesystem::path> quarantined;  // files holding torn lines
};

// Layout under root:
//   blobs/<first two id chars>/<id>.<ext>
//   blobs/index.jsonl
//   events/YYYY-MM-DD.jsonl
//   quarantine/
// One writer, many readers: queries never take the writer's lock.
class FileStore final : public Store {
 public:
  explicit FileStore(std::filesystem::path root, FileStoreOptions options = {});

  ImageBlobRef put_image(std::span<const std::uint8_t> bytes, Instant captured_at) override;
  std::optional<ImageBlobRef> find_image(const std::string& id) const override;
  Bytes get_image(const std::string& id) const override;

  EventRecord append_event(const DetectionEvent& event) override;
  std::vector<EventRecord> query_events(Instant from, Instant to) const override;
  std::vector<EventRecord> all_events() const override;
  std::size_t event_count() const override { return events_.size(); }
  CalendarCounts calendar_counts(YearMonth month) const override;

  const std::filesystem::path& root() const noexcept { return root_; }
  const RecoveryReport& recovery() const noexcept { return recovery_; }

 private:
  void load_blob_index();
  void load_events();

  std::filesystem::path root_;
  FileStoreOptions options_;
  RecoveryReport recovery_;

  std::mutex write_mu_;
  mutable std::shared_mutex blob_mu_;
  std::unordered_map<std::string, ImageBlobRef> blobs_;
  AppendLog<EventRecord> events_;
  std::uint64_t next_seq_ = 1;
};

// Lowercase hex SHA-256 of the bytes, truncated to 32 characters.
std::string content_id(std::span<const std::uint8_t> bytes);

// Frame sink that stores the preprocessed frame as PGM.
FrameSink store_sink(Store& store);

}  // namespace trapsight
