#include "trapsight/store.hpp"

#include <openssl/evp.h>

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "trapsight/errors.hpp"

namespace trapsight {
namespace fs = std::filesystem;

namespace {

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw StoreError("cannot open " + path.string() + " for append");
  // Line and terminator go out in one write so a crash leaves at most one
  // torn line at the tail.
  const std::string buf = line + '\n';
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw StoreError("append failed: " + path.string());
}

struct Line {
  std::string text;
  std::uint64_t offset = 0;
  bool terminated = false;
};

std::vector<Line> read_lines(const fs::path& path) {
  const Bytes raw = read_file(path);
  std::vector<Line> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= raw.size(); ++i) {
    if (i == raw.size() || raw[i] == '\n') {
      if (i > start || i < raw.size()) {
        lines.push_back({std::string(raw.begin() + static_cast<std::ptrdiff_t>(start),
                                     raw.begin() + static_cast<std::ptrdiff_t>(i)),
                         start, i < raw.size()});
      }
      start = i + 1;
    }
  }
  return lines;
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> files;
  if (!fs::exists(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Moves the tail starting at `offset` into quarantine and truncates the file.
fs::path quarantine_tail(const fs::path& root, const fs::path& file, std::uint64_t offset) {
  const Bytes raw = read_file(file);
  fs::create_directories(root / "quarantine");
  fs::path dest;
  for (int n = 0;; ++n) {
    dest = root / "quarantine" / fmt::format("{}.{}.torn", file.filename().string(), n);
    if (!fs::exists(dest)) break;
  }
  write_file_atomic(dest, std::span<const std::uint8_t>(raw).subspan(offset));
  fs::resize_file(file, offset);
  return dest;
}

nlohmann::ordered_json blob_json(const ImageBlobRef& ref) {
  nlohmann::ordered_json j;
  j["id"] = ref.id;
  j["path"] = ref.path;
  j["captured_at"] = format_instant(ref.captured_at);
  j["bytes"] = ref.bytes;
  j["format"] = std::string(file_extension(ref.format));
  return j;
}

}  // namespace

std::string content_id(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw StoreError("sha256 failed");
  }
  std::string hex;
  hex.reserve(32);
  for (unsigned i = 0; i < 16; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

FileStore::FileStore(fs::path root, FileStoreOptions options) : root_(std::move(root)), options_(options) {
  std::error_code ec;
  fs::create_directories(root_ / "blobs", ec);
  if (!ec) fs::create_directories(root_ / "events", ec);
  if (ec) throw StoreError("cannot create store at " + root_.string() + ": " + ec.message());
  load_blob_index();
  load_events();
}

void FileStore::load_blob_index() {
  const auto index = root_ / "blobs" / "index.jsonl";
  if (!fs::exists(index)) return;
  const auto lines = read_lines(index);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ImageBlobRef ref;
    try {
      const auto j = nlohmann::json::parse(lines[i].text);
      ref.id = j.at("id").get<std::string>();
      ref.path = j.at("path").get<std::string>();
      const auto ts = parse_instant(j.at("captured_at").get<std::string>());
      if (!ts) throw StoreError("bad captured_at");
      ref.captured_at = *ts;
      ref.bytes = j.at("bytes").get<std::uint64_t>();
      const auto ext = j.at("format").get<std::string>();
      ref.format = ext == "png" ? ImageFormat::png : ext == "ppm" ? ImageFormat::ppm : ImageFormat::pgm;
    } catch (const std::exception& ex) {
      if (i + 1 == lines.size()) {
        recovery_.quarantined.push_back(quarantine_tail(root_, index, lines[i].offset));
        break;
      }
      throw StoreError(fmt::format("corrupt blob index line {}: {}", i + 1, ex.what()));
    }
    // Index lines are written after the blob itself, so a listed blob exists.
    blobs_.emplace(ref.id, ref);
  }
}

void FileStore::load_events() {
  std::vector<EventRecord> loaded;
  for (const auto& file : sorted_files(root_ / "events", ".jsonl")) {
    const auto lines = read_lines(file);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const bool last = i + 1 == lines.size();
      try {
        if (!lines[i].terminated) throw StoreError("unterminated line");
        loaded.push_back(record_from_json(nlohmann::json::parse(lines[i].text)));
      } catch (const std::exception& ex) {
        if (last) {
          recovery_.quarantined.push_back(quarantine_tail(root_, file, lines[i].offset));
          break;
        }
        throw StoreError(fmt::format("{}: corrupt record on line {}: {}", file.string(), i + 1, ex.what()));
      }
    }
  }
  std::sort(loaded.begin(), loaded.end(),
            [](const EventRecord& a, const EventRecord& b) { return a.storage_seq < b.storage_seq; });
  for (std::size_t i = 1; i < loaded.size(); ++i) {
    if (loaded[i].storage_seq == loaded[i - 1].storage_seq) {
      throw StoreError(fmt::format("duplicate storage_seq {}", loaded[i].storage_seq));
    }
  }
  for (auto& r : loaded) {
    next_seq_ = r.storage_seq + 1;
    events_.push_back(std::move(r));
  }
  recovery_.records_loaded = events_.size();
}

ImageBlobRef FileStore::put_image(std::span<const std::uint8_t> bytes, Instant captured_at) {
  const ImageFormat format = detect_format(bytes);
  (void)decode_gray(bytes);  // rejects truncated or malformed payloads
  const std::string id = content_id(bytes);

  std::lock_guard write(write_mu_);
  if (auto existing = find_image(id)) return *existing;

  ImageBlobRef ref;
  ref.id = id;
  ref.path = fmt::format("blobs/{}/{}.{}", id.substr(0, 2), id, file_extension(format));
  ref.captured_at = captured_at;
  ref.bytes = bytes.size();
  ref.format = format;

  std::error_code ec;
  fs::create_directories(root_ / "blobs" / id.substr(0, 2), ec);
  if (ec) throw StoreError("cannot create blob directory: " + ec.message());
  write_file_atomic(root_ / ref.path, bytes);
  append_line(root_ / "blobs" / "index.jsonl", blob_json(ref).dump());
  {
    std::unique_lock lock(blob_mu_);
    blobs_.emplace(id, ref);
  }
  return ref;
}

std::optional<ImageBlobRef> FileStore::find_image(const std::string& id) const {
  std::shared_lock lock(blob_mu_);
  const auto it = blobs_.find(id);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

Bytes FileStore::get_image(const std::string& id) const {
  const auto ref = find_image(id);
  if (!ref) throw NotFoundError("unknown image id " + id);
  return read_file(root_ / ref->path);
}

EventRecord FileStore::append_event(const DetectionEvent& event) {
  if (event.image_ref.empty() || !find_image(event.image_ref)) {
    throw StoreError("event " + std::to_string(event.seq) + " references unknown image '" + event.image_ref + "'");
  }
  std::lock_guard write(write_mu_);
  EventRecord record{event, next_seq_};
  append_line(root_ / "events" / (utc_date(event.timestamp) + ".jsonl"), record_line(record));
  ++next_seq_;
  events_.push_back(record);
  return record;
}

std::vector<EventRecord> FileStore::query_events(Instant from, Instant to) const {
  if (from > to) throw RangeError("query range: from is after to");
  std::vector<EventRecord> out;
  const std::size_t n = events_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = events_[i];
    if (from <= r.event.timestamp && r.event.timestamp < to) out.push_back(r);
  }
  return out;
}

std::vector<EventRecord> FileStore::all_events() const {
  const std::size_t n = events_.size();
  std::vector<EventRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(events_[i]);
  return out;
}

CalendarCounts FileStore::calendar_counts(YearMonth month) const {
  using namespace std::chrono;
  CalendarCounts counts;
  const std::size_t n = events_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = events_[i].event;
    const year_month_day ymd{floor<days>(e.timestamp + options_.report_utc_offset)};
    if (static_cast<int>(ymd.year()) == month.year && static_cast<unsigned>(ymd.month()) == month.month) {
      counts[static_cast<unsigned>(ymd.day())] += e.count;
    }
  }
  return counts;
}

FrameSink store_sink(Store& store) {
  return [&store](const GrayImage& gray, Instant captured_at) {
    return store.put_image(encode_pgm(gray), captured_at).id;
  };
}

}  // namespace trapsight
