#include "trapsight/imaging.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include "trapsight/errors.hpp"

namespace trapsight {
namespace {

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
  }
}

struct Run {
  int y;
  int x0;
  int x1;  // inclusive
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  // Lower index becomes the root, so roots are the first run in raster order.
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

GrayImage to_grayscale(const ColorImage& img) {
  GrayImage out(img.width(), img.height());
  const auto in = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) {
    // Fixed-point so that x.5 rounds up exactly.
    const unsigned v = 299u * in[i].r + 587u * in[i].g + 114u * in[i].b;
    dst[i] = static_cast<std::uint8_t>(std::min(255u, (v + 500u) / 1000u));
  }
  return out;
}

BinaryImage binary_threshold(const GrayImage& img, std::uint8_t t) {
  GrayImage out(img.width(), img.height());
  const auto in = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = in[i] > t ? kBackground : kForeground;
  return detail::make_binary_unchecked(std::move(out));
}

GrayImage absolute_difference(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a, b, "absolute_difference");
  GrayImage out(a.width(), a.height());
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    dst[i] = static_cast<std::uint8_t>(pa[i] > pb[i] ? pa[i] - pb[i] : pb[i] - pa[i]);
  }
  return out;
}

double similarity_percent(const BinaryImage& a, const BinaryImage& b) {
  require_same_shape(a, b, "similarity_percent");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::size_t equal = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) equal += pa[i] == pb[i] ? 1 : 0;
  return 100.0 * static_cast<double>(equal) / static_cast<double>(pa.size());
}

std::vector<Component> label_components(const BinaryImage& img) {
  const int w = img.width();
  const int h = img.height();

  std::vector<Run> runs;
  std::vector<std::size_t> row_begin(static_cast<std::size_t>(h) + 1, 0);
  for (int y = 0; y < h; ++y) {
    row_begin[y] = runs.size();
    const auto row = img.row(y);
    int x = 0;
    while (x < w) {
      if (row[x] != kForeground) {
        ++x;
        continue;
      }
      const int start = x;
      while (x < w && row[x] == kForeground) ++x;
      runs.push_back({y, start, x - 1});
    }
  }
  row_begin[h] = runs.size();

  DisjointSets sets(runs.size());
  for (int y = 1; y < h; ++y) {
    std::size_t p = row_begin[y - 1];
    const std::size_t p_end = row_begin[y];
    for (std::size_t c = row_begin[y]; c < row_begin[y + 1]; ++c) {
      // Runs in the row above touch this one (8-connectivity) when they
      // overlap [x0 - 1, x1 + 1].
      while (p < p_end && runs[p].x1 < runs[c].x0 - 1) ++p;
      for (std::size_t q = p; q < p_end && runs[q].x0 <= runs[c].x1 + 1; ++q) sets.join(q, c);
    }
  }

  struct Accum {
    std::int64_t area = 0;
    Component::Box box;
    double sum_x = 0.0;
    double sum_y = 0.0;
    int first_x = 0;  // x of the first run in raster order
  };
  std::vector<std::ptrdiff_t> slot(runs.size(), -1);
  std::vector<Accum> acc;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::size_t root = sets.find(i);
    const Run& r = runs[i];
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(acc.size());
      Accum a;
      a.box = {r.x0, r.y, r.x1, r.y};
      a.first_x = r.x0;
      acc.push_back(a);
    }
    Accum& a = acc[static_cast<std::size_t>(slot[root])];
    const std::int64_t len = r.x1 - r.x0 + 1;
    a.area += len;
    a.box.min_x = std::min(a.box.min_x, r.x0);
    a.box.max_x = std::max(a.box.max_x, r.x1);
    a.box.max_y = std::max(a.box.max_y, r.y);
    a.sum_x += static_cast<double>(r.x0 + r.x1) * static_cast<double>(len) / 2.0;
    a.sum_y += static_cast<double>(r.y) * static_cast<double>(len);
  }

  // Two regions can share (min_y, min_x); the first raster pixel breaks the tie.
  std::sort(acc.begin(), acc.end(), [](const Accum& a, const Accum& b) {
    return std::tie(a.box.min_y, a.box.min_x, a.first_x) < std::tie(b.box.min_y, b.box.min_x, b.first_x);
  });

  std::vector<Component> out;
  out.reserve(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const Accum& a = acc[i];
    out.push_back(Component{static_cast<int>(i) + 1, a.area, a.box, a.sum_x / static_cast<double>(a.area),
                            a.sum_y / static_cast<double>(a.area)});
  }
  return out;
}

std::size_t count_weevils(std::span<const Component> components, std::int64_t lower, std::int64_t upper) {
  if (lower > upper) {
    throw ConfigError("area bounds: lower " + std::to_string(lower) + " exceeds upper " + std::to_string(upper),
                      {{"lower", "must not exceed upper"}});
  }
  return static_cast<std::size_t>(std::count_if(components.begin(), components.end(), [&](const Component& c) {
    return lower <= c.area && c.area <= upper;
  }));
}

BinaryImage new_object_mask(const BinaryImage& previous, const BinaryImage& current) {
  require_same_shape(previous, current, "new_object_mask");
  GrayImage out(current.width(), current.height());
  const auto pp = previous.pixels();
  const auto pc = current.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < pc.size(); ++i) {
    dst[i] = (pc[i] == kForeground && pp[i] == kBackground) ? kForeground : kBackground;
  }
  return detail::make_binary_unchecked(std::move(out));
}

}  // namespace trapsight
