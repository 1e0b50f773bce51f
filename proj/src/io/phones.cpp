#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "vt/error.hpp"
#include "vt/io.hpp"

namespace vt::io {
namespace {

struct NumberedSegment {
  PhoneSegment seg;
  int line = 0;
};

double parse_seconds(std::string_view field, int line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw FormatError("bad_time", "line " + std::to_string(line) + ": invalid time '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::vector<PhoneSegment> parse_phone_labels(std::string_view text) {
  std::vector<NumberedSegment> rows;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) {
      throw FormatError("bad_line", "line " + std::to_string(line_no) + ": expected start<TAB>end<TAB>label");
    }
    NumberedSegment r;
    r.line = line_no;
    r.seg.start_s = parse_seconds(line.substr(0, t1), line_no);
    r.seg.end_s = parse_seconds(line.substr(t1 + 1, t2 - t1 - 1), line_no);
    r.seg.label = std::string(line.substr(t2 + 1));
    if (!(r.seg.end_s > r.seg.start_s) || r.seg.start_s < 0.0) {
      throw FormatError("bad_interval", "line " + std::to_string(line_no) + ": need end > start >= 0");
    }
    rows.push_back(std::move(r));
  }

  std::stable_sort(rows.begin(), rows.end(), [](const NumberedSegment& a, const NumberedSegment& b) {
    return a.seg.start_s < b.seg.start_s;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].seg.start_s < rows[i - 1].seg.end_s) {
      throw FormatError("overlap", "segments on lines " + std::to_string(rows[i - 1].line) + " and " +
                                       std::to_string(rows[i].line) + " overlap");
    }
  }
  std::vector<PhoneSegment> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(r.seg));
  return out;
}

std::vector<PhoneSegment> read_phone_labels(const std::filesystem::path& path) {
  try {
    return parse_phone_labels(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_phone_labels(std::span<const PhoneSegment> phones) {
  // Shortest text that parses back to the same double.
  auto num = [](double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  std::string out;
  for (const PhoneSegment& p : phones) out += num(p.start_s) + '\t' + num(p.end_s) + '\t' + p.label + '\n';
  return out;
}

void write_phone_labels(const std::filesystem::path& path, std::span<const PhoneSegment> phones) {
  write_file_bytes(path, format_phone_labels(phones));
}

}  // namespace vt::io
