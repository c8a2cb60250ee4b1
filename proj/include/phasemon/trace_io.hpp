#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phasemon/errors.hpp"
#include "phasemon/text.hpp"
#include "phasemon/types.hpp"

namespace phasemon {

enum class TraceFormat { csv, jsonl };

inline std::optional<TraceFormat> parse_trace_format(std::string_view s) {
  if (s == "csv") return TraceFormat::csv;
  if (s == "jsonl") return TraceFormat::jsonl;
  return std::nullopt;
}

inline constexpr std::string_view kTraceCsvHeader =
    "index,start_cycle,tau,retired_instructions,util_int,util_fp,source_core";
inline constexpr int kTraceSchemaVersion = 1;

namespace detail {

inline void check_core_name(const IntervalSample& s, std::uint64_t row) {
  if (s.source_core.find_first_of(",\r\n\"") != std::string::npos)
    throw ValidationError(row, "source_core contains a reserved character");
}

inline IntervalSample parse_csv_row(std::string_view line, std::uint64_t line_no) {
  const auto f = text::split(line, ',');
  if (f.size() != 7) throw ParseError(line_no, "expected 7 fields, got " + std::to_string(f.size()));
  auto u64 = [&](std::string_view v, const char* what) {
    auto n = text::parse_u64(v);
    if (!n) throw ParseError(line_no, std::string("bad ") + what + " '" + std::string(v) + "'");
    return *n;
  };
  auto dbl = [&](std::string_view v, const char* what) {
    auto d = text::parse_double(v);
    if (!d) throw ParseError(line_no, std::string("bad ") + what + " '" + std::string(v) + "'");
    return *d;
  };
  IntervalSample s;
  s.index = u64(f[0], "index");
  s.start_cycle = u64(f[1], "start_cycle");
  s.tau = u64(f[2], "tau");
  s.retired_instructions = u64(f[3], "retired_instructions");
  s.util_int = dbl(f[4], "util_int");
  s.util_fp = dbl(f[5], "util_fp");
  s.source_core = std::string(f[6]);
  return s;
}

inline IntervalSample parse_jsonl_row(std::string_view line, std::uint64_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, e.what());
  }
  try {
    if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
    if (!j.contains("schema_version")) throw ParseError(line_no, "missing schema_version");
    if (j.at("schema_version").get<int>() != kTraceSchemaVersion)
      throw ParseError(line_no, "unsupported schema_version");
    IntervalSample s;
    s.index = j.at("index").get<std::uint64_t>();
    s.start_cycle = j.at("start_cycle").get<std::uint64_t>();
    s.tau = j.at("tau").get<std::uint64_t>();
    s.retired_instructions = j.at("retired_instructions").get<std::uint64_t>();
    s.util_int = j.at("util_int").get<double>();
    s.util_fp = j.at("util_fp").get<double>();
    s.source_core = j.at("source_core").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, e.what());
  }
}

}  // namespace detail

/// Streaming trace reader. Every row is checked against the sample
/// invariants and against contiguity with the previous row.
class TraceReader {
 public:
  TraceReader(std::istream& in, TraceFormat format) : in_(in), format_(format) {}

  std::optional<IntervalSample> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (format_ == TraceFormat::csv && !header_seen_) {
        if (line != kTraceCsvHeader) throw ParseError(line_no_, "missing or wrong CSV header");
        header_seen_ = true;
        continue;
      }
      if (line.empty()) {
        if (format_ == TraceFormat::jsonl) continue;
        throw ParseError(line_no_, "empty row");
      }
      IntervalSample s = format_ == TraceFormat::csv ? detail::parse_csv_row(line, line_no_)
                                                     : detail::parse_jsonl_row(line, line_no_);
      check(s);
      return s;
    }
    return std::nullopt;
  }

 private:
  void check(const IntervalSample& s) {
    try {
      validate(s);
    } catch (const ValidationError& e) {
      throw ValidationError(row_, e.what());
    }
    if (prev_) {
      if (s.index != prev_->index + 1) throw ValidationError(row_, "index is not contiguous");
      if (s.start_cycle != prev_->start_cycle + prev_->tau) throw ValidationError(row_, "start_cycle is not contiguous");
    }
    prev_ = s;
    ++row_;
  }

  std::istream& in_;
  TraceFormat format_;
  bool header_seen_ = false;
  std::uint64_t line_no_ = 0;
  std::uint64_t row_ = 0;
  std::optional<IntervalSample> prev_;
};

inline std::vector<IntervalSample> read_trace(std::istream& in, TraceFormat format) {
  TraceReader reader(in, format);
  std::vector<IntervalSample> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

inline void write_trace(std::span<const IntervalSample> samples, std::ostream& out, TraceFormat format) {
  if (format == TraceFormat::csv) out << kTraceCsvHeader << '\n';
  std::uint64_t row = 0;
  for (const auto& s : samples) {
    detail::check_core_name(s, row++);
    if (format == TraceFormat::csv) {
      out << s.index << ',' << s.start_cycle << ',' << s.tau << ',' << s.retired_instructions << ','
          << text::format_double(s.util_int) << ',' << text::format_double(s.util_fp) << ',' << s.source_core
          << '\n';
    } else {
      nlohmann::ordered_json j;
      j["schema_version"] = kTraceSchemaVersion;
      j["index"] = s.index;
      j["start_cycle"] = s.start_cycle;
      j["tau"] = s.tau;
      j["retired_instructions"] = s.retired_instructions;
      j["util_int"] = s.util_int;
      j["util_fp"] = s.util_fp;
      j["source_core"] = s.source_core;
      out << j.dump() << '\n';
    }
  }
}

/// Reads a whole trace file. An empty file yields an empty trace.
inline std::vector<IntervalSample> load_trace(const std::string& path, TraceFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  return read_trace(in, format);
}

inline void save_trace(std::span<const IntervalSample> samples, const std::string& path, TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace '" + path + "'");
  write_trace(samples, out, format);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace phasemon
