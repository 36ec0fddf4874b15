#include "icn/records_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "icn/errors.hpp"

namespace icn {
namespace {

const std::string kRecordHeader = "object_id,leechers,size_bytes";
const std::string kLawHeader = "rank_lo,rank_hi,amplitude,exponent";

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv_line(const std::string& line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) {
    throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(std::move(field));
  return fields;
}

template <class T>
T parse_number(const std::string& text, std::size_t line_no,
               const char* column) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + column +
                     " '" + text + "'");
  }
  return value;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<ObjectRecord> read_object_records(std::istream& in,
                                              std::int64_t chunk_size_bytes) {
  if (chunk_size_bytes < 1) throw InvalidArgument("chunk size must be >= 1");
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kRecordHeader) {
    throw ParseError("object-record file must start with '" + kRecordHeader +
                     "'");
  }
  std::vector<ObjectRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 3 fields");
    }
    ObjectRecord r;
    r.object_id = fields[0];
    r.leechers = parse_number<double>(fields[1], line_no, "leechers");
    r.size_bytes = parse_number<std::int64_t>(fields[2], line_no, "size_bytes");
    r.chunk_size_bytes = chunk_size_bytes;
    if (!(r.leechers >= 0.0) || r.size_bytes < 1) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": leechers must be >= 0 and size_bytes >= 1");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ObjectRecord> read_object_records_file(const std::string& path,
                                                   std::int64_t chunk_size_bytes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_object_records(in, chunk_size_bytes);
}

void write_object_records(std::ostream& out,
                          std::span<const ObjectRecord> records) {
  out << kRecordHeader << '\n';
  for (const ObjectRecord& r : records) {
    out << quote_if_needed(r.object_id) << ',' << format_double(r.leechers)
        << ',' << r.size_bytes << '\n';
  }
}

void write_law_csv(std::ostream& out, const PopularityLaw& law) {
  out << kLawHeader << '\n';
  for (const Segment& s : law.segments()) {
    out << s.rank_lo << ',' << s.rank_hi << ',' << format_double(s.amplitude)
        << ',' << format_double(s.exponent) << '\n';
  }
}

PopularityLaw read_law_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kLawHeader) {
    throw ParseError("law file must start with '" + kLawHeader + "'");
  }
  std::vector<Segment> segments;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line, line_no);
    if (f.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields");
    }
    segments.push_back({parse_number<Rank>(f[0], line_no, "rank_lo"),
                        parse_number<Rank>(f[1], line_no, "rank_hi"),
                        parse_number<double>(f[2], line_no, "amplitude"),
                        parse_number<double>(f[3], line_no, "exponent")});
  }
  return PopularityLaw(std::move(segments));
}

nlohmann::json law_metadata(const PopularityLaw& law) {
  const Rank n = law.catalogue_size();
  std::vector<Rank> cuts;
  if (n >= empirical::kMinCatalogue) {
    const EmpiricalBreakpoints bp = empirical_breakpoints(n);
    cuts = {bp.head_end, bp.body_end, n};
  } else {
    for (int d = 1; d <= 10; ++d) {
      const Rank cut = std::max<Rank>(1, n * d / 10);
      if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
  }
  return law_metadata(law, cuts);
}

nlohmann::json law_metadata(const PopularityLaw& law, std::span<const Rank> cuts) {
  const std::vector<double> shares = traffic_shares(law, cuts);
  nlohmann::json table = nlohmann::json::array();
  Rank lo = 1;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    table.push_back({{"rank_lo", lo}, {"rank_hi", cuts[i]}, {"share", shares[i]}});
    lo = cuts[i] + 1;
  }
  return {{"N", law.catalogue_size()},
          {"total_weight", law.total_weight()},
          {"segments", law.segments().size()},
          {"shares", table}};
}

PopularityLaw load_law_file(const std::string& path,
                            std::int64_t chunk_size_bytes) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  header = strip_cr(header);
  in.clear();
  in.seekg(0);
  if (header == kLawHeader) return read_law_csv(in);
  if (header == kRecordHeader) {
    const auto records = read_object_records(in, chunk_size_bytes);
    return chunk_law_from_objects(records);
  }
  throw ParseError("'" + path + "' is neither a law export nor an object-record file");
}

}  // namespace icn
