#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "icn/popularity.hpp"

namespace icn {

/// Reads `object_id,leechers,size_bytes` CSV (header required, LF endings,
/// RFC 4180 quoting allowed in object_id). Throws ParseError with the line
/// number on malformed input.
[[nodiscard]] std::vector<ObjectRecord> read_object_records(
    std::istream& in, std::int64_t chunk_size_bytes = kDefaultChunkBytes);
[[nodiscard]] std::vector<ObjectRecord> read_object_records_file(
    const std::string& path, std::int64_t chunk_size_bytes = kDefaultChunkBytes);

void write_object_records(std::ostream& out,
                          std::span<const ObjectRecord> records);

/// `rank_lo,rank_hi,amplitude,exponent`, one row per segment, values printed
/// with round-trip precision.
void write_law_csv(std::ostream& out, const PopularityLaw& law);
[[nodiscard]] PopularityLaw read_law_csv(std::istream& in);

/// {"N", "total_weight", "shares": [{"rank_lo", "rank_hi", "share"}...]}.
/// Cuts default to the head/body/tail breakpoints when N allows, else to
/// rank deciles.
[[nodiscard]] nlohmann::json law_metadata(const PopularityLaw& law);
[[nodiscard]] nlohmann::json law_metadata(const PopularityLaw& law,
                                          std::span<const Rank> cuts);

/// Loads either a law export or an object-record file, sniffing the header.
[[nodiscard]] PopularityLaw load_law_file(
    const std::string& path, std::int64_t chunk_size_bytes = kDefaultChunkBytes);

}  // namespace icn
