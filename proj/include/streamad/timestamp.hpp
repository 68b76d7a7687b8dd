#pragma once

#include <cstddef>
#include <string>

namespace streamad {

// A timestamp as ingested (original text, echoed in outputs) together with
// its value in seconds since the Unix epoch (used for ordering and spacing).
struct Timestamp {
  std::string text;
  double epoch_seconds = 0.0;

  bool operator==(const Timestamp&) const = default;
};

// Accepts integer/decimal epoch seconds, or ISO-8601 "YYYY-MM-DD[ T]HH:MM[:SS[.frac]][Z]"
// interpreted as UTC. Throws ParseError.
Timestamp parse_timestamp(const std::string& text);

// Renders epoch seconds as "YYYY-MM-DD HH:MM:SS" (UTC), the NAB layout.
std::string format_iso_timestamp(double epoch_seconds);

// Timestamp for stream position `index` when no real clock exists.
Timestamp index_timestamp(std::size_t index);

}  // namespace streamad
