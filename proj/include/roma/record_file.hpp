#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace roma {

// Line-oriented, checksummed data file shared by instrument definitions and
// the role-effect model.
//
//   # comments and blank lines are ignored
//   format <name> <version>
//   <record tokens ...>
//   checksum sha-256 <hex digest of every byte preceding this line>
//
// The checksum line must be the last non-blank line.
struct RecordFile {
  std::string format;
  int format_version = 0;
  std::vector<std::vector<std::string>> records;
};

// Throws Error(kFormatError) for structural problems and
// Error(kChecksumMismatch) when the digest does not match.
RecordFile parse_record_file(std::string_view text,
                             std::string_view expected_format);

// Appends a checksum line covering `body` (which must end in '\n').
std::string seal_record_file(std::string_view body);

}  // namespace roma
