#include "roma/record_file.hpp"

#include <sstream>

#include "roma/crypto.hpp"
#include "roma/error.hpp"

namespace roma {
namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

bool is_blank_or_comment(std::string_view line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string_view::npos || line[pos] == '#';
}

}  // namespace

RecordFile parse_record_file(std::string_view text,
                             std::string_view expected_format) {
  // Locate the checksum line: last non-blank line.
  std::size_t end = text.size();
  while (end > 0 && (text[end - 1] == '\n' || text[end - 1] == '\r' ||
                     text[end - 1] == ' ' || text[end - 1] == '\t')) {
    --end;
  }
  std::size_t line_start = text.rfind('\n', end == 0 ? 0 : end - 1);
  line_start = (line_start == std::string_view::npos) ? 0 : line_start + 1;
  auto checksum_tokens = tokenize(text.substr(line_start, end - line_start));
  if (checksum_tokens.size() != 3 || checksum_tokens[0] != "checksum") {
    throw Error(ErrorCode::kFormatError,
                std::string(expected_format) + ": missing trailing checksum line");
  }
  if (checksum_tokens[1] != crypto::kHashName) {
    throw Error(ErrorCode::kFormatError,
                "unsupported checksum algorithm '" + checksum_tokens[1] + "'");
  }
  std::string_view body = text.substr(0, line_start);
  auto actual = crypto::to_hex(crypto::sha256(body));
  if (actual != checksum_tokens[2]) {
    throw Error(ErrorCode::kChecksumMismatch,
                std::string(expected_format) + ": checksum mismatch (expected " +
                    checksum_tokens[2] + ", computed " + actual + ")");
  }

  RecordFile file;
  bool saw_format = false;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    std::string_view line = body.substr(pos, nl - pos);
    pos = nl + 1;
    if (is_blank_or_comment(line)) continue;
    auto tokens = tokenize(line);
    if (!saw_format) {
      if (tokens.size() != 3 || tokens[0] != "format") {
        throw Error(ErrorCode::kFormatError,
                    "first record must be 'format <name> <version>'");
      }
      file.format = tokens[1];
      try {
        file.format_version = std::stoi(tokens[2]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kFormatError, "format version must be an integer");
      }
      if (file.format != expected_format) {
        throw Error(ErrorCode::kFormatError, "expected format '" +
                                                 std::string(expected_format) +
                                                 "', found '" + file.format + "'");
      }
      saw_format = true;
      continue;
    }
    file.records.push_back(std::move(tokens));
  }
  if (!saw_format) {
    throw Error(ErrorCode::kFormatError, "format record missing");
  }
  return file;
}

std::string seal_record_file(std::string_view body) {
  std::string out(body);
  if (!out.empty() && out.back() != '\n') out.push_back('\n');
  auto digest = crypto::to_hex(crypto::sha256(out));
  out += "checksum ";
  out += crypto::kHashName;
  out += ' ';
  out += digest;
  out += '\n';
  return out;
}

}  // namespace roma
