#pragma once

// Flat "key = value" text files. '#' starts a comment; blank lines are
// skipped. Keys must be unique. Typed accessors throw ParseError naming the
// key and source line.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace avspo {

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

class KvFile {
 public:
  static KvFile parse(std::string_view text, std::string source = "<input>");
  static KvFile load(const std::string& path);

  const std::string& source() const { return source_; }
  const std::vector<KvEntry>& entries() const { return entries_; }
  bool has(std::string_view key) const;

  /// Inserts or replaces a value (used by sweeps to override base files).
  void set(const std::string& key, const std::string& value);

  /// Throws ParseError on any key outside `allowed`.
  void reject_unknown(const std::set<std::string>& allowed) const;

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long get_long(std::string_view key, long fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;

  std::string to_text() const;

 private:
  const KvEntry* find(std::string_view key) const;
  [[noreturn]] void fail(const KvEntry& e, const std::string& what) const;

  std::string source_;
  std::vector<KvEntry> entries_;
};

std::string trim(std::string_view s);
std::vector<std::string> split_list(std::string_view s, char sep = ',');

}  // namespace avspo
