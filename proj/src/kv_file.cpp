#include "avspo/kv_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "avspo/error.hpp"

namespace avspo {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    out.push_back(trim(s.substr(start, end - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

KvFile KvFile::parse(std::string_view text, std::string source) {
  KvFile f;
  f.source_ = std::move(source);
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(f.source_ + ":" + std::to_string(line_no) + ": expected 'key = value', got '" +
                       line + "'");
    }
    KvEntry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
              line_no};
    if (e.key.empty()) {
      throw ParseError(f.source_ + ":" + std::to_string(line_no) + ": empty key");
    }
    if (f.find(e.key) != nullptr) {
      throw ParseError(f.source_ + ":" + std::to_string(line_no) + ": duplicate key '" + e.key + "'");
    }
    f.entries_.push_back(std::move(e));
  }
  return f;
}

KvFile KvFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

const KvEntry* KvFile::find(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

bool KvFile::has(std::string_view key) const { return find(key) != nullptr; }

void KvFile::set(const std::string& key, const std::string& value) {
  for (auto& e : entries_) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  entries_.push_back(KvEntry{key, value, 0});
}

void KvFile::fail(const KvEntry& e, const std::string& what) const {
  std::string where = source_;
  if (e.line > 0) where += ":" + std::to_string(e.line);
  throw ParseError(where + ": key '" + e.key + "': " + what);
}

void KvFile::reject_unknown(const std::set<std::string>& allowed) const {
  for (const auto& e : entries_) {
    if (!allowed.contains(e.key)) fail(e, "unknown key");
  }
}

std::string KvFile::get_string(std::string_view key, std::string fallback) const {
  const auto* e = find(key);
  return e ? e->value : fallback;
}

double KvFile::get_double(std::string_view key, double fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(e->value, &used);
    if (used != e->value.size()) fail(*e, "trailing characters in number '" + e->value + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(*e, "expected a number, got '" + e->value + "'");
  }
}

long KvFile::get_long(std::string_view key, long fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  long v = 0;
  const auto* first = e->value.data();
  const auto* last = first + e->value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) fail(*e, "expected an integer, got '" + e->value + "'");
  return v;
}

std::uint64_t KvFile::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto* e = find(key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  const auto* first = e->value.data();
  const auto* last = first + e->value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    fail(*e, "expected a non-negative integer, got '" + e->value + "'");
  }
  return v;
}

std::string KvFile::to_text() const {
  std::string out;
  for (const auto& e : entries_) out += e.key + " = " + e.value + "\n";
  return out;
}

}  // namespace avspo
