#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace auvid::kv {

/// section -> key -> raw value. Keys before any [section] header land in "".
using Document = std::map<std::string, std::map<std::string, std::string>>;

Document parse(const std::string& text);
Document read_file(const std::filesystem::path& file);
std::string to_string(const Document& doc);
void write_file(const Document& doc, const std::filesystem::path& file);

/// Strict typed access to one section. Every key must be consumed before
/// finish(), otherwise the first unknown key is reported.
class SectionReader {
 public:
  SectionReader(const Document& doc, std::string section, bool required = true);

  bool has(const std::string& key) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  void finish() const;

 private:
  const std::string& raw(const std::string& key) const;
  std::string qualified(const std::string& key) const;

  std::string section_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// Lossless decimal form of a double.
std::string format_double(double v);
std::vector<int> parse_int_list(const std::string& text);
std::string join_ints(const std::vector<int>& values);

/// 64-bit FNV-1a, used for config and file fingerprints.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace auvid::kv
