#include "auvid/kvconfig.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "auvid/types.hpp"

namespace auvid::kv {

namespace pt = boost::property_tree;

Document parse(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("malformed config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  Document doc;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      doc[""][name] = node.data();
      continue;
    }
    auto& section = doc[name];
    for (const auto& [key, value] : node) section[key] = value.data();
  }
  return doc;
}

Document read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string to_string(const Document& doc) {
  std::ostringstream out;
  if (auto it = doc.find(""); it != doc.end()) {
    for (const auto& [k, v] : it->second) out << k << " = " << v << "\n";
  }
  for (const auto& [section, values] : doc) {
    if (section.empty()) continue;
    out << "[" << section << "]\n";
    for (const auto& [k, v] : values) out << k << " = " << v << "\n";
  }
  return out.str();
}

void write_file(const Document& doc, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << to_string(doc);
}

SectionReader::SectionReader(const Document& doc, std::string section, bool required)
    : section_(std::move(section)) {
  auto it = doc.find(section_);
  if (it != doc.end()) {
    values_ = it->second;
  } else if (required) {
    throw ConfigError("missing config section [" + section_ + "]");
  }
}

bool SectionReader::has(const std::string& key) const { return values_.count(key) != 0; }

std::string SectionReader::qualified(const std::string& key) const {
  return section_.empty() ? key : section_ + "." + key;
}

const std::string& SectionReader::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + qualified(key) + "'");
  used_.insert(key);
  return it->second;
}

double SectionReader::get_double(const std::string& key) const {
  const auto& text = raw(key);
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + qualified(key) + "' is not a number: '" + text + "'");
  }
}

double SectionReader::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long SectionReader::get_int(const std::string& key) const {
  const auto& text = raw(key);
  try {
    std::size_t pos = 0;
    long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + qualified(key) + "' is not an integer: '" + text + "'");
  }
}

long long SectionReader::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::string SectionReader::get_string(const std::string& key) const { return raw(key); }

std::string SectionReader::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

std::vector<int> SectionReader::get_int_list(const std::string& key) const {
  try {
    return parse_int_list(raw(key));
  } catch (const ConfigError& e) {
    throw ConfigError("config key '" + qualified(key) + "': " + e.what());
  }
}

std::vector<int> SectionReader::get_int_list(const std::string& key,
                                             const std::vector<int>& fallback) const {
  return has(key) ? get_int_list(key) : fallback;
}

void SectionReader::finish() const {
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) throw ConfigError("unknown config key '" + qualified(key) + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto first = item.find_first_not_of(" \t");
    auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("empty list element in '" + text + "'");
    item = item.substr(first, last - first + 1);
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) throw ConfigError("bad integer '" + item + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace auvid::kv
