#include "ffc/ini.hpp"

#include <cctype>
#include <stdexcept>

namespace ffc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::vector<IniEntry> parse_ini(std::istream& in) {
  std::vector<IniEntry> entries;
  std::string section;
  bool in_section = false;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line) +
                                 ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty())
        throw std::runtime_error("config line " + std::to_string(line) + ": empty section name");
      in_section = true;
      entries.push_back({section, "", "", line});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line) + ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("config line " + std::to_string(line) + ": expected 'key = value'");
    if (!in_section)
      throw std::runtime_error("config line " + std::to_string(line) +
                               ": key outside of any section");
    entries.push_back({section, key, value, line});
  }
  return entries;
}

}  // namespace ffc
