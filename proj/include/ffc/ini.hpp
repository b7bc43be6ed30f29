#pragma once

#include <istream>
#include <string>
#include <vector>

namespace ffc {

// One parsed line of an INI-style config. Section headers appear as entries
// with an empty key so consumers see sections in file order, empty or not.
struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;

  bool is_section_header() const { return key.empty(); }
};

// Shared scanner for the config grammars: '#' and ';' comments, blank lines
// skipped, '[name]' headers, 'key = value' pairs. Malformed lines throw with
// the line number; semantic checks are the consumer's job.
std::vector<IniEntry> parse_ini(std::istream& in);

}  // namespace ffc
