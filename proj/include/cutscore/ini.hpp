#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cutscore::ini {

// The `key = value` dialect shared by plan files and pipeline config files.
// '#' and ';' start comment lines; keys before the first [header] land in a
// block with an empty name. Order and line numbers are preserved for error
// reporting.
struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Block {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

struct Document {
  std::vector<Block> blocks;
};

// Throws Error(kParseError) with "line N: ..." on malformed lines.
Document parse(std::string_view text);

}  // namespace cutscore::ini
