#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quasar/io.hpp"
#include "quasar/text.hpp"

namespace quasar {

using Json = nlohmann::json;

struct JsonlLine {
  size_t line_number = 0;  // 1-based
  Json value;
};

struct JsonlReject {
  size_t line_number = 0;
  std::string reason;
};

struct JsonlFile {
  std::vector<JsonlLine> lines;
  std::vector<JsonlReject> rejects;
};

// Reads a JSON-lines file. Unreadable files throw; malformed lines are
// reported per line, blank lines are skipped.
inline JsonlFile read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  JsonlFile out;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_view(line).empty()) continue;
    try {
      out.lines.push_back({number, Json::parse(line)});
    } catch (const std::exception& e) {
      out.rejects.push_back({number, e.what()});
    }
  }
  return out;
}

inline void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::string content;
  for (const auto& row : rows) {
    content += row.dump();
    content += '\n';
  }
  atomic_write_file(path, content);
}

}  // namespace quasar
