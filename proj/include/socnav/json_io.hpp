// Copyright 2026 The socnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOCNAV_JSON_IO_HPP_
#define SOCNAV_JSON_IO_HPP_

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "socnav/common.hpp"

namespace socnav {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw IoError("cannot write file: " + path);
  out << content;
  if (!out.good()) throw IoError("write failed: " + path);
}

inline nlohmann::json load_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const nlohmann::json& j,
                           int indent = 2) {
  write_text_file(path, j.dump(indent) + "\n");
}

}  // namespace socnav

#endif  // SOCNAV_JSON_IO_HPP_
