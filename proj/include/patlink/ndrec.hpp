#pragma once

// Newline-delimited record files: one JSON object per line, UTF-8.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "patlink/corpus.hpp"

namespace patlink {

using Json = nlohmann::json;

void to_json(Json& j, const BibRecord& r);
void from_json(const Json& j, BibRecord& r);
void to_json(Json& j, const Patent& p);
void from_json(const Json& j, Patent& p);
void to_json(Json& j, const RefElements& e);
void from_json(const Json& j, RefElements& e);
void to_json(Json& j, const NplReference& r);
void from_json(const Json& j, NplReference& r);
void to_json(Json& j, const PaperCitationEdge& e);
void from_json(const Json& j, PaperCitationEdge& e);
void to_json(Json& j, const CategoryOverride& o);
void from_json(const Json& j, CategoryOverride& o);

/// Calls fn(json, line_number) for each non-blank line. Parse failures and
/// exceptions thrown by fn are rethrown as FormatError("file:line: ...").
template <class Fn>
void for_each_ndrec(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(Json::parse(line), line_no);
    } catch (const Json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

template <class T>
std::vector<T> read_ndrec(const std::filesystem::path& path) {
  std::vector<T> out;
  for_each_ndrec(path, [&](const Json& j, std::size_t) { out.push_back(j.get<T>()); });
  return out;
}

class NdrecWriter {
 public:
  explicit NdrecWriter(const std::filesystem::path& path, bool append = false)
      : out_(path, append ? std::ios::app : std::ios::trunc), path_(path) {
    if (!out_) throw FormatError("cannot write " + path.string());
  }

  template <class T>
  void write(const T& value) {
    out_ << Json(value).dump() << '\n';
  }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

template <class T>
void write_ndrec(const std::filesystem::path& path, const std::vector<T>& values) {
  NdrecWriter w(path);
  for (const auto& v : values) w.write(v);
}

}  // namespace patlink
