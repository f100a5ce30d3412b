#include "divlab/report.hpp"

#include <filesystem>
#include <fstream>

namespace divlab {

Report::Section& Report::section(const std::string& title) {
  for (auto& s : sections_) {
    if (s.title == title) return s;
  }
  sections_.push_back(Section{title, {}});
  return sections_.back();
}

void Report::kv(Section& s, const std::string& key, const std::string& value) {
  s.lines.emplace_back(key, value);
}

void Report::kv(Section& s, const std::string& key, double value) {
  s.lines.emplace_back(key, fmt_g(value));
}

void Report::kv(Section& s, const std::string& key, std::int64_t value) {
  s.lines.emplace_back(key, fmt_i(value));
}

std::string Report::render() const {
  std::string out;
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    if (i > 0) out += '\n';
    out += '[';
    out += sections_[i].title;
    out += "]\n";
    for (const auto& [k, v] : sections_[i].lines) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
  }
  return out;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    fail(ErrKind::data, "cannot create directory '" + path + "': " + ec.message());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrKind::data, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) fail(ErrKind::data, "write failed for '" + path + "'");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string text;
  auto append_row = [&text](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) text += ',';
      text += cells[i];
    }
    text += '\n';
  };
  append_row(header);
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      fail(ErrKind::internal, "csv row width mismatch for '" + path + "'");
    }
    append_row(row);
  }
  write_text_file(path, text);
}

}  // namespace divlab
