#pragma once

// Structured text reports and CSV sidecars. All numbers flow through fmt_g so
// that reruns with the same seed produce byte-identical files (timings are
// the one intentionally non-reproducible section and always come last).

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "divlab/common.hpp"

namespace divlab {

class Report {
public:
  struct Section {
    std::string title;
    std::vector<std::pair<std::string, std::string>> lines;
  };

  // Returns the section with this title, appending it if new.
  Section& section(const std::string& title);

  void kv(Section& s, const std::string& key, const std::string& value);
  void kv(Section& s, const std::string& key, double value);
  void kv(Section& s, const std::string& key, std::int64_t value);
  void kv(Section& s, const std::string& key, int value) {
    kv(s, key, static_cast<std::int64_t>(value));
  }

  std::string render() const;

  const std::vector<Section>& sections() const { return sections_; }

private:
  std::vector<Section> sections_;
};

// Creates the directory (and parents) if needed; throws ErrKind::data on failure.
void ensure_directory(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

// CSV with a header row; every cell is written verbatim (numbers should be
// pre-formatted with fmt_g).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace divlab
