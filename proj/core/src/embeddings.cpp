#include "gownet/embeddings.hpp"

#include <zlib.h>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "gownet/errors.hpp"

namespace gownet {

std::string to_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

// Reads a whole file, transparently inflating gzip. gzread on a plain
// file returns the raw bytes, so one code path covers both.
std::string read_file_maybe_gzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open embeddings file: " + path);
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool bad = n < 0;
  gzclose(f);
  if (bad) throw IoError("read error on embeddings file: " + path);
  return out;
}

bool parse_vector_line(const std::string& line, std::string& token, std::vector<double>& vec) {
  std::istringstream ss(line);
  if (!(ss >> token)) return false;
  vec.clear();
  std::string field;
  while (ss >> field) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') return false;
    vec.push_back(v);
  }
  return !vec.empty();
}

}  // namespace

std::optional<std::vector<double>> EmbeddingTable::lookup(const std::string& token) const {
  auto it = entries_.find(to_lower(token));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable load_embeddings(const std::string& path,
                               const std::unordered_set<std::string>* vocabulary) {
  const std::string content = read_file_maybe_gzip(path);

  EmbeddingTable table;
  std::istringstream lines(content);
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (first) {
      first = false;
      // Optional header: exactly two integer fields "count dim".
      std::istringstream hs(line);
      long long count, dim;
      std::string extra;
      if ((hs >> count >> dim) && !(hs >> extra) && count > 0 && dim > 0) continue;
    }

    std::string token;
    std::vector<double> vec;
    if (!parse_vector_line(line, token, vec)) {
      ++table.skipped_lines_;
      continue;
    }
    if (table.dim_ == 0) {
      table.dim_ = vec.size();
    } else if (vec.size() != table.dim_) {
      throw FormatError("embeddings: inconsistent vector dimension for token '" + token +
                        "' (" + std::to_string(vec.size()) + " vs " +
                        std::to_string(table.dim_) + ")");
    }
    token = to_lower(token);
    if (vocabulary && !vocabulary->count(token)) continue;
    table.entries_[token] = std::move(vec);
  }
  return table;
}

}  // namespace gownet
