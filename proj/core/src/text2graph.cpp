#include "gownet/text2graph.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gownet/errors.hpp"

namespace gownet {

Tag tag_from_string(const std::string& s) {
  if (s == "noun") return Tag::noun;
  if (s == "verb") return Tag::verb;
  if (s == "adjective" || s == "adj") return Tag::adjective;
  if (s == "other") return Tag::other;
  throw FormatError("unknown POS tag: " + s);
}

std::string tag_to_string(Tag t) {
  switch (t) {
    case Tag::noun: return "noun";
    case Tag::verb: return "verb";
    case Tag::adjective: return "adjective";
    default: return "other";
  }
}

void ConversionConfig::validate() const {
  if (window < 2) throw ConfigError("window must be >= 2");
  if (max_nodes < 1) throw ConfigError("max_nodes must be >= 1");
}

std::vector<Token> clean_and_tokenize(const std::string& raw,
                                      const std::unordered_set<std::string>& stopwords) {
  std::vector<Token> out;
  std::string cur;
  int pos = 0;
  auto flush = [&] {
    if (!cur.empty()) {
      if (!stopwords.count(cur)) out.push_back(Token{cur, pos++, Tag::other});
      cur.clear();
    }
  };
  for (char ch : raw) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur.push_back(c);
    } else {
      flush();  // anything else is a separator
    }
  }
  flush();
  return out;
}

void apply_tags(std::vector<Token>& tokens, const PosLexicon& lexicon) {
  for (Token& t : tokens) {
    auto it = lexicon.find(t.surface);
    t.tag = it == lexicon.end() ? Tag::other : it->second;
  }
}

std::vector<Token> select_terms(const std::vector<Token>& tokens,
                                const std::unordered_set<Tag>& term_tags) {
  std::vector<Token> out;
  for (const Token& t : tokens)
    if (term_tags.count(t.tag)) out.push_back(t);
  return out;
}

std::vector<Token> collapse_terms(const std::vector<Token>& terms) {
  std::vector<Token> nodes;
  std::unordered_map<std::string, std::size_t> seen;
  for (const Token& t : terms) {
    if (seen.emplace(t.surface, nodes.size()).second) nodes.push_back(t);
  }
  return nodes;
}

Adjacency build_edges(const std::vector<Token>& terms, int window, DistanceBasis basis) {
  const std::vector<Token> nodes = collapse_terms(terms);
  std::unordered_map<std::string, std::size_t> node_of;
  for (std::size_t i = 0; i < nodes.size(); ++i) node_of[nodes[i].surface] = i;

  Adjacency a{Matrix(nodes.size(), nodes.size())};
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      const int pi = basis == DistanceBasis::cleaned_stream ? terms[i].text_pos
                                                            : static_cast<int>(i);
      const int pj = basis == DistanceBasis::cleaned_stream ? terms[j].text_pos
                                                            : static_cast<int>(j);
      if (std::abs(pj - pi) >= window) continue;
      const std::size_t u = node_of[terms[i].surface];
      const std::size_t v = node_of[terms[j].surface];
      if (u == v) continue;  // repeated surface, no self edge
      a.data(u, v) = 1.0;
      a.data(v, u) = 1.0;
    }
  }
  return a;
}

Matrix build_features(const std::vector<Token>& nodes, const EmbeddingTable& embeddings,
                      const ConversionConfig& cfg) {
  const std::size_t dim = embeddings.dim();
  const std::size_t pdim = static_cast<std::size_t>(cfg.position_dim());
  Matrix f(nodes.size(), dim + pdim);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (auto vec = embeddings.lookup(nodes[i].surface)) {
      for (std::size_t j = 0; j < dim; ++j) f(i, j) = (*vec)[j];
    }
    if (i < pdim) f(i, dim + i) = 1.0;  // one-hot over the graph row index
  }
  return f;
}

namespace {

TextGraph assemble(std::vector<Token> nodes, const Adjacency& real_adj,
                   const EmbeddingTable& embeddings, int label, const ConversionConfig& cfg) {
  const std::size_t cap = static_cast<std::size_t>(cfg.max_nodes);
  const std::size_t n_real = nodes.size();

  TextGraph g;
  g.label = label;
  g.n_real = n_real;
  g.adjacency.data = Matrix(cap, cap);
  for (std::size_t i = 0; i < n_real; ++i)
    for (std::size_t j = 0; j < n_real; ++j) g.adjacency.data(i, j) = real_adj.data(i, j);

  const Matrix real_f = build_features(nodes, embeddings, cfg);
  g.features = Matrix(cap, real_f.cols());
  for (std::size_t i = 0; i < n_real; ++i)
    for (std::size_t j = 0; j < real_f.cols(); ++j) g.features(i, j) = real_f(i, j);

  g.nodes = std::move(nodes);
  return g;
}

}  // namespace

TextGraph convert(const std::string& raw, int label, const EmbeddingTable& embeddings,
                  const PosLexicon& lexicon, const ConversionConfig& cfg) {
  cfg.validate();
  std::vector<Token> tokens = clean_and_tokenize(raw, cfg.stopwords);
  apply_tags(tokens, lexicon);
  std::vector<Token> terms = cfg.all_terms ? tokens : select_terms(tokens, cfg.term_tags);

  std::vector<Token> nodes = collapse_terms(terms);
  if (nodes.size() > static_cast<std::size_t>(cfg.max_nodes)) {
    // keep the first max_nodes nodes in text order
    nodes.resize(static_cast<std::size_t>(cfg.max_nodes));
    std::unordered_set<std::string> kept;
    for (const Token& t : nodes) kept.insert(t.surface);
    std::erase_if(terms, [&](const Token& t) { return !kept.count(t.surface); });
  }

  const Adjacency real_adj = build_edges(terms, cfg.window, cfg.distance_basis);
  return assemble(std::move(nodes), real_adj, embeddings, label, cfg);
}

std::string graph_to_jsonl(const TextGraph& g) {
  nlohmann::json j;
  j["label"] = g.label;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const Token& t : g.nodes) nodes.push_back({{"w", t.surface}, {"p", t.text_pos}});
  auto& edges = j["edges"] = nlohmann::json::array();
  for (std::size_t i = 0; i < g.n_real; ++i)
    for (std::size_t k = i + 1; k < g.n_real; ++k)
      if (g.adjacency.data(i, k) != 0.0) edges.push_back({i, k});
  return j.dump();
}

TextGraph graph_from_jsonl(const std::string& line, const EmbeddingTable& embeddings,
                           const ConversionConfig& cfg) {
  cfg.validate();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("dataset record is not valid JSON: ") + e.what());
  }
  std::vector<Token> nodes;
  for (const auto& nj : j.at("nodes"))
    nodes.push_back(Token{nj.at("w").get<std::string>(), nj.at("p").get<int>(), Tag::other});
  if (nodes.size() > static_cast<std::size_t>(cfg.max_nodes))
    throw ConfigError("dataset record has more nodes than max_nodes");

  Adjacency real_adj{Matrix(nodes.size(), nodes.size())};
  for (const auto& ej : j.at("edges")) {
    const std::size_t u = ej.at(0).get<std::size_t>();
    const std::size_t v = ej.at(1).get<std::size_t>();
    if (u >= nodes.size() || v >= nodes.size())
      throw FormatError("dataset record has an out-of-range edge endpoint");
    real_adj.data(u, v) = 1.0;
    real_adj.data(v, u) = 1.0;
  }
  return assemble(std::move(nodes), real_adj, embeddings, j.at("label").get<int>(), cfg);
}

std::vector<TextGraph> load_dataset(const std::string& path, const EmbeddingTable& embeddings,
                                    const ConversionConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::vector<TextGraph> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(graph_from_jsonl(line, embeddings, cfg));
  }
  return out;
}

std::vector<CorpusDoc> load_corpus_csv(const std::string& path,
                                       std::vector<std::size_t>* bad_lines) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::vector<CorpusDoc> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    // RFC-4180-ish field split with quote support
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cur.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);

    if (fields.size() < 2) {
      if (bad_lines) bad_lines->push_back(lineno);
      continue;
    }
    char* end = nullptr;
    const long label = std::strtol(fields[0].c_str(), &end, 10);
    if (end == fields[0].c_str() || *end != '\0') {
      if (bad_lines) bad_lines->push_back(lineno);
      continue;
    }
    std::string text = fields[1];
    for (std::size_t i = 2; i < fields.size(); ++i) {
      text.push_back(' ');
      text += fields[i];
    }
    docs.push_back(CorpusDoc{static_cast<int>(label), std::move(text)});
  }
  return docs;
}

std::unordered_set<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list: " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(to_lower(line));
  }
  return out;
}

PosLexicon load_pos_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open POS lexicon: " + path);
  PosLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string word, tag;
    if (!(ss >> word >> tag))
      throw FormatError("POS lexicon line " + std::to_string(lineno) + ": expected 'word tag'");
    lex[to_lower(word)] = tag_from_string(tag);
  }
  return lex;
}

}  // namespace gownet
