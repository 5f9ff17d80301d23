#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gownet/embeddings.hpp"
#include "gownet/graph.hpp"

namespace gownet {

enum class Tag { noun, verb, adjective, other };

Tag tag_from_string(const std::string& s);
std::string tag_to_string(Tag t);

struct Token {
  std::string surface;  // lowercase, nonempty
  int text_pos = 0;     // position in the cleaned token stream
  Tag tag = Tag::other;
};

// One training example: a padded graph-of-words with its label.
// Rows of adjacency/features beyond n_real are zero.
struct TextGraph {
  std::vector<Token> nodes;  // real nodes only, ascending text_pos of first occurrence
  Adjacency adjacency;       // capacity x capacity
  Matrix features;           // capacity x (embed_dim + position_dim)
  int label = 0;
  std::size_t n_real = 0;

  bool degenerate() const { return n_real == 0; }
};

// Whether co-occurrence distance is measured over the cleaned token
// stream (text_pos) or over the filtered term sequence index.
enum class DistanceBasis { cleaned_stream, term_stream };

struct ConversionConfig {
  int window = 4;      // >= 2
  int max_nodes = 100; // >= 1; also the position one-hot dimension
  std::unordered_set<Tag> term_tags{Tag::noun, Tag::verb, Tag::adjective};
  bool all_terms = false;  // skip POS filtering entirely
  std::unordered_set<std::string> stopwords;
  DistanceBasis distance_basis = DistanceBasis::cleaned_stream;

  int position_dim() const { return max_nodes; }
  void validate() const;
};

// token -> coarse POS tag; unlisted tokens are Tag::other.
using PosLexicon = std::unordered_map<std::string, Tag>;

// Lowercases, splits on any character outside [a-z0-9], drops stopwords,
// and numbers the surviving tokens consecutively from 0.
std::vector<Token> clean_and_tokenize(const std::string& raw,
                                      const std::unordered_set<std::string>& stopwords);

void apply_tags(std::vector<Token>& tokens, const PosLexicon& lexicon);

// Keeps tokens whose tag is in the allow-list; text_pos is preserved.
std::vector<Token> select_terms(const std::vector<Token>& tokens,
                                const std::unordered_set<Tag>& term_tags);

// Collapses repeated surfaces to one node at the first occurrence,
// ordered by first-occurrence position.
std::vector<Token> collapse_terms(const std::vector<Token>& terms);

// Adjacency over collapsed nodes: an edge joins two distinct surfaces
// iff some occurrence pair lies closer than `window`. Symmetric, zero
// diagonal.
Adjacency build_edges(const std::vector<Token>& terms, int window,
                      DistanceBasis basis = DistanceBasis::cleaned_stream);

// Row i = [word_vector(node_i) || one_hot(i, position_dim)].
// Unknown words get a zero word vector.
Matrix build_features(const std::vector<Token>& nodes, const EmbeddingTable& embeddings,
                      const ConversionConfig& cfg);

// Full pipeline: tokenize -> tag -> filter -> collapse -> truncate to
// max_nodes -> edges -> features, padded to max_nodes.
TextGraph convert(const std::string& raw, int label, const EmbeddingTable& embeddings,
                  const PosLexicon& lexicon, const ConversionConfig& cfg);

// --- dataset serialization (JSON-lines) ---
// {"label": int, "nodes": [{"w": str, "p": int}], "edges": [[i, j]]}
// Features are re-derived at load time from the embedding table.

std::string graph_to_jsonl(const TextGraph& g);
TextGraph graph_from_jsonl(const std::string& line, const EmbeddingTable& embeddings,
                           const ConversionConfig& cfg);

std::vector<TextGraph> load_dataset(const std::string& path, const EmbeddingTable& embeddings,
                                    const ConversionConfig& cfg);

// --- corpus input ---
struct CorpusDoc {
  int label = 0;
  std::string text;
};

// CSV with columns (label, text). Extra columns are joined into the
// text with a space (title + body distributions). Malformed rows are
// reported in `bad_lines` (1-based line numbers) and skipped.
std::vector<CorpusDoc> load_corpus_csv(const std::string& path, std::vector<std::size_t>* bad_lines);

std::unordered_set<std::string> load_word_list(const std::string& path);
PosLexicon load_pos_lexicon(const std::string& path);

}  // namespace gownet
