#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <zlib.h>

#include "gownet/embeddings.hpp"
#include "gownet/errors.hpp"

using namespace gownet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gownet_emb_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("plain file with two tokens, dim 3") {
  TempDir tmp;
  write_file(tmp.file("v.txt"), "cat 1.0 2.0 3.0\ndog -0.5 0.25 0\n");
  const EmbeddingTable t = load_embeddings(tmp.file("v.txt"));
  CHECK(t.size() == 2);
  CHECK(t.dim() == 3);
  CHECK(t.lookup("cat").value() == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("header line is skipped") {
  TempDir tmp;
  write_file(tmp.file("v.txt"), "2 3\ncat 1 2 3\ndog 4 5 6\n");
  const EmbeddingTable t = load_embeddings(tmp.file("v.txt"));
  CHECK(t.size() == 2);
  CHECK(t.dim() == 3);
}

TEST_CASE("vocabulary filter keeps only requested tokens") {
  TempDir tmp;
  write_file(tmp.file("v.txt"), "a 1 2\nb 3 4\n");
  const std::unordered_set<std::string> vocab{"a"};
  const EmbeddingTable t = load_embeddings(tmp.file("v.txt"), &vocab);
  CHECK(t.size() == 1);
  CHECK(t.lookup("a").has_value());
  CHECK_FALSE(t.lookup("b").has_value());
}

TEST_CASE("round-trip: written vectors reload bit-identically") {
  TempDir tmp;
  const std::vector<double> vec{0.123456789012345, -3.0, 1e-7};
  {
    std::ofstream out(tmp.file("v.txt"));
    out.precision(17);
    out << "word";
    for (double v : vec) out << " " << v;
    out << "\n";
  }
  const EmbeddingTable t = load_embeddings(tmp.file("v.txt"));
  CHECK(t.lookup("word").value() == vec);
}

TEST_CASE("lookup normalizes case; unknown tokens are absent") {
  TempDir tmp;
  write_file(tmp.file("v.txt"), "cat 1 2\n");
  const EmbeddingTable t = load_embeddings(tmp.file("v.txt"));
  CHECK(t.lookup("Cat").value() == std::vector<double>{1.0, 2.0});
  CHECK_FALSE(t.lookup("zebra").has_value());
}

TEST_CASE("malformed lines are skipped and counted") {
  TempDir tmp;
  write_file(tmp.file("v.txt"), "cat 1 2\nbroken 1 x\nonlytoken\ndog 3 4\n");
  const EmbeddingTable t = load_embeddings(tmp.file("v.txt"));
  CHECK(t.size() == 2);
  CHECK(t.skipped_lines() == 2);
}

TEST_CASE("inconsistent dimensions raise a format error") {
  TempDir tmp;
  write_file(tmp.file("v.txt"), "cat 1 2\ndog 1 2 3\n");
  CHECK_THROWS_AS(load_embeddings(tmp.file("v.txt")), FormatError);
}

TEST_CASE("unreadable file raises an I/O error") {
  CHECK_THROWS_AS(load_embeddings("/nonexistent/path/v.txt"), IoError);
}

TEST_CASE("gzip-compressed variant is accepted") {
  TempDir tmp;
  const std::string gz = tmp.file("v.txt.gz");
  gzFile f = gzopen(gz.c_str(), "wb");
  REQUIRE(f != nullptr);
  const std::string content = "cat 1 2 3\ndog 4 5 6\n";
  gzwrite(f, content.data(), static_cast<unsigned>(content.size()));
  gzclose(f);

  const EmbeddingTable t = load_embeddings(gz);
  CHECK(t.size() == 2);
  CHECK(t.lookup("dog").value() == std::vector<double>{4.0, 5.0, 6.0});
}
