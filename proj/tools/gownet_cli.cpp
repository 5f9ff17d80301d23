// Command-line surface for the graph-of-words text classification
// pipeline: convert / train / eval / gradcheck / params.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gownet/embeddings.hpp"
#include "gownet/errors.hpp"
#include "gownet/model.hpp"
#include "gownet/text2graph.hpp"
#include "gownet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "gownet 0.1.0";

// FNV-1a 64, hex. Enough to pin input files in a run manifest.
std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gownet::IoError("cannot open file for digest: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 15];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<std::size_t> parse_channels(const std::string& s) {
  std::vector<std::size_t> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

int run_convert(const std::string& input, const std::string& embeddings_path, int window,
                int max_nodes, const std::string& terms_mode, const std::string& stopwords_path,
                const std::string& lexicon_path, const std::string& output) {
  gownet::ConversionConfig cfg;
  cfg.window = window;
  cfg.max_nodes = max_nodes;
  cfg.all_terms = terms_mode == "all";
  if (!stopwords_path.empty()) cfg.stopwords = gownet::load_word_list(stopwords_path);
  gownet::PosLexicon lexicon;
  if (!lexicon_path.empty()) lexicon = gownet::load_pos_lexicon(lexicon_path);
  if (!cfg.all_terms && lexicon.empty())
    throw gownet::ConfigError("--terms pos requires --pos-lexicon (or use --terms all)");
  cfg.validate();

  std::vector<std::size_t> bad_lines;
  const std::vector<gownet::CorpusDoc> docs = gownet::load_corpus_csv(input, &bad_lines);
  for (std::size_t line : bad_lines)
    std::cerr << "warning: skipping malformed CSV row at line " << line << "\n";

  // Load only the vocabulary the corpus needs.
  std::unordered_set<std::string> vocab;
  for (const auto& doc : docs)
    for (const gownet::Token& t : gownet::clean_and_tokenize(doc.text, cfg.stopwords))
      vocab.insert(t.surface);
  const gownet::EmbeddingTable table = gownet::load_embeddings(embeddings_path, &vocab);

  std::ofstream out(output);
  if (!out) throw gownet::IoError("cannot write dataset: " + output);

  std::size_t written = 0, degenerate = 0, unknown_words = 0, term_total = 0;
  for (const auto& doc : docs) {
    gownet::TextGraph g = gownet::convert(doc.text, doc.label, table, lexicon, cfg);
    if (g.degenerate()) {
      ++degenerate;
      continue;
    }
    term_total += g.n_real;
    for (const gownet::Token& t : g.nodes)
      if (!table.lookup(t.surface)) ++unknown_words;
    out << gownet::graph_to_jsonl(g) << "\n";
    ++written;
  }

  std::cout << "docs=" << written << " skipped_degenerate=" << degenerate << " mean_terms="
            << (written ? static_cast<double>(term_total) / static_cast<double>(written) : 0.0)
            << " unknown_words=" << unknown_words << " embedding_dim=" << table.dim() << "\n";
  return 0;
}

void write_manifest(const std::string& path, const json& config,
                    const std::vector<std::string>& input_files, std::uint64_t seed) {
  json m;
  m["tool_version"] = kToolVersion;
  m["seed"] = seed;
  m["config"] = config;
  auto& inputs = m["inputs"] = json::array();
  for (const std::string& f : input_files)
    inputs.push_back({{"path", f}, {"fnv1a64", file_digest(f)}});
  std::ofstream out(path);
  if (!out) throw gownet::IoError("cannot write run manifest: " + path);
  out << m.dump(2) << "\n";
}

int run_train(const std::string& train_path, const std::string& val_path,
              const std::string& embeddings_path, int max_nodes, const std::string& arch,
              const std::string& channels_str, int epochs, std::uint64_t seed, double lr,
              std::size_t batch_size, double dropout_keep, const std::string& out_dir,
              const std::string& resume_path) {
  gownet::ConversionConfig ccfg;
  ccfg.max_nodes = max_nodes;

  const gownet::EmbeddingTable table = gownet::load_embeddings(embeddings_path);
  const std::vector<gownet::TextGraph> train_set = gownet::load_dataset(train_path, table, ccfg);
  std::vector<gownet::TextGraph> val_set;
  if (!val_path.empty()) val_set = gownet::load_dataset(val_path, table, ccfg);
  if (train_set.empty()) throw gownet::ConfigError("training set is empty");

  int max_label = 0;
  for (const auto& g : train_set) max_label = std::max(max_label, g.label);
  for (const auto& g : val_set) max_label = std::max(max_label, g.label);

  gownet::ModelSpec spec;
  spec.arch = gownet::arch_from_string(arch);
  if (!channels_str.empty()) spec.channels = parse_channels(channels_str);
  spec.n_classes = static_cast<std::size_t>(max_label) + 1;
  spec.input_dim = table.dim() + static_cast<std::size_t>(max_nodes);
  spec.dropout_keep = dropout_keep;
  spec.validate();

  gownet::TrainConfig tcfg;
  tcfg.epochs = epochs;
  tcfg.seed = seed;
  tcfg.lr0 = lr;
  tcfg.batch_size = batch_size;
  if (epochs <= 50) tcfg.decay_epochs.clear();  // default schedule targets 60-epoch runs
  tcfg.validate();

  fs::create_directories(out_dir);

  json cfg_json = {{"arch", arch},
                   {"channels", spec.channels},
                   {"n_classes", spec.n_classes},
                   {"input_dim", spec.input_dim},
                   {"max_nodes", max_nodes},
                   {"epochs", epochs},
                   {"lr0", lr},
                   {"batch_size", batch_size},
                   {"dropout_keep", dropout_keep},
                   {"gpool_sites", spec.uses_gpool() ? json::array({2, 3}) : json::array()},
                   {"resume", resume_path}};
  std::vector<std::string> inputs = {train_path, embeddings_path};
  if (!val_path.empty()) inputs.push_back(val_path);
  write_manifest(out_dir + "/manifest.json", cfg_json, inputs, seed);

  const gownet::ModelParams* initial = nullptr;
  std::uint64_t initial_step = 0;
  gownet::Checkpoint resumed;
  if (!resume_path.empty()) {
    resumed = gownet::load_checkpoint(resume_path);
    initial = &resumed.params;
    initial_step = resumed.step;
  }

  gownet::TrainResult result = gownet::train(train_set, val_set.empty() ? nullptr : &val_set,
                                             spec, tcfg, initial, initial_step);
  gownet::write_metrics_csv(out_dir + "/metrics.csv", result.metrics);
  gownet::save_checkpoint(out_dir + "/checkpoint.json",
                          {spec, result.params, seed, result.state.step});

  const gownet::EpochMetrics& last = result.metrics.back();
  std::cout << "trained epochs=" << epochs << " final_train_loss=" << last.train_loss
            << " final_train_err=" << last.train_err;
  if (last.val_err >= 0.0) std::cout << " final_val_err=" << last.val_err;
  std::cout << "\n";
  return 0;
}

int run_eval(const std::string& data_path, const std::string& checkpoint_path,
             const std::string& embeddings_path) {
  const gownet::Checkpoint ckpt = gownet::load_checkpoint(checkpoint_path);
  const gownet::EmbeddingTable table = gownet::load_embeddings(embeddings_path);
  gownet::ConversionConfig ccfg;
  ccfg.max_nodes = static_cast<int>(ckpt.spec.input_dim - table.dim());
  const std::vector<gownet::TextGraph> data = gownet::load_dataset(data_path, table, ccfg);
  const double err = gownet::evaluate(data, ckpt.params, ckpt.spec);
  std::cout << "error_rate=" << err << "\n";
  return 0;
}

int run_gradcheck(const std::string& arch, const std::string& widths_str, std::uint64_t seed,
                  bool no_gate) {
  gownet::ModelSpec spec;
  spec.arch = gownet::arch_from_string(arch);
  spec.channels = widths_str.empty() ? std::vector<std::size_t>{4, 4, 2, 2}
                                     : parse_channels(widths_str);
  spec.n_classes = 3;
  spec.input_dim = 6;
  spec.dropout_keep = 1.0;  // keep the loss smooth for finite differences
  spec.validate();

  // Random 5-node graph with a ring topology and a held label.
  gownet::Rng rng(seed);
  const std::size_t n = 5;
  gownet::TextGraph g;
  g.n_real = n;
  g.label = 1;
  g.adjacency.data = gownet::Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    g.adjacency.data(i, (i + 1) % n) = 1.0;
    g.adjacency.data((i + 1) % n, i) = 1.0;
  }
  g.features = gownet::Matrix(n, spec.input_dim);
  for (std::size_t i = 0; i < g.features.size(); ++i) g.features.data()[i] = rng.uniform(-1.0, 1.0);

  gownet::ModelParams params = gownet::build(spec, seed);
  // Check at a generic point: zero-initialized biases can leave relu
  // units exactly at their kink, where finite differences disagree.
  for (gownet::ParamGroup& grp : params.groups)
    if (grp.name.back() == 'b')
      for (std::size_t i = 0; i < grp.value.size(); ++i) grp.value.data()[i] = rng.uniform(0.05, 0.2);

  auto loss_value = [&](const gownet::ModelParams& p) {
    gownet::Rng r(0);
    gownet::ForwardResult fwd = gownet::forward(p, spec, g, false, r, !no_gate);
    return fwd.tape.value(fwd.tape.softmax_cross_entropy(fwd.logits, {g.label}))(0, 0);
  };

  gownet::Rng r(0);
  gownet::ForwardResult fwd = gownet::forward(params, spec, g, false, r, !no_gate);
  const gownet::ad::TensorId loss = fwd.tape.softmax_cross_entropy(fwd.logits, {g.label});
  fwd.tape.backward(loss);

  bool all_ok = true;
  const double h = 1e-5;
  for (std::size_t gi = 0; gi < params.groups.size(); ++gi) {
    const std::string& name = params.groups[gi].name;
    const gownet::Matrix& analytic = fwd.tape.grad(fwd.param_ids[gi]);
    const bool is_projection = name.rfind("gpool", 0) == 0;

    double max_rel = 0.0, grad_norm = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      grad_norm += analytic.data()[i] * analytic.data()[i];
      gownet::ModelParams perturbed = params;
      perturbed.groups[gi].value.data()[i] += h;
      const double up = loss_value(perturbed);
      perturbed.groups[gi].value.data()[i] -= 2 * h;
      const double down = loss_value(perturbed);
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max(std::abs(analytic.data()[i]) + std::abs(numeric), 1e-8);
      max_rel = std::max(max_rel, std::abs(analytic.data()[i] - numeric) / denom);
    }
    grad_norm = std::sqrt(grad_norm);

    if (no_gate && is_projection) {
      const bool zero = grad_norm == 0.0;
      std::cout << (zero ? "PASS" : "FAIL") << " " << name
                << " zero-gradient-without-gate (|grad|=" << grad_norm << ", expected)\n";
      all_ok = all_ok && zero;
    } else {
      const bool ok = max_rel <= 1e-3;
      std::cout << (ok ? "PASS" : "FAIL") << " " << name << " max_rel_err=" << max_rel << "\n";
      all_ok = all_ok && ok;
    }
  }
  std::cout << (all_ok ? "all groups pass" : "gradient check FAILED") << "\n";
  return all_ok ? 0 : 1;
}

int run_params(const std::string& arch, const std::string& channels_str, std::size_t input_dim,
               std::size_t n_classes, bool as_json) {
  gownet::ModelSpec spec;
  spec.arch = gownet::arch_from_string(arch);
  if (!channels_str.empty()) spec.channels = parse_channels(channels_str);
  spec.input_dim = input_dim;
  spec.n_classes = n_classes;
  spec.validate();

  const gownet::ModelParams params = gownet::build(spec, 0);
  const gownet::ParamCounts counts = gownet::param_count(params);
  const double ratio =
      static_cast<double>(counts.gpool_overhead) / static_cast<double>(counts.total);

  if (as_json) {
    json j;
    j["arch"] = arch;
    j["total"] = counts.total;
    j["gpool_overhead"] = counts.gpool_overhead;
    j["gpool_overhead_ratio"] = ratio;
    auto& gj = j["groups"] = json::array();
    for (const auto& e : counts.groups) gj.push_back({{"name", e.name}, {"count", e.count}});
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& e : counts.groups) std::cout << e.name << "\t" << e.count << "\n";
    std::cout << "total\t" << counts.total << "\n";
    std::cout << "gpool_overhead\t" << counts.gpool_overhead << "\n";
    std::printf("gpool_overhead_ratio\t%.4f%%\n", 100.0 * ratio);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-of-words text classification networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // convert
  auto* convert = app.add_subcommand("convert", "Convert a (label,text) CSV corpus to a JSONL graph dataset");
  std::string cv_input, cv_embeddings, cv_stopwords, cv_lexicon, cv_output, cv_terms = "pos";
  int cv_window = 4, cv_max_nodes = 100;
  convert->add_option("--input", cv_input, "Corpus CSV")->required();
  convert->add_option("--embeddings", cv_embeddings, "Word-vectors file")->required();
  convert->add_option("--window", cv_window, "Sliding window size");
  convert->add_option("--max-nodes", cv_max_nodes, "Maximum nodes per graph");
  convert->add_option("--terms", cv_terms, "Term selection: pos | all")
      ->check(CLI::IsMember({"pos", "all"}));
  convert->add_option("--stopwords", cv_stopwords, "Stopword list, one per line");
  convert->add_option("--pos-lexicon", cv_lexicon, "POS lexicon: 'word tag' per line");
  convert->add_option("--output", cv_output, "Output JSONL dataset")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model on a JSONL dataset");
  std::string tr_train, tr_val, tr_embeddings, tr_arch, tr_channels, tr_out, tr_resume;
  int tr_epochs = 60, tr_max_nodes = 100;
  std::uint64_t tr_seed = 0;
  double tr_lr = 0.001, tr_keep = 0.55;
  std::size_t tr_batch = 256;
  train->add_option("--train", tr_train, "Training JSONL")->required();
  train->add_option("--val", tr_val, "Validation JSONL");
  train->add_option("--embeddings", tr_embeddings, "Word-vectors file")->required();
  train->add_option("--max-nodes", tr_max_nodes, "Graph capacity (must match conversion)");
  train->add_option("--arch", tr_arch, "gcn_net | gcn_gpool_net | hconv_net | hconv_gpool_net")
      ->required();
  train->add_option("--channels", tr_channels, "Comma-separated layer widths");
  train->add_option("--epochs", tr_epochs, "Training epochs");
  train->add_option("--seed", tr_seed, "RNG seed");
  train->add_option("--lr", tr_lr, "Initial learning rate");
  train->add_option("--batch-size", tr_batch, "Mini-batch size");
  train->add_option("--dropout-keep", tr_keep, "Dropout keep rate");
  train->add_option("--resume", tr_resume, "Checkpoint to resume from");
  train->add_option("--out", tr_out, "Output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a JSONL dataset");
  std::string ev_data, ev_ckpt, ev_embeddings;
  eval->add_option("--data", ev_data, "Dataset JSONL")->required();
  eval->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  eval->add_option("--embeddings", ev_embeddings, "Word-vectors file")->required();

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every parameter group");
  std::string gc_arch = "hconv_gpool_net", gc_widths;
  std::uint64_t gc_seed = 7;
  bool gc_no_gate = false;
  gradcheck->add_option("--arch", gc_arch, "Architecture");
  gradcheck->add_option("--widths", gc_widths, "Comma-separated tiny layer widths");
  gradcheck->add_option("--seed", gc_seed, "RNG seed");
  gradcheck->add_flag("--no-gate", gc_no_gate, "Ablate the gPool gate (projection grads become zero)");

  // params
  auto* paramscmd = app.add_subcommand("params", "Per-group parameter counts");
  std::string pr_arch, pr_channels;
  std::size_t pr_input_dim = 0, pr_classes = 2;
  bool pr_json = false;
  paramscmd->add_option("--arch", pr_arch, "Architecture")->required();
  paramscmd->add_option("--channels", pr_channels, "Comma-separated layer widths");
  paramscmd->add_option("--input-dim", pr_input_dim, "Input feature dimension")->required();
  paramscmd->add_option("--classes", pr_classes, "Number of classes");
  paramscmd->add_flag("--json", pr_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*convert)
      return run_convert(cv_input, cv_embeddings, cv_window, cv_max_nodes, cv_terms, cv_stopwords,
                         cv_lexicon, cv_output);
    if (*train)
      return run_train(tr_train, tr_val, tr_embeddings, tr_max_nodes, tr_arch, tr_channels,
                       tr_epochs, tr_seed, tr_lr, tr_batch, tr_keep, tr_out, tr_resume);
    if (*eval) return run_eval(ev_data, ev_ckpt, ev_embeddings);
    if (*gradcheck) return run_gradcheck(gc_arch, gc_widths, gc_seed, gc_no_gate);
    if (*paramscmd) return run_params(pr_arch, pr_channels, pr_input_dim, pr_classes, pr_json);
  } catch (const gownet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gownet::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
