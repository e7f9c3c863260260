#pragma once

// Small shared helpers for the test suite: scratch directories, seeded
// random data, and a hand-sized corpus several suites decode against.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "deckgen/io.hpp"
#include "deckgen/model.hpp"
#include "deckgen/textutil.hpp"
#include "deckgen/types.hpp"

namespace testutil {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("deckgen_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline deckgen::Vec unit_axis(std::size_t dim, std::size_t i) {
  deckgen::Vec v(dim, 0.0);
  v[i % dim] = 1.0;
  return v;
}

inline double rand_in(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
}

inline deckgen::Vec rand_vec(std::mt19937_64& gen, std::size_t dim, double lo = -2.0,
                             double hi = 2.0) {
  deckgen::Vec v(dim);
  for (double& x : v) x = rand_in(gen, lo, hi);
  return v;
}

inline deckgen::Vec rand_unit(std::mt19937_64& gen, std::size_t dim) {
  deckgen::Vec v = rand_vec(gen, dim, -1.0, 1.0);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return unit_axis(dim, 0);
  for (double& x : v) x /= norm;
  return v;
}

inline deckgen::BBox rand_box(std::mt19937_64& gen) {
  deckgen::BBox b;
  b.x = rand_in(gen, 0.0, 0.8);
  b.y = rand_in(gen, 0.0, 0.8);
  b.w = rand_in(gen, 0.05, 1.0 - b.x);
  b.h = rand_in(gen, 0.05, 1.0 - b.y);
  return b;
}

// Every registered tensor filled with zeros. Handy for closed-form checks:
// zero logits mean uniform softmax and 0.5 sigmoid everywhere.
inline deckgen::WeightBundle zero_bundle(const deckgen::ModelConfig& cfg) {
  deckgen::WeightBundle bundle(cfg);
  for (const auto& spec : deckgen::parameter_registry(cfg))
    bundle.put(spec.name, deckgen::Tensor::zeros(spec.dims));
  return bundle;
}

// Three sections, three figures; ids follow the <doc>s<k> pattern the
// matching helpers key embeddings by.
inline deckgen::Document demo_doc() {
  deckgen::Document doc;
  doc.id = "demo";
  doc.sections.resize(3);
  doc.sections[0].title = "Intro";
  doc.sections[0].sentences = {{"a1", "solar panels convert light"},
                               {"a2", "storage smooths the supply"}};
  doc.sections[1].title = "Method";
  doc.sections[1].sentences = {{"b1", "we model panel efficiency"},
                               {"b2", "the tracker follows the sun"},
                               {"b3", "losses stay under two percent"}};
  doc.sections[2].title = "Results";
  doc.sections[2].sentences = {{"c1", "output doubles at noon"},
                               {"c2", "costs fall with scale"}};
  doc.figures = {{"figX", "panel wiring diagram", 1.5},
                 {"figY", "efficiency over time", 1.0},
                 {"figZ", "cost breakdown chart", 2.0}};
  return doc;
}

// Random unit embeddings for every sentence and figure of `doc`.
inline deckgen::EmbeddingBundle demo_emb(const deckgen::Document& doc, std::size_t text_dim,
                                         std::size_t image_dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  deckgen::EmbeddingBundle emb;
  emb.text = deckgen::EmbeddingStore(text_dim);
  emb.image = deckgen::EmbeddingStore(image_dim);
  for (const auto& sec : doc.sections)
    for (const auto& s : sec.sentences) emb.text.add(s.id, rand_unit(gen, text_dim));
  for (const auto& fig : doc.figures) {
    emb.text.add(fig.id, rand_unit(gen, text_dim));
    emb.image.add(fig.id, rand_unit(gen, image_dim));
  }
  return emb;
}

inline deckgen::Vocabulary demo_vocab(const deckgen::Document& doc) {
  std::set<std::string> words;
  for (const auto& sec : doc.sections)
    for (const auto& s : sec.sentences)
      for (const auto& tok : deckgen::tokenize_keep_punct(s.text)) words.insert(tok);
  for (const auto& fig : doc.figures)
    for (const auto& tok : deckgen::tokenize_keep_punct(fig.caption)) words.insert(tok);
  return deckgen::Vocabulary::from_words({words.begin(), words.end()});
}

inline deckgen::ModelConfig demo_config(std::size_t text_dim, std::size_t image_dim,
                                        std::size_t vocab_size) {
  deckgen::ModelConfig cfg;
  cfg.sentence_dim = text_dim;
  cfg.image_dim = image_dim;
  cfg.shared_dim = 8;
  cfg.pt_hidden = 5;
  cfg.par_hidden = 6;
  cfg.vocab_size = vocab_size;
  return cfg;
}

}  // namespace testutil
