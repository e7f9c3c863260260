#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "deckgen/tensor.hpp"
#include "deckgen/types.hpp"

namespace deckgen {

/// Map from string key to fixed-dimension vector. Entry order is preserved
/// so that save(load(f)) reproduces f byte for byte. On disk values are
/// float32; in memory they are widened to double.
class EmbeddingStore {
public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }

  void add(const std::string& key, Vec value);
  bool contains(const std::string& key) const;

  /// Throws MissingEmbedding when the key is absent.
  const Vec& get(const std::string& key) const;

  const std::vector<std::string>& keys() const { return keys_; }

private:
  std::size_t dim_ = 0;
  std::vector<std::string> keys_;
  std::vector<Vec> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Text (sentence + caption) and image embedding stores travel together
/// through the pipeline; their dimensions are independent.
struct EmbeddingBundle {
  EmbeddingStore text;
  EmbeddingStore image;
};

/// Model dimensions. shared_dim must be even: the document-reader Bi-GRU
/// uses shared_dim/2 hidden units per direction so its concatenated output
/// matches the shared embedding width.
struct ModelConfig {
  std::size_t sentence_dim = 0;
  std::size_t image_dim = 0;
  std::size_t shared_dim = 1024;
  std::size_t pt_hidden = 256;
  std::size_t par_hidden = 512;
  std::size_t vocab_size = 0;

  void check() const;
};

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> dims;
};

/// The canonical ordered list of every learned tensor, with shapes derived
/// from the config. Weight files are validated against this registry.
std::vector<TensorSpec> parameter_registry(const ModelConfig& cfg);

/// Named-tensor container holding all model parameters.
class WeightBundle {
public:
  WeightBundle() = default;
  explicit WeightBundle(ModelConfig cfg) : config_(cfg) {}

  const ModelConfig& config() const { return config_; }

  void put(const std::string& name, Tensor t);
  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;

  /// Tensors in insertion order (the registry order for generated bundles).
  const std::vector<std::string>& names() const { return names_; }

  /// Checks the bundle against parameter_registry(config): every registry
  /// entry present with matching dims, nothing extra, all values finite.
  void validate() const;

private:
  ModelConfig config_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, Tensor> tensors_;
};

// -- JSON formats -----------------------------------------------------------

Document load_document(const std::string& path);
void save_document(const Document& doc, const std::string& path);

SlideDeck load_deck(const std::string& path);
void save_deck(const SlideDeck& deck, const std::string& path);
std::string deck_to_json(const SlideDeck& deck);

Vocabulary load_vocabulary(const std::string& path);
void save_vocabulary(const Vocabulary& vocab, const std::string& path);

// -- binary formats ---------------------------------------------------------

// Embedding file: magic "EMB1", u32 dim, u32 count, then per record a u16
// key length, the key bytes, and dim float32 values. Little-endian.
EmbeddingStore load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingStore& store, const std::string& path);

// Weight file: magic "W8S1", u32 tensor count, then per tensor a u16 name
// length, the name, u8 rank, rank u32 dims, and prod(dims) float32 values
// row-major. Little-endian.
WeightBundle load_weights(const std::string& path, const ModelConfig& cfg);
void save_weights(const WeightBundle& bundle, const std::string& path);

}  // namespace deckgen
