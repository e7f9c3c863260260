// Derives deterministic embedding files (and optionally a vocabulary) for a
// synthetic corpus: text vectors come from token feature hashing, so texts
// sharing words land close together; image vectors are seeded unit vectors,
// with deck figures perturbed copies of the document figure named before the
// dot in their id ("figA.x" orbits "figA"). A suffix of the form sNN pins
// the cosine to NN/100, otherwise it is 0.99.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deckgen/errors.hpp"
#include "deckgen/io.hpp"
#include "deckgen/textutil.hpp"
#include "deckgen/types.hpp"

namespace fs = std::filesystem;
using namespace deckgen;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void normalize(Vec& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= norm;
}

Vec text_vec(const std::string& text, std::size_t dim) {
  Vec v(dim, 0.0);
  for (const auto& tok : tokenize(text)) {
    const std::uint64_t h = fnv1a(tok);
    v[h % dim] += (h >> 63) ? 1.0 : -1.0;
  }
  normalize(v);
  return v;
}

Vec seeded_unit(const std::string& key, std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 gen(fnv1a(key) ^ seed);
  Vec v(dim);
  for (double& x : v) x = static_cast<double>(gen() >> 11) * 0x1p-52 - 1.0;
  normalize(v);
  return v;
}

// Unit vector at the requested cosine to `base`.
Vec at_cosine(const Vec& base, const std::string& key, std::uint64_t seed, double cosine) {
  Vec u = seeded_unit(key, seed + 1, base.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * base[i];
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= dot * base[i];
  normalize(u);
  const double s = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  Vec v(base.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = cosine * base[i] + s * u[i];
  return v;
}

// "figA.s79" -> ("figA", 0.79); "figA.x" -> ("figA", 0.99); "lone" -> none.
struct Orbit {
  std::string base;
  double cosine = 0.99;
};

std::optional<Orbit> parse_orbit(const std::string& id) {
  const std::size_t dot = id.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= id.size()) return std::nullopt;
  Orbit o;
  o.base = id.substr(0, dot);
  const std::string suffix = id.substr(dot + 1);
  if (suffix.size() == 3 && suffix[0] == 's' && std::isdigit(suffix[1]) && std::isdigit(suffix[2]))
    o.cosine = static_cast<double>((suffix[1] - '0') * 10 + (suffix[2] - '0')) / 100.0;
  return o;
}

std::vector<std::string> gather(const std::string& path, const std::string& suffix) {
  std::vector<std::string> out;
  if (!fs::is_directory(path)) {
    out.push_back(path);
    return out;
  }
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& e : fs::directory_iterator(path)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() > suffix.size() && name.substr(name.size() - suffix.size()) == suffix)
      entries.emplace_back(name, e.path().string());
  }
  std::sort(entries.begin(), entries.end());
  for (auto& [name, p] : entries) out.push_back(std::move(p));
  return out;
}

void add_once(EmbeddingStore& store, const std::string& key, Vec v) {
  if (!store.contains(key)) store.add(key, std::move(v));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic embeddings and vocabulary for a synthetic corpus"};
  std::string docs_path, decks_path, text_out, image_out, vocab_out;
  std::size_t dim = 24, image_dim = 12;
  std::uint64_t seed = 1;
  app.add_option("--docs", docs_path, "document JSON file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  app.add_option("--decks", decks_path, "deck JSON file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  app.add_option("--text-out", text_out, "text embedding destination")->required();
  app.add_option("--image-out", image_out, "image embedding destination")->required();
  app.add_option("--vocab-out", vocab_out, "vocabulary destination");
  app.add_option("--dim", dim, "text embedding width");
  app.add_option("--image-dim", image_dim, "image embedding width");
  app.add_option("--seed", seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::vector<Document> docs;
    for (const auto& p : gather(docs_path, ".doc.json")) docs.push_back(load_document(p));
    std::vector<SlideDeck> decks;
    for (const auto& p : gather(decks_path, ".deck.json")) decks.push_back(load_deck(p));

    EmbeddingStore text(dim), image(image_dim);
    std::set<std::string> words;
    auto index_text = [&](const std::string& t) {
      for (auto& tok : tokenize_keep_punct(t)) words.insert(std::move(tok));
    };

    for (const auto& doc : docs) {
      for (const auto& sec : doc.sections)
        for (const auto& s : sec.sentences) {
          add_once(text, s.id, text_vec(s.text, dim));
          index_text(s.text);
        }
      for (const auto& f : doc.figures) {
        add_once(text, f.id, text_vec(f.caption, dim));
        add_once(image, f.id, seeded_unit(f.id, seed, image_dim));
        index_text(f.caption);
      }
    }
    for (const auto& deck : decks)
      for (const auto& slide : deck.slides)
        for (const auto& obj : slide.objects) {
          if (is_text(obj)) {
            const auto& t = as_text(obj);
            if (t.id) add_once(text, *t.id, text_vec(t.text, dim));
            index_text(t.text);
            continue;
          }
          const std::string& id = as_figure(obj).figure_id;
          if (image.contains(id)) continue;
          const auto orbit = parse_orbit(id);
          if (orbit && image.contains(orbit->base))
            image.add(id, at_cosine(image.get(orbit->base), id, seed, orbit->cosine));
          else
            image.add(id, seeded_unit(id, seed, image_dim));
        }

    save_embeddings(text, text_out);
    save_embeddings(image, image_out);
    if (!vocab_out.empty()) {
      const std::vector<std::string> list(words.begin(), words.end());
      save_vocabulary(Vocabulary::from_words(list), vocab_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
