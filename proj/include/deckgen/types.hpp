#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deckgen/errors.hpp"

namespace deckgen {

/// Normalized bounding box, top-left origin, all coordinates in [0,1].
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }

  bool valid() const;
};

/// Checks BBox invariants: 0 <= x,y; w,h > 0; x+w <= 1; y+h <= 1; finite.
bool bbox_valid(const BBox& b);

struct Sentence {
  std::string id;
  std::string text;
};

struct Section {
  std::string title;
  std::vector<Sentence> sentences;
};

/// A document figure: image content is represented only by its aspect ratio
/// (width / height); pixel data never enters the library.
struct FigureRef {
  std::string id;
  std::string caption;
  double aspect_ratio = 1.0;
};

struct Document {
  std::string id;
  std::vector<Section> sections;
  std::vector<FigureRef> figures;

  std::size_t section_count() const { return sections.size(); }
  std::size_t figure_count() const { return figures.size(); }
};

/// A text object on a slide. `id` is optional: ground-truth decks carry ids
/// for embedding lookup, generated decks omit them.
struct TextObject {
  std::optional<std::string> id;
  std::string text;
  BBox bbox;
};

struct FigureObject {
  std::string figure_id;
  BBox bbox;
};

using SlideObject = std::variant<TextObject, FigureObject>;

inline bool is_text(const SlideObject& o) { return std::holds_alternative<TextObject>(o); }
inline bool is_figure(const SlideObject& o) { return std::holds_alternative<FigureObject>(o); }
inline const TextObject& as_text(const SlideObject& o) { return std::get<TextObject>(o); }
inline const FigureObject& as_figure(const SlideObject& o) { return std::get<FigureObject>(o); }

struct Slide {
  std::optional<std::string> title;
  std::vector<SlideObject> objects;

  std::vector<const TextObject*> text_objects() const;
  std::vector<const FigureObject*> figure_objects() const;
};

struct SlideDeck {
  std::string id;
  std::vector<Slide> slides;

  std::size_t slide_count() const { return slides.size(); }
};

/// Token list with reserved control slots at fixed indices.
class Vocabulary {
public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kUnk = 3;

  static const char* pad_token() { return "<pad>"; }
  static const char* bos_token() { return "<bos>"; }
  static const char* eos_token() { return "<eos>"; }
  static const char* unk_token() { return "<unk>"; }

  Vocabulary() = default;

  /// Builds a vocabulary from an ordered token list. The list must start
  /// with the four reserved tokens and contain no duplicates.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Convenience constructor: prepends the reserved tokens to `words`
  /// (duplicates of reserved tokens in `words` are rejected).
  static Vocabulary from_words(const std::vector<std::string>& words);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Token id, or kUnk when out of vocabulary.
  std::size_t id_of(const std::string& token) const;
  bool contains(const std::string& token) const;

private:
  std::vector<std::string> tokens_;
  // index built lazily at construction
  std::vector<std::pair<std::string, std::size_t>> sorted_index_;
};

// Validation helpers used by loaders; they throw on violation.
void validate_document(const Document& doc);
void validate_deck(const SlideDeck& deck);

}  // namespace deckgen
