#include "deckgen/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace deckgen {

bool bbox_valid(const BBox& b) {
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) || !std::isfinite(b.h))
    return false;
  if (b.x < 0.0 || b.y < 0.0) return false;
  if (b.w <= 0.0 || b.h <= 0.0) return false;
  if (b.x + b.w > 1.0 || b.y + b.h > 1.0) return false;
  return true;
}

bool BBox::valid() const { return bbox_valid(*this); }

std::vector<const TextObject*> Slide::text_objects() const {
  std::vector<const TextObject*> out;
  for (const auto& o : objects)
    if (is_text(o)) out.push_back(&as_text(o));
  return out;
}

std::vector<const FigureObject*> Slide::figure_objects() const {
  std::vector<const FigureObject*> out;
  for (const auto& o : objects)
    if (is_figure(o)) out.push_back(&as_figure(o));
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 4)
    throw SchemaViolation("vocabulary must contain the four reserved tokens");
  const char* reserved[4] = {pad_token(), bos_token(), eos_token(), unk_token()};
  for (std::size_t i = 0; i < 4; ++i) {
    if (tokens_[i] != reserved[i])
      throw SchemaViolation("vocabulary: expected reserved token '" + std::string(reserved[i]) +
                            "' at index " + std::to_string(i) + ", found '" + tokens_[i] + "'");
  }
  std::unordered_set<std::string> seen;
  for (const auto& t : tokens_) {
    if (!seen.insert(t).second)
      throw SchemaViolation("vocabulary: duplicate token '" + t + "'");
  }
  sorted_index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) sorted_index_.emplace_back(tokens_[i], i);
  std::sort(sorted_index_.begin(), sorted_index_.end());
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  std::vector<std::string> all = {pad_token(), bos_token(), eos_token(), unk_token()};
  all.insert(all.end(), words.begin(), words.end());
  return Vocabulary(std::move(all));
}

std::size_t Vocabulary::id_of(const std::string& token) const {
  auto it = std::lower_bound(sorted_index_.begin(), sorted_index_.end(),
                             std::make_pair(token, std::size_t{0}));
  if (it != sorted_index_.end() && it->first == token) return it->second;
  return kUnk;
}

bool Vocabulary::contains(const std::string& token) const {
  auto it = std::lower_bound(sorted_index_.begin(), sorted_index_.end(),
                             std::make_pair(token, std::size_t{0}));
  return it != sorted_index_.end() && it->first == token;
}

void validate_document(const Document& doc) {
  if (doc.sections.empty()) throw EmptyDocument("document '" + doc.id + "' has zero sections");
  std::unordered_set<std::string> ids;
  for (std::size_t si = 0; si < doc.sections.size(); ++si) {
    const auto& sec = doc.sections[si];
    if (sec.sentences.empty())
      throw SchemaViolation("section " + std::to_string(si) + " ('" + sec.title +
                            "') has no sentences");
    for (const auto& s : sec.sentences) {
      if (s.id.empty()) throw SchemaViolation("sentence with empty id in section " + std::to_string(si));
      if (!ids.insert(s.id).second) throw SchemaViolation("duplicate sentence id '" + s.id + "'");
    }
  }
  for (const auto& f : doc.figures) {
    if (f.id.empty()) throw SchemaViolation("figure with empty id");
    if (!ids.insert(f.id).second) throw SchemaViolation("duplicate figure id '" + f.id + "'");
    if (!(f.aspect_ratio > 0.0) || !std::isfinite(f.aspect_ratio))
      throw SchemaViolation("figure '" + f.id + "': aspect_ratio must be a positive real");
  }
}

void validate_deck(const SlideDeck& deck) {
  for (std::size_t i = 0; i < deck.slides.size(); ++i) {
    const auto& slide = deck.slides[i];
    for (std::size_t k = 0; k < slide.objects.size(); ++k) {
      const BBox& b = is_text(slide.objects[k]) ? as_text(slide.objects[k]).bbox
                                                : as_figure(slide.objects[k]).bbox;
      if (!bbox_valid(b))
        throw SchemaViolation("slide " + std::to_string(i) + " object " + std::to_string(k) +
                              ": invalid bbox");
      if (is_figure(slide.objects[k]) && as_figure(slide.objects[k]).figure_id.empty())
        throw SchemaViolation("slide " + std::to_string(i) + " object " + std::to_string(k) +
                              ": empty figure_id");
    }
  }
}

}  // namespace deckgen
