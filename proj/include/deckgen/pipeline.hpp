#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "deckgen/io.hpp"
#include "deckgen/types.hpp"

namespace deckgen {

// Slide index -> section index, non-decreasing over the deck.
using SectionAssignment = std::vector<std::size_t>;

struct SentenceMatch {
  std::size_t section = 0;
  std::size_t sentence = 0;
  double score = 0.0;
};

struct FigureMatch {
  std::string figure_id;  // document-side id
  double score = 0.0;
};

using ObjectMatch = std::variant<SentenceMatch, FigureMatch>;

// Slide-to-document correspondences. `slides` is parallel to the deck:
// one entry per slide object, nullopt where no counterpart was found (or
// where the producing pass does not handle that object kind).
struct MatchReport {
  SectionAssignment assignment;
  std::vector<std::vector<std::optional<ObjectMatch>>> slides;
};

enum class SectionAction { new_slide, end_section };
enum class SlideAction { new_object, end_slide };

struct ObjectTarget {
  bool is_figure = false;
  std::size_t selection = 0;  // index into [section sentences..., document figures...]
  BBox bbox;
  std::vector<std::size_t> tokens;  // paraphrase target ids, EOS-terminated; empty for figures
};

struct SlideTarget {
  std::size_t section = 0;
  std::vector<SlideAction> actions;
  std::vector<ObjectTarget> objects;
};

// Teacher-forcing targets: the deck structure re-expressed as the action,
// selection, layout and token sequences the generator is scored against.
struct TrainingTarget {
  std::vector<std::vector<SectionAction>> section_actions;  // one sequence per section
  std::vector<SlideTarget> slides;
};

double cosine(const Vec& u, const Vec& v);

// Fraction of `prev`'s content items that `next` also carries. A sentence
// counts as covered when some sentence of `next` has cosine >= sim_threshold;
// a figure when `next` shows the same figure or a visually similar one.
// An empty slide is vacuously covered.
double slide_coverage(const Slide& prev, const Slide& next, const EmbeddingBundle& emb,
                      double sim_threshold);

// Removes animation-style build-up slides: any slide whose content the
// following slide covers at >= coverage_threshold. Runs to fixpoint.
SlideDeck stem_deck(const SlideDeck& deck, const EmbeddingBundle& emb, double sim_threshold = 0.8,
                    double coverage_threshold = 0.8);

// Best non-decreasing slide-to-section assignment under summed cosine of
// mean text embeddings. Ties resolve toward smaller section indices,
// leftmost slide first.
SectionAssignment match_slides_to_sections(const SlideDeck& deck, const Document& doc,
                                           const EmbeddingStore& text_emb);

// Argmax-cosine document sentence for every slide text object, searched
// within the slide's assigned section only. Figure entries stay empty.
MatchReport match_sentences(const SlideDeck& deck, const Document& doc,
                            const SectionAssignment& assignment, const EmbeddingStore& text_emb);

// Highest-cosine document figure for every deck figure, dropped when the
// best score falls below theta_I. Text entries stay empty.
MatchReport match_figures(const SlideDeck& deck, const Document& doc,
                          const EmbeddingStore& image_emb, double theta_I = 0.8);

// Positional union of a sentence-side and a figure-side report.
MatchReport merge_reports(const MatchReport& sentence_part, const MatchReport& figure_part);

// Re-expresses the matched portion of a ground-truth deck as teacher-forcing
// sequences. Unmatched objects are dropped; text targets are tokenized and
// mapped through `vocab`.
TrainingTarget build_targets(const Document& doc, const SlideDeck& gt_deck,
                             const MatchReport& report, const Vocabulary& vocab);

// JSON round-trips for the two report types.
std::string report_to_json(const MatchReport& report);
MatchReport report_from_json(const std::string& text, const std::string& where = "match report");
void save_report(const MatchReport& report, const std::string& path);
MatchReport load_report(const std::string& path);

std::string target_to_json(const TrainingTarget& target);
TrainingTarget target_from_json(const std::string& text, const std::string& where = "target");
void save_target(const TrainingTarget& target, const std::string& path);
TrainingTarget load_target(const std::string& path);

}  // namespace deckgen
