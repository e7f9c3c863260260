#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "deckgen/pipeline.hpp"
#include "deckgen/types.hpp"

namespace deckgen {

template <class T>
std::size_t lcs_len(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return 0;
  // rolling one-row DP
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

struct Prf {
  double p = 0.0;
  double r = 0.0;
  double f1 = 0.0;
};

Prf rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

// All word tokens of the deck's text objects, slide by slide. Titles are
// chrome, not content, and stay out.
std::vector<std::string> deck_tokens(const SlideDeck& deck);

// Figure ids in slide-then-object order.
std::vector<std::string> figure_sequence(const SlideDeck& deck);

// Deck-level ROUGE with a slide-count penalty: ROUGE-L f1 of the concatenated
// texts scaled by exp(-|Q - Qr| / Qr), Q and Qr being the predicted and
// reference slide counts.
double rouge_sl(const SlideDeck& pred, const SlideDeck& gt);

Prf lc_fs(const std::vector<std::string>& pred_figures, const std::vector<std::string>& gt_figures);

// Text-figure relevance: for each document figure shown in the reference
// deck, ROUGE-L f1 between the texts co-located with it in both decks,
// averaged. `literal_denominator` averages over every document figure
// instead, scoring figures absent from both decks as 0.
double tfr(const SlideDeck& pred, const SlideDeck& gt, const Document& doc,
           bool literal_denominator = false);

// Best one-to-one box pairing score, normalized by the larger side. Pairings
// are searched exhaustively up to 6 boxes per side, greedily beyond.
double slide_iou(const std::vector<BBox>& pred, const std::vector<BBox>& gt);

// Mean per-slide IoU under the best order-preserving slide alignment,
// normalized by the predicted slide count (0 when there are no predicted
// slides).
double miou(const SlideDeck& pred, const SlideDeck& gt);

enum class StructureToken { section, slide, object };

// Linearizes deck structure: one `section` per contiguous run of slides
// assigned to the same section, then `slide` and per-object `object` tokens.
std::vector<StructureToken> structure_tokens(const SlideDeck& deck,
                                             const SectionAssignment& assignment);

// Dice-normalized LCS over structure tokens: 2*LCS / (|pred| + |gt|).
double structural_lcs(const std::vector<StructureToken>& pred,
                      const std::vector<StructureToken>& gt);

struct MetricReport {
  Prf rouge_l;
  double rouge_sl = 0.0;
  Prf lc_fs;
  double tfr = 0.0;
  double miou = 0.0;
  double structural_lcs = 0.0;
};

MetricReport evaluate_decks(const SlideDeck& pred, const SlideDeck& gt, const Document& doc,
                            const SectionAssignment& pred_assignment,
                            const SectionAssignment& gt_assignment,
                            bool tfr_literal_denominator = false);

std::string metric_report_to_json(const MetricReport& report);

}  // namespace deckgen
