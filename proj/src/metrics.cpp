#include "deckgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "deckgen/layout.hpp"
#include "deckgen/textutil.hpp"
#include "json_util.hpp"

namespace deckgen {

namespace {

Prf make_prf(double p, double r) {
  Prf out;
  out.p = p;
  out.r = r;
  out.f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return out;
}

}  // namespace

Prf rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  const double l = static_cast<double>(lcs_len(candidate, reference));
  const double p = candidate.empty() ? 0.0 : l / static_cast<double>(candidate.size());
  const double r = reference.empty() ? 0.0 : l / static_cast<double>(reference.size());
  return make_prf(p, r);
}

std::vector<std::string> deck_tokens(const SlideDeck& deck) {
  std::vector<std::string> tokens;
  for (const auto& slide : deck.slides)
    for (const auto& obj : slide.objects) {
      if (!is_text(obj)) continue;
      for (auto& t : tokenize(as_text(obj).text)) tokens.push_back(std::move(t));
    }
  return tokens;
}

std::vector<std::string> figure_sequence(const SlideDeck& deck) {
  std::vector<std::string> ids;
  for (const auto& slide : deck.slides)
    for (const auto& obj : slide.objects)
      if (is_figure(obj)) ids.push_back(as_figure(obj).figure_id);
  return ids;
}

double rouge_sl(const SlideDeck& pred, const SlideDeck& gt) {
  if (gt.slides.empty()) throw EmptyGroundTruth("reference deck has no slides");
  const double q = static_cast<double>(pred.slides.size());
  const double qr = static_cast<double>(gt.slides.size());
  const double factor = std::exp(-std::abs(q - qr) / qr);
  return rouge_l(deck_tokens(pred), deck_tokens(gt)).f1 * factor;
}

Prf lc_fs(const std::vector<std::string>& pred_figures, const std::vector<std::string>& gt_figures) {
  const double l = static_cast<double>(lcs_len(pred_figures, gt_figures));
  const double p = pred_figures.empty() ? 0.0 : l / static_cast<double>(pred_figures.size());
  const double r = gt_figures.empty() ? 0.0 : l / static_cast<double>(gt_figures.size());
  return make_prf(p, r);
}

namespace {

// Word tokens of the slides showing figure `id`, in deck order.
std::vector<std::string> colocated_tokens(const SlideDeck& deck, const std::string& id) {
  std::vector<std::string> tokens;
  for (const auto& slide : deck.slides) {
    bool shows = false;
    for (const auto& obj : slide.objects)
      if (is_figure(obj) && as_figure(obj).figure_id == id) {
        shows = true;
        break;
      }
    if (!shows) continue;
    for (const auto& obj : slide.objects) {
      if (!is_text(obj)) continue;
      for (auto& t : tokenize(as_text(obj).text)) tokens.push_back(std::move(t));
    }
  }
  return tokens;
}

bool deck_shows(const SlideDeck& deck, const std::string& id) {
  for (const auto& slide : deck.slides)
    for (const auto& obj : slide.objects)
      if (is_figure(obj) && as_figure(obj).figure_id == id) return true;
  return false;
}

}  // namespace

double tfr(const SlideDeck& pred, const SlideDeck& gt, const Document& doc,
           bool literal_denominator) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& fig : doc.figures) {
    const bool in_gt = deck_shows(gt, fig.id);
    if (!literal_denominator && !in_gt) continue;
    ++count;
    if (!in_gt) continue;  // literal mode: absent from the reference scores 0
    const auto ref = colocated_tokens(gt, fig.id);
    const auto cand = colocated_tokens(pred, fig.id);
    if (cand.empty() && ref.empty())
      sum += 1.0;  // nothing to relate on either side
    else
      sum += rouge_l(cand, ref).f1;
  }
  if (count == 0) return 1.0;  // no figures to relate: vacuously perfect
  return sum / static_cast<double>(count);
}

namespace {

std::vector<BBox> slide_boxes(const Slide& slide) {
  std::vector<BBox> boxes;
  for (const auto& obj : slide.objects)
    boxes.push_back(is_text(obj) ? as_text(obj).bbox : as_figure(obj).bbox);
  return boxes;
}

// Best total IoU over injective pairings, small side into large side.
double best_pairing_sum(const std::vector<std::vector<double>>& iou_grid, std::size_t n,
                        std::size_t m) {
  // recursion over rows of the smaller side with a used-column mask
  std::vector<std::size_t> cols(m);
  std::iota(cols.begin(), cols.end(), 0);
  std::vector<bool> used(m, false);
  double best = 0.0;
  auto rec = [&](auto&& self, std::size_t row, double acc) -> void {
    if (row == n) {
      best = std::max(best, acc);
      return;
    }
    // leaving this row unpaired is never better than the best pairing, but
    // pairings are not required to be total; try both
    self(self, row + 1, acc);
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = true;
      self(self, row + 1, acc + iou_grid[row][j]);
      used[j] = false;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

double greedy_pairing_sum(std::vector<std::vector<double>> iou_grid, std::size_t n, std::size_t m) {
  std::vector<bool> row_used(n, false), col_used(m, false);
  double sum = 0.0;
  for (std::size_t step = 0; step < std::min(n, m); ++step) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (row_used[i]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (col_used[j]) continue;
        if (iou_grid[i][j] > best) {
          best = iou_grid[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = true;
    col_used[bj] = true;
    sum += best;
  }
  return sum;
}

}  // namespace

double slide_iou(const std::vector<BBox>& pred, const std::vector<BBox>& gt) {
  if (pred.empty() && gt.empty()) return 1.0;
  if (pred.empty() || gt.empty()) return 0.0;
  const std::size_t n = pred.size(), m = gt.size();
  std::vector<std::vector<double>> grid(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) grid[i][j] = iou(pred[i], gt[j]);
  double sum;
  if (n <= 6 && m <= 6) {
    // orient the recursion over the smaller side
    if (n <= m) {
      sum = best_pairing_sum(grid, n, m);
    } else {
      std::vector<std::vector<double>> t(m, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) t[j][i] = grid[i][j];
      sum = best_pairing_sum(t, m, n);
    }
  } else {
    sum = greedy_pairing_sum(grid, n, m);
  }
  return sum / static_cast<double>(std::max(n, m));
}

double miou(const SlideDeck& pred, const SlideDeck& gt) {
  const std::size_t p = pred.slides.size(), g = gt.slides.size();
  if (p == 0) return 0.0;
  std::vector<std::vector<double>> pair(p, std::vector<double>(g));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < g; ++j)
      pair[i][j] = slide_iou(slide_boxes(pred.slides[i]), slide_boxes(gt.slides[j]));

  // f[i][j]: best matched-IoU total using pred slides i.. and gt slides j..,
  // alignment kept strictly increasing on both sides
  std::vector<std::vector<double>> f(p + 1, std::vector<double>(g + 1, 0.0));
  for (std::size_t i = p; i-- > 0;)
    for (std::size_t j = g; j-- > 0;)
      f[i][j] = std::max({f[i + 1][j], f[i][j + 1], pair[i][j] + f[i + 1][j + 1]});
  return f[0][0] / static_cast<double>(p);
}

std::vector<StructureToken> structure_tokens(const SlideDeck& deck,
                                             const SectionAssignment& assignment) {
  if (assignment.size() != deck.slides.size())
    throw InconsistentReport("assignment covers " + std::to_string(assignment.size()) +
                             " slides, deck has " + std::to_string(deck.slides.size()));
  std::vector<StructureToken> tokens;
  for (std::size_t j = 0; j < deck.slides.size(); ++j) {
    if (j == 0 || assignment[j] != assignment[j - 1]) tokens.push_back(StructureToken::section);
    tokens.push_back(StructureToken::slide);
    for (std::size_t k = 0; k < deck.slides[j].objects.size(); ++k)
      tokens.push_back(StructureToken::object);
  }
  return tokens;
}

double structural_lcs(const std::vector<StructureToken>& pred,
                      const std::vector<StructureToken>& gt) {
  if (pred.empty() || gt.empty()) return 0.0;
  return 2.0 * static_cast<double>(lcs_len(pred, gt)) /
         static_cast<double>(pred.size() + gt.size());
}

MetricReport evaluate_decks(const SlideDeck& pred, const SlideDeck& gt, const Document& doc,
                            const SectionAssignment& pred_assignment,
                            const SectionAssignment& gt_assignment,
                            bool tfr_literal_denominator) {
  MetricReport report;
  report.rouge_l = rouge_l(deck_tokens(pred), deck_tokens(gt));
  report.rouge_sl = rouge_sl(pred, gt);
  report.lc_fs = lc_fs(figure_sequence(pred), figure_sequence(gt));
  report.tfr = tfr(pred, gt, doc, tfr_literal_denominator);
  report.miou = miou(pred, gt);
  report.structural_lcs = structural_lcs(structure_tokens(pred, pred_assignment),
                                         structure_tokens(gt, gt_assignment));
  return report;
}

std::string metric_report_to_json(const MetricReport& report) {
  detail::ojson j;
  j["rouge_l"] = {{"p", report.rouge_l.p}, {"r", report.rouge_l.r}, {"f1", report.rouge_l.f1}};
  j["rouge_sl"] = report.rouge_sl;
  j["lc_fs"] = {{"p", report.lc_fs.p}, {"r", report.lc_fs.r}, {"f1", report.lc_fs.f1}};
  j["tfr"] = report.tfr;
  j["miou"] = report.miou;
  j["structural_lcs"] = report.structural_lcs;
  return j.dump(2) + "\n";
}

}  // namespace deckgen
