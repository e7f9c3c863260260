#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "deckgen/errors.hpp"
#include "deckgen/sweep.hpp"

namespace deckgen {

std::vector<double> grid_points(const GridAxis& axis) {
  if (axis.lo < 0.0 || axis.lo > 1.0 || axis.hi < 0.0 || axis.hi > 1.0) return {};
  if (axis.step <= 0.0 || axis.lo > axis.hi) return {};
  if (axis.lo < axis.hi && axis.step > axis.hi - axis.lo + 1e-12) return {};
  std::vector<double> pts;
  const auto n = static_cast<std::size_t>((axis.hi - axis.lo) / axis.step + 1e-9);
  for (std::size_t k = 0; k <= n; ++k) pts.push_back(axis.lo + static_cast<double>(k) * axis.step);
  return pts;
}

namespace {

Prf prf_from_counts(double matched, double n_pred, double n_gt) {
  Prf s;
  s.p = n_pred > 0.0 ? matched / n_pred : 0.0;
  s.r = n_gt > 0.0 ? matched / n_gt : 0.0;
  s.f1 = s.p + s.r > 0.0 ? 2.0 * s.p * s.r / (s.p + s.r) : 0.0;
  return s;
}

// Relevance columns reordered from the trace's figure order to the
// document's, so the scores line up with post-processing.
std::vector<std::vector<double>> doc_ordered_scores(const PostSweepCase& c) {
  const std::size_t n_figs = c.doc.figures.size();
  if (c.trace.figure_order.size() != n_figs)
    throw InconsistentReport("trace covers " + std::to_string(c.trace.figure_order.size()) +
                             " figures, document has " + std::to_string(n_figs));
  std::vector<std::size_t> col(n_figs);
  for (std::size_t q = 0; q < n_figs; ++q) {
    const auto& id = c.doc.figures[q].id;
    auto it = std::find(c.trace.figure_order.begin(), c.trace.figure_order.end(), id);
    if (it == c.trace.figure_order.end())
      throw InconsistentReport("trace has no relevance column for figure '" + id + "'");
    col[q] = static_cast<std::size_t>(it - c.trace.figure_order.begin());
  }
  std::vector<std::vector<double>> out;
  out.reserve(c.trace.relevance.size());
  for (const auto& row : c.trace.relevance) {
    std::vector<double> r(n_figs, 0.0);
    for (std::size_t q = 0; q < n_figs; ++q) {
      if (col[q] >= row.size())
        throw InconsistentReport("relevance row narrower than the figure order");
      r[q] = row[col[q]];
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

PostSweepResult sweep_post(const std::vector<PostSweepCase>& cases, const GridAxis& theta_R,
                           const GridAxis& theta_A, const TemplateSpec& spec) {
  const auto r_pts = grid_points(theta_R);
  const auto a_pts = grid_points(theta_A);
  if (r_pts.empty() || a_pts.empty()) throw EmptyGrid("no grid points to sweep");

  std::vector<std::vector<std::vector<double>>> scores;
  scores.reserve(cases.size());
  for (const auto& c : cases) scores.push_back(doc_ordered_scores(c));

  PostSweepResult result;
  for (const double tr : r_pts) {
    for (const double ta : a_pts) {
      double matched = 0.0, n_pred = 0.0, n_gt = 0.0;
      for (std::size_t k = 0; k < cases.size(); ++k) {
        const auto& c = cases[k];
        const SlideDeck deck = post_process(c.deck, c.doc, scores[k], tr, ta, spec);
        const auto pred = figure_sequence(deck);
        matched += static_cast<double>(lcs_len(pred, c.gt_figures));
        n_pred += static_cast<double>(pred.size());
        n_gt += static_cast<double>(c.gt_figures.size());
      }
      result.rows.push_back({tr, ta, prf_from_counts(matched, n_pred, n_gt)});
    }
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i)
    if (result.rows[i].score.f1 > result.rows[result.best].score.f1) result.best = i;
  return result;
}

FigureSweepResult sweep_figure(const std::vector<FigureSweepCase>& cases,
                               const GridAxis& theta_I) {
  const auto pts = grid_points(theta_I);
  if (pts.empty()) throw EmptyGrid("no grid points to sweep");

  FigureSweepResult result;
  for (const double t : pts) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (const auto& c : cases) {
      const bool keep = c.score >= t;
      if (keep && c.is_match) tp += 1.0;
      if (keep && !c.is_match) fp += 1.0;
      if (!keep && c.is_match) fn += 1.0;
    }
    result.rows.push_back({t, prf_from_counts(tp, tp + fp, tp + fn)});
  }
  for (std::size_t i = 1; i < result.rows.size(); ++i)
    if (result.rows[i].score.f1 > result.rows[result.best].score.f1) result.best = i;
  return result;
}

std::string post_sweep_csv(const PostSweepResult& result) {
  std::ostringstream out;
  out << "theta_R,theta_A,precision,recall,f1,best\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    out << csv_num(r.theta_R) << ',' << csv_num(r.theta_A) << ',' << csv_num(r.score.p) << ','
        << csv_num(r.score.r) << ',' << csv_num(r.score.f1) << ',' << (i == result.best ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string figure_sweep_csv(const FigureSweepResult& result) {
  std::ostringstream out;
  out << "theta_I,precision,recall,f1,best\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    out << csv_num(r.theta_I) << ',' << csv_num(r.score.p) << ',' << csv_num(r.score.r) << ','
        << csv_num(r.score.f1) << ',' << (i == result.best ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace deckgen
