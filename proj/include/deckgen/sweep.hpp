#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "deckgen/metrics.hpp"
#include "deckgen/model.hpp"

namespace deckgen {

// Inclusive lo..hi enumeration by step. An axis with inverted bounds, a
// stride wider than the span, an out-of-range bound or a non-positive step
// produces no points.
struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.1;
};

std::vector<double> grid_points(const GridAxis& axis);

// One validation pair for threshold tuning: the generator's deck before any
// thresholding, its trace (relevance scores), and the reference figures.
struct PostSweepCase {
  Document doc;
  SlideDeck deck;
  GenerationTrace trace;
  std::vector<std::string> gt_figures;
};

struct PostSweepRow {
  double theta_R = 0.0;
  double theta_A = 0.0;
  Prf score;
};

struct PostSweepResult {
  std::vector<PostSweepRow> rows;
  std::size_t best = 0;  // row index; ties go to the smaller thresholds
};

// Re-runs figure removal/addition at every (theta_R, theta_A) grid point and
// scores the figure sequences against the references, micro-averaged.
PostSweepResult sweep_post(const std::vector<PostSweepCase>& cases, const GridAxis& theta_R,
                           const GridAxis& theta_A, const TemplateSpec& spec = {});

// One labeled candidate for figure-matching tuning: its best similarity to
// any document figure, and whether that link is a true match.
struct FigureSweepCase {
  double score = 0.0;
  bool is_match = false;
};

struct FigureSweepRow {
  double theta_I = 0.0;
  Prf score;
};

struct FigureSweepResult {
  std::vector<FigureSweepRow> rows;
  std::size_t best = 0;
};

// Precision/recall/F1 of keep-iff-score-at-least-theta over the labeled
// candidates, one row per grid point.
FigureSweepResult sweep_figure(const std::vector<FigureSweepCase>& cases, const GridAxis& theta_I);

// CSV with a header row; the winning row carries best=1.
std::string post_sweep_csv(const PostSweepResult& result);
std::string figure_sweep_csv(const FigureSweepResult& result);

}  // namespace deckgen
