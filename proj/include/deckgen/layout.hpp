#pragma once

#include <string>
#include <vector>

#include "deckgen/types.hpp"

namespace deckgen {

// Reference slide geometry for text measurement: normalized coordinates map
// onto a 960 x 540 pt canvas.
inline constexpr double kSlideWidthPt = 960.0;
inline constexpr double kSlideHeightPt = 540.0;

// Region plan for rule-based slide assembly. Coordinates are normalized;
// the three regions must not overlap.
struct TemplateSpec {
  BBox title{0.05, 0.03, 0.90, 0.12};
  BBox body{0.05, 0.18, 0.90, 0.50};
  BBox figure_strip{0.05, 0.68, 0.90, 0.29};
  double line_height = 0.07;
  double margin = 0.01;

  std::size_t max_body_lines() const;
  void check() const;
};

std::string template_to_json(const TemplateSpec& spec);
TemplateSpec template_from_json(const std::string& text, const std::string& where = "template");
TemplateSpec load_template(const std::string& path);
void save_template(const TemplateSpec& spec, const std::string& path);

double iou(const BBox& a, const BBox& b);

// Largest box of the given width/height ratio inside `slot`, centered on
// both axes. Ratios live in normalized units, same as the boxes.
BBox fit_figure(const BBox& slot, double aspect_ratio);

// Greedy word wrap at a fixed per-line character budget. Words longer than
// the budget are hard-broken. max_chars must be positive.
std::vector<std::string> wrap_text(const std::string& text, std::size_t max_chars);

// Largest integer font size in [min_pt, max_pt] at which `text`, word-wrapped
// greedily, fits `slot`. Glyphs are modeled as char_aspect * size wide with
// lines 1.2 * size tall on the 960 x 540 pt canvas.
int fit_text(const BBox& slot, const std::string& text, double char_aspect = 0.5, int max_pt = 32,
             int min_pt = 8);

struct TemplateItem {
  enum class Kind { text, figure };
  Kind kind = Kind::text;
  std::string text;     // Kind::text
  double aspect = 1.0;  // Kind::figure

  static TemplateItem make_text(std::string t) {
    TemplateItem i;
    i.kind = Kind::text;
    i.text = std::move(t);
    return i;
  }
  static TemplateItem make_figure(double aspect) {
    TemplateItem i;
    i.kind = Kind::figure;
    i.aspect = aspect;
    return i;
  }
};

// Assigns boxes per the template: the title box first, then one box per item
// in input order. Text items take successive body lines; figures share the
// space under the last text line in equal-width columns.
std::vector<BBox> template_layout(const std::string& title, const std::vector<TemplateItem>& items,
                                  const TemplateSpec& spec = {});

}  // namespace deckgen
