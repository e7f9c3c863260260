#include "deckgen/layout.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace deckgen {

namespace {

double overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

double intersection_area(const BBox& a, const BBox& b) {
  return overlap_1d(a.x, a.right(), b.x, b.right()) *
         overlap_1d(a.y, a.bottom(), b.y, b.bottom());
}

}  // namespace

std::size_t TemplateSpec::max_body_lines() const {
  return static_cast<std::size_t>((body.h + 1e-9) / line_height);
}

void TemplateSpec::check() const {
  if (!bbox_valid(title)) throw SchemaViolation("template: invalid title box");
  if (!bbox_valid(body)) throw SchemaViolation("template: invalid body box");
  if (!bbox_valid(figure_strip)) throw SchemaViolation("template: invalid figure strip box");
  if (intersection_area(title, body) > 0.0 || intersection_area(title, figure_strip) > 0.0 ||
      intersection_area(body, figure_strip) > 0.0)
    throw SchemaViolation("template: regions overlap");
  if (!(line_height > 0.0) || line_height > body.h)
    throw SchemaViolation("template: line height must be in (0, body height]");
  if (!(margin >= 0.0) || !std::isfinite(margin))
    throw SchemaViolation("template: margin must be non-negative");
}

std::string template_to_json(const TemplateSpec& spec) {
  detail::ojson j;
  j["title"] = detail::bbox_to_json(spec.title);
  j["body"] = detail::bbox_to_json(spec.body);
  j["figure_strip"] = detail::bbox_to_json(spec.figure_strip);
  j["line_height"] = spec.line_height;
  j["margin"] = spec.margin;
  return j.dump(2) + "\n";
}

TemplateSpec template_from_json(const std::string& text, const std::string& where) {
  const auto j = detail::parse_text(text, where);
  TemplateSpec spec;
  spec.title = detail::parse_bbox(detail::require(j, "title", where), where + ".title");
  spec.body = detail::parse_bbox(detail::require(j, "body", where), where + ".body");
  spec.figure_strip =
      detail::parse_bbox(detail::require(j, "figure_strip", where), where + ".figure_strip");
  spec.line_height = detail::require_number(j, "line_height", where);
  spec.margin = detail::require_number(j, "margin", where);
  spec.check();
  return spec;
}

TemplateSpec load_template(const std::string& path) {
  return template_from_json(detail::slurp_file(path), "'" + path + "'");
}

void save_template(const TemplateSpec& spec, const std::string& path) {
  detail::write_text_file(path, template_to_json(spec));
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

BBox fit_figure(const BBox& slot, double aspect_ratio) {
  if (!(aspect_ratio > 0.0) || !std::isfinite(aspect_ratio))
    throw EmptyInput("fit_figure: aspect ratio must be positive");
  double w = std::min(slot.w, aspect_ratio * slot.h);
  double h = w / aspect_ratio;
  return BBox{slot.x + (slot.w - w) / 2.0, slot.y + (slot.h - h) / 2.0, w, h};
}

std::vector<std::string> wrap_text(const std::string& text, std::size_t max_chars) {
  if (max_chars == 0) throw EmptyInput("wrap_text: zero character budget");
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) words.push_back(std::exchange(cur, {}));
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(cur);

  std::vector<std::string> lines;
  std::string line;
  auto flush = [&] {
    if (!line.empty()) lines.push_back(std::exchange(line, {}));
  };
  for (std::string word : words) {
    while (word.size() > max_chars) {  // hard-break anything over-long
      flush();
      lines.push_back(word.substr(0, max_chars));
      word = word.substr(max_chars);
    }
    if (word.empty()) continue;
    if (line.empty()) {
      line = word;
    } else if (line.size() + 1 + word.size() <= max_chars) {
      line += ' ';
      line += word;
    } else {
      flush();
      line = word;
    }
  }
  flush();
  return lines;
}

int fit_text(const BBox& slot, const std::string& text, double char_aspect, int max_pt,
             int min_pt) {
  if (text.empty()) throw EmptyInput("fit_text: empty text");
  if (min_pt < 1 || max_pt < min_pt) throw EmptyInput("fit_text: bad size range");
  const double slot_w_pt = slot.w * kSlideWidthPt;
  const double slot_h_pt = slot.h * kSlideHeightPt;
  for (int size = max_pt; size >= min_pt; --size) {
    const auto budget = static_cast<std::size_t>(slot_w_pt / (char_aspect * size));
    if (budget == 0) continue;
    const std::size_t lines = wrap_text(text, budget).size();
    if (static_cast<double>(lines) * 1.2 * size <= slot_h_pt) return size;
  }
  throw DoesNotFit("text needs less than " + std::to_string(min_pt) + " pt in a " +
                   std::to_string(slot_w_pt) + " x " + std::to_string(slot_h_pt) + " pt slot");
}

std::vector<BBox> template_layout(const std::string& title, const std::vector<TemplateItem>& items,
                                  const TemplateSpec& spec) {
  (void)title;  // the title's box is fixed by the template
  spec.check();

  std::size_t n_text = 0, n_fig = 0;
  for (const auto& item : items)
    (item.kind == TemplateItem::Kind::text ? n_text : n_fig)++;
  if (n_text > spec.max_body_lines())
    throw Overflow("layout holds " + std::to_string(spec.max_body_lines()) +
                   " text lines, got " + std::to_string(n_text));

  // Figures live between the last occupied text line and the strip bottom.
  const double fig_top = spec.body.y + static_cast<double>(n_text) * spec.line_height;
  const double fig_bottom = spec.figure_strip.bottom();
  BBox strip{};
  if (n_fig > 0) {
    const double h = fig_bottom - fig_top - spec.margin;
    const double total_w =
        spec.figure_strip.w - spec.margin * static_cast<double>(n_fig - 1);
    if (h <= 0.0 || total_w <= 0.0)
      throw Overflow("no room for " + std::to_string(n_fig) + " figures below the text");
    strip = BBox{spec.figure_strip.x, fig_top + spec.margin, total_w / static_cast<double>(n_fig),
                 h};
  }

  std::vector<BBox> boxes;
  boxes.push_back(spec.title);
  std::size_t text_i = 0, fig_i = 0;
  for (const auto& item : items) {
    if (item.kind == TemplateItem::Kind::text) {
      boxes.push_back(BBox{spec.body.x, spec.body.y + static_cast<double>(text_i) * spec.line_height,
                           spec.body.w, spec.line_height});
      ++text_i;
    } else {
      BBox column = strip;
      column.x += static_cast<double>(fig_i) * (strip.w + spec.margin);
      boxes.push_back(fit_figure(column, item.aspect));
      ++fig_i;
    }
  }
  return boxes;
}

}  // namespace deckgen
