#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "deckgen/errors.hpp"
#include "deckgen/render.hpp"
#include "json_util.hpp"

namespace deckgen {

namespace {

constexpr double kCharAspect = 0.5;
constexpr int kMaxPt = 32;
constexpr int kMinPt = 8;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Wrapped lines at the size fit_text picked; if even the floor size loses
// lines, the tail gets an ellipsis.
void draw_text_box(std::ostringstream& svg, const BBox& box, const std::string& text,
                   const char* fill) {
  if (text.empty()) return;
  int size = kMinPt;
  bool clipped = false;
  try {
    size = fit_text(box, text, kCharAspect, kMaxPt, kMinPt);
  } catch (const DoesNotFit&) {
    clipped = true;
  }
  const double x = box.x * kSlideWidthPt;
  const double y = box.y * kSlideHeightPt;
  const double w = box.w * kSlideWidthPt;
  const double h = box.h * kSlideHeightPt;
  const auto budget = static_cast<std::size_t>(std::max(1.0, w / (kCharAspect * size)));
  auto lines = wrap_text(text, budget);
  const auto capacity =
      std::max<std::size_t>(1, static_cast<std::size_t>(h / (1.2 * size)));
  if (clipped && lines.size() > capacity) {
    lines.resize(capacity);
    lines.back() += "…";
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const double baseline = y + (static_cast<double>(i) * 1.2 + 1.0) * size;
    svg << "  <text x=\"" << fmt(x) << "\" y=\"" << fmt(baseline) << "\" font-family=\"monospace\""
        << " font-size=\"" << size << "\" fill=\"" << fill << "\">" << escape_xml(lines[i])
        << "</text>\n";
  }
}

std::string resolve_image(const std::string& image_dir, const std::string& id) {
  if (image_dir.empty()) return "";
  namespace fs = std::filesystem;
  const char* exts[] = {"", ".png", ".jpg", ".jpeg", ".svg"};
  for (const char* ext : exts) {
    fs::path p = fs::path(image_dir) / (id + ext);
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return p.string();
  }
  return "";
}

void draw_figure(std::ostringstream& svg, const FigureObject& fig, const std::string& image_dir) {
  const double x = fig.bbox.x * kSlideWidthPt;
  const double y = fig.bbox.y * kSlideHeightPt;
  const double w = fig.bbox.w * kSlideWidthPt;
  const double h = fig.bbox.h * kSlideHeightPt;
  const std::string path = resolve_image(image_dir, fig.figure_id);
  if (!path.empty()) {
    svg << "  <image x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(h) << "\" preserveAspectRatio=\"xMidYMid meet\" xlink:href=\""
        << escape_xml(path) << "\"/>\n";
    return;
  }
  svg << "  <rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
      << "\" height=\"" << fmt(h) << "\" fill=\"#d8d8d8\" stroke=\"#888888\"/>\n";
  const double label = std::min(12.0, h * 0.5);
  svg << "  <text x=\"" << fmt(x + w / 2) << "\" y=\"" << fmt(y + h / 2)
      << "\" font-family=\"monospace\" font-size=\"" << fmt(label)
      << "\" fill=\"#444444\" text-anchor=\"middle\" dominant-baseline=\"middle\">"
      << escape_xml(fig.figure_id) << "</text>\n";
}

}  // namespace

std::string render_slide(const Slide& slide, const TemplateSpec& spec,
                         const std::string& image_dir) {
  spec.check();
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\""
      << " version=\"1.1\" width=\"1280\" height=\"720\" viewBox=\"0 0 960 540\">\n"
      << "  <rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"#ffffff\"/>\n";
  if (slide.title) draw_text_box(svg, spec.title, *slide.title, "#111111");
  for (const auto& obj : slide.objects) {
    if (const auto* t = std::get_if<TextObject>(&obj))
      draw_text_box(svg, t->bbox, t->text, "#222222");
    else
      draw_figure(svg, std::get<FigureObject>(obj), image_dir);
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> render_deck(const SlideDeck& deck, const TemplateSpec& spec,
                                     const std::string& out_dir, const std::string& image_dir) {
  validate_deck(deck);
  spec.check();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw WriteFailure("cannot create '" + out_dir + "': " + ec.message());

  std::vector<std::string> paths;
  for (std::size_t j = 0; j < deck.slides.size(); ++j) {
    char name[32];
    std::snprintf(name, sizeof name, "slide_%03zu.svg", j);
    const std::string path = (fs::path(out_dir) / name).string();
    detail::write_text_file(path, render_slide(deck.slides[j], spec, image_dir));
    paths.push_back(path);
  }
  return paths;
}

}  // namespace deckgen
