#pragma once

#include <string>
#include <vector>

#include "deckgen/layout.hpp"
#include "deckgen/types.hpp"

namespace deckgen {

// One slide as a standalone SVG document, 960 x 540 user units shown in a
// 1280 x 720 viewport. Figures resolve against `image_dir` (id, then id plus
// a common raster extension); unresolved ids draw as labeled placeholders.
std::string render_slide(const Slide& slide, const TemplateSpec& spec,
                         const std::string& image_dir = "");

// Writes slide_000.svg, slide_001.svg, ... into out_dir and returns the
// paths in slide order. An empty deck writes nothing.
std::vector<std::string> render_deck(const SlideDeck& deck, const TemplateSpec& spec,
                                     const std::string& out_dir, const std::string& image_dir = "");

}  // namespace deckgen
