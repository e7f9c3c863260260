#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace deckgen {

// Everything a run needs beyond its input files. Loadable from a JSON file;
// command-line flags override individual fields.
struct RunConfig {
  std::size_t sentence_dim = 0;  // 0: take the text embedding file's width
  std::size_t image_dim = 0;     // 0: take the image embedding file's width
  std::size_t shared_dim = 1024;
  std::size_t pt_hidden = 256;
  std::size_t par_hidden = 512;

  double theta_I = 0.8;
  double theta_R = 0.8;
  double theta_A = 0.9;
  double stem_sim = 0.8;
  double stem_coverage = 0.8;

  std::size_t slides_per_section = 10;
  std::size_t objects_per_slide = 12;
  std::size_t par_max_len = 40;

  std::uint64_t seed = 0;
  double gamma = 1.0;
  std::string template_path;

  void check() const;
};

RunConfig run_config_from_json(const std::string& text, const std::string& where = "config");
RunConfig load_run_config(const std::string& path);

// Full command-line entry point; `args` excludes the program name.
// Returns 0 on success, 1 on an input or usage error, 2 on anything else.
int run_cli(const std::vector<std::string>& args);

}  // namespace deckgen
