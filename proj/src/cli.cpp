#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "deckgen/cli.hpp"
#include "deckgen/io.hpp"
#include "deckgen/metrics.hpp"
#include "deckgen/model.hpp"
#include "deckgen/pipeline.hpp"
#include "deckgen/render.hpp"
#include "deckgen/sweep.hpp"
#include "json_util.hpp"

namespace fs = std::filesystem;

namespace deckgen {

void RunConfig::check() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(theta_I) || !in_unit(theta_R) || !in_unit(theta_A) || !in_unit(stem_sim) ||
      !in_unit(stem_coverage))
    throw SchemaViolation("config: thresholds must lie in [0, 1]");
  if (shared_dim < 1 || pt_hidden < 1 || par_hidden < 1)
    throw SchemaViolation("config: model dimensions must be at least 1");
  if (slides_per_section < 1 || objects_per_slide < 1 || par_max_len < 1)
    throw SchemaViolation("config: budgets must be at least 1");
  if (!std::isfinite(gamma) || gamma < 0.0)
    throw SchemaViolation("config: gamma must be finite and non-negative");
}

namespace {

using detail::parse_text;

void opt_index(const detail::json& j, const char* field, std::size_t& out,
               const std::string& where) {
  if (!j.contains(field)) return;
  const auto& v = j.at(field);
  if (!v.is_number_unsigned())
    throw SchemaViolation(where + ": field '" + field + "' must be a non-negative integer");
  out = v.get<std::size_t>();
}

void opt_number(const detail::json& j, const char* field, double& out, const std::string& where) {
  if (!j.contains(field)) return;
  const auto& v = j.at(field);
  if (!v.is_number()) throw SchemaViolation(where + ": field '" + field + "' must be a number");
  out = v.get<double>();
}

void reject_unknown(const detail::json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end())
      throw SchemaViolation(where + ": unknown field '" + key + "'");
  }
}

}  // namespace

RunConfig run_config_from_json(const std::string& text, const std::string& where) {
  const auto j = parse_text(text, where);
  if (!j.is_object()) throw SchemaViolation(where + ": config must be an object");
  reject_unknown(j, {"dims", "thresholds", "budgets", "seed", "gamma", "template"}, where);
  RunConfig rc;
  if (j.contains("dims")) {
    const auto& d = j.at("dims");
    if (!d.is_object()) throw SchemaViolation(where + ": 'dims' must be an object");
    reject_unknown(d, {"sentence_dim", "image_dim", "shared_dim", "pt_hidden", "par_hidden"},
                   where + ".dims");
    opt_index(d, "sentence_dim", rc.sentence_dim, where);
    opt_index(d, "image_dim", rc.image_dim, where);
    opt_index(d, "shared_dim", rc.shared_dim, where);
    opt_index(d, "pt_hidden", rc.pt_hidden, where);
    opt_index(d, "par_hidden", rc.par_hidden, where);
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    if (!t.is_object()) throw SchemaViolation(where + ": 'thresholds' must be an object");
    reject_unknown(t, {"theta_I", "theta_R", "theta_A", "stem_sim", "stem_coverage"},
                   where + ".thresholds");
    opt_number(t, "theta_I", rc.theta_I, where);
    opt_number(t, "theta_R", rc.theta_R, where);
    opt_number(t, "theta_A", rc.theta_A, where);
    opt_number(t, "stem_sim", rc.stem_sim, where);
    opt_number(t, "stem_coverage", rc.stem_coverage, where);
  }
  if (j.contains("budgets")) {
    const auto& b = j.at("budgets");
    if (!b.is_object()) throw SchemaViolation(where + ": 'budgets' must be an object");
    reject_unknown(b, {"slides_per_section", "objects_per_slide", "par_max_len"},
                   where + ".budgets");
    opt_index(b, "slides_per_section", rc.slides_per_section, where);
    opt_index(b, "objects_per_slide", rc.objects_per_slide, where);
    opt_index(b, "par_max_len", rc.par_max_len, where);
  }
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned())
      throw SchemaViolation(where + ": field 'seed' must be a non-negative integer");
    rc.seed = s.get<std::uint64_t>();
  }
  opt_number(j, "gamma", rc.gamma, where);
  if (j.contains("template")) {
    const auto& t = j.at("template");
    if (!t.is_string()) throw SchemaViolation(where + ": field 'template' must be a string");
    rc.template_path = t.get<std::string>();
  }
  rc.check();
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(detail::slurp_file(path), "'" + path + "'");
}

namespace {

// ---- shared flag plumbing --------------------------------------------------

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> template_path;
  std::optional<double> theta_I, theta_R, theta_A, stem_sim, stem_coverage, gamma;
  std::optional<std::size_t> slides, objects, par_len;
  std::optional<std::uint64_t> seed;
};

void add_config_flag(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
}

RunConfig resolve(const Overrides& ov) {
  RunConfig rc = ov.config_path ? load_run_config(*ov.config_path) : RunConfig{};
  if (ov.template_path) rc.template_path = *ov.template_path;
  if (ov.theta_I) rc.theta_I = *ov.theta_I;
  if (ov.theta_R) rc.theta_R = *ov.theta_R;
  if (ov.theta_A) rc.theta_A = *ov.theta_A;
  if (ov.stem_sim) rc.stem_sim = *ov.stem_sim;
  if (ov.stem_coverage) rc.stem_coverage = *ov.stem_coverage;
  if (ov.gamma) rc.gamma = *ov.gamma;
  if (ov.slides) rc.slides_per_section = *ov.slides;
  if (ov.objects) rc.objects_per_slide = *ov.objects;
  if (ov.par_len) rc.par_max_len = *ov.par_len;
  if (ov.seed) rc.seed = *ov.seed;
  rc.check();
  return rc;
}

TemplateSpec template_for(const RunConfig& rc) {
  if (rc.template_path.empty()) return TemplateSpec{};
  return load_template(rc.template_path);
}

GenerationConfig generation_config(const RunConfig& rc) {
  GenerationConfig gc;
  gc.max_slides_per_section = rc.slides_per_section;
  gc.max_objects_per_slide = rc.objects_per_slide;
  gc.par_max_len = rc.par_max_len;
  gc.theta_R = rc.theta_R;
  gc.theta_A = rc.theta_A;
  gc.gamma = rc.gamma;
  gc.template_spec = template_for(rc);
  return gc;
}

ModelConfig model_config(const RunConfig& rc, std::size_t vocab_size, std::size_t text_dim,
                         std::size_t image_dim) {
  ModelConfig mc;
  mc.sentence_dim = rc.sentence_dim ? rc.sentence_dim : text_dim;
  mc.image_dim = rc.image_dim ? rc.image_dim : image_dim;
  mc.shared_dim = rc.shared_dim;
  mc.pt_hidden = rc.pt_hidden;
  mc.par_hidden = rc.par_hidden;
  mc.vocab_size = vocab_size;
  mc.check();
  return mc;
}

EmbeddingBundle load_bundle(const std::string& text_path, const std::string& image_path) {
  EmbeddingBundle emb;
  emb.text = load_embeddings(text_path);
  emb.image = load_embeddings(image_path);
  return emb;
}

// ---- corpus discovery ------------------------------------------------------

// `<id><suffix>` files in `dir`, sorted by id.
std::vector<std::pair<std::string, std::string>> dir_entries(const std::string& dir,
                                                             const std::string& suffix) {
  std::vector<std::pair<std::string, std::string>> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix)
      continue;
    out.emplace_back(name.substr(0, name.size() - suffix.size()), e.path().string());
  }
  if (ec) throw MalformedFile("cannot list '" + dir + "': " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::string find_for(const std::string& dir, const std::string& id, const std::string& suffix) {
  const std::string path = (fs::path(dir) / (id + suffix)).string();
  if (!fs::is_regular_file(path))
    throw MalformedFile("no file '" + id + suffix + "' under '" + dir + "'");
  return path;
}

// The id a single input file contributes to output names: the basename with
// its role suffix stripped.
std::string file_id(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  for (const char* suffix : {".doc.json", ".deck.json", ".gt.json", ".json"}) {
    const std::size_t n = std::strlen(suffix);
    if (name.size() > n && name.substr(name.size() - n) == suffix)
      return name.substr(0, name.size() - n);
  }
  return name;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw WriteFailure("cannot create '" + dir + "': " + ec.message());
}

// ---- worker pool -----------------------------------------------------------

void parallel_pairs(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  jobs = std::clamp<std::size_t>(jobs, 1, n);
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::size_t default_jobs() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

// ---- composed pipeline steps -----------------------------------------------

MatchReport full_match(const Document& doc, const SlideDeck& deck, const EmbeddingBundle& emb,
                       double theta_I) {
  const SectionAssignment assignment = match_slides_to_sections(deck, doc, emb.text);
  const MatchReport sentences = match_sentences(deck, doc, assignment, emb.text);
  const MatchReport figures = match_figures(deck, doc, emb.image, theta_I);
  return merge_reports(sentences, figures);
}

// The deck re-keyed onto the document: matched text objects take their
// sentence's id, matched figures the document figure's. Unmatched objects
// keep their deck-local identity.
SlideDeck normalized_gt(const SlideDeck& stemmed, const Document& doc, const MatchReport& report) {
  SlideDeck out = stemmed;
  out.id = doc.id;
  for (std::size_t j = 0; j < out.slides.size(); ++j) {
    auto& objects = out.slides[j].objects;
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const auto& match = report.slides[j][k];
      if (!match) continue;
      if (const auto* sm = std::get_if<SentenceMatch>(&*match))
        std::get<TextObject>(objects[k]).id = doc.sections[sm->section].sentences[sm->sentence].id;
      else
        std::get<FigureObject>(objects[k]).figure_id = std::get<FigureMatch>(*match).figure_id;
    }
  }
  return out;
}

GridAxis parse_grid(const std::string& text, const std::string& flag) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw SchemaViolation(flag + ": '" + s + "' is not a number");
    }
  };
  GridAxis axis;
  if (parts.size() == 1) {
    axis.lo = axis.hi = number(parts[0]);
    axis.step = 1.0;
  } else if (parts.size() == 3) {
    axis.lo = number(parts[0]);
    axis.hi = number(parts[1]);
    axis.step = number(parts[2]);
  } else {
    throw SchemaViolation(flag + ": expected VALUE or LO:HI:STEP, got '" + text + "'");
  }
  return axis;
}

MetricReport mean_report(const std::vector<MetricReport>& reports) {
  MetricReport mean;
  if (reports.empty()) return mean;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    mean.rouge_l.p += r.rouge_l.p / n;
    mean.rouge_l.r += r.rouge_l.r / n;
    mean.rouge_l.f1 += r.rouge_l.f1 / n;
    mean.rouge_sl += r.rouge_sl / n;
    mean.lc_fs.p += r.lc_fs.p / n;
    mean.lc_fs.r += r.lc_fs.r / n;
    mean.lc_fs.f1 += r.lc_fs.f1 / n;
    mean.tfr += r.tfr / n;
    mean.miou += r.miou / n;
    mean.structural_lcs += r.structural_lcs / n;
  }
  return mean;
}

SectionAssignment assignment_or_zeros(const std::optional<std::string>& trace_path,
                                      const std::optional<std::string>& report_path,
                                      std::size_t n_slides) {
  if (trace_path) return load_trace(*trace_path).assignment();
  if (report_path) return load_report(*report_path).assignment;
  return SectionAssignment(n_slides, 0);
}

MetricReport eval_pair(const std::string& pred_path, const std::string& gt_path,
                       const std::string& doc_path, const std::optional<std::string>& trace_path,
                       const std::optional<std::string>& report_path, bool literal_tfr) {
  const SlideDeck pred = load_deck(pred_path);
  const SlideDeck gt = load_deck(gt_path);
  const Document doc = load_document(doc_path);
  const SectionAssignment pa = assignment_or_zeros(trace_path, std::nullopt, pred.slides.size());
  const SectionAssignment ga = assignment_or_zeros(std::nullopt, report_path, gt.slides.size());
  return evaluate_decks(pred, gt, doc, pa, ga, literal_tfr);
}

void emit(const std::string& text, const std::optional<std::string>& out_path) {
  if (out_path)
    detail::write_text_file(*out_path, text);
  else
    std::cout << text;
}

// ---- subcommands -----------------------------------------------------------

void setup_stem(CLI::App& app) {
  auto* sub = app.add_subcommand("stem", "Collapse animation build-up slides");
  auto opts = std::make_shared<Overrides>();
  auto deck_path = std::make_shared<std::string>();
  auto text_emb = std::make_shared<std::string>();
  auto image_emb = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  sub->add_option("--deck", *deck_path, "slide deck JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--text-emb", *text_emb, "text embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--image-emb", *image_emb, "image embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", *out, "stemmed deck destination")->required();
  sub->add_option("--stem-sim", opts->stem_sim, "sentence similarity threshold");
  sub->add_option("--stem-coverage", opts->stem_coverage, "slide coverage threshold");
  add_config_flag(sub, *opts);
  sub->callback([=] {
    const RunConfig rc = resolve(*opts);
    const EmbeddingBundle emb = load_bundle(*text_emb, *image_emb);
    const SlideDeck deck = load_deck(*deck_path);
    save_deck(stem_deck(deck, emb, rc.stem_sim, rc.stem_coverage), *out);
  });
}

void setup_match(CLI::App& app) {
  auto* sub = app.add_subcommand("match", "Align a deck to its document");
  auto opts = std::make_shared<Overrides>();
  auto doc_path = std::make_shared<std::string>();
  auto deck_path = std::make_shared<std::string>();
  auto text_emb = std::make_shared<std::string>();
  auto image_emb = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  sub->add_option("--doc", *doc_path, "document JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--deck", *deck_path, "slide deck JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--text-emb", *text_emb, "text embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--image-emb", *image_emb, "image embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", *out, "match report destination")->required();
  sub->add_option("--theta-i", opts->theta_I, "figure match threshold");
  add_config_flag(sub, *opts);
  sub->callback([=] {
    const RunConfig rc = resolve(*opts);
    const EmbeddingBundle emb = load_bundle(*text_emb, *image_emb);
    const Document doc = load_document(*doc_path);
    const SlideDeck deck = load_deck(*deck_path);
    save_report(full_match(doc, deck, emb, rc.theta_I), *out);
  });
}

void setup_build_dataset(CLI::App& app) {
  auto* sub = app.add_subcommand(
      "build-dataset", "Stem, align and target-encode document/deck pairs");
  auto opts = std::make_shared<Overrides>();
  auto docs = std::make_shared<std::string>();
  auto decks = std::make_shared<std::string>();
  auto text_emb = std::make_shared<std::string>();
  auto image_emb = std::make_shared<std::string>();
  auto vocab_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto jobs = std::make_shared<std::size_t>(default_jobs());
  sub->add_option("--docs", *docs, "document JSON file or directory of <id>.doc.json")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--decks", *decks, "deck JSON file or directory of <id>.deck.json")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--text-emb", *text_emb, "text embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--image-emb", *image_emb, "image embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--vocab", *vocab_path, "vocabulary JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out-dir", *out_dir, "destination directory")->required();
  sub->add_option("--jobs", *jobs, "worker threads");
  sub->add_option("--theta-i", opts->theta_I, "figure match threshold");
  sub->add_option("--stem-sim", opts->stem_sim, "sentence similarity threshold");
  sub->add_option("--stem-coverage", opts->stem_coverage, "slide coverage threshold");
  add_config_flag(sub, *opts);
  sub->callback([=] {
    const RunConfig rc = resolve(*opts);
    const EmbeddingBundle emb = load_bundle(*text_emb, *image_emb);
    const Vocabulary vocab = load_vocabulary(*vocab_path);
    ensure_dir(*out_dir);

    std::vector<std::pair<std::string, std::string>> pairs;  // id -> doc path
    if (fs::is_directory(*docs))
      pairs = dir_entries(*docs, ".doc.json");
    else
      pairs.emplace_back(file_id(*docs), *docs);

    parallel_pairs(pairs.size(), *jobs, [&](std::size_t i) {
      const auto& [id, doc_path] = pairs[i];
      const std::string deck_path =
          fs::is_directory(*decks) ? find_for(*decks, id, ".deck.json") : *decks;
      const Document doc = load_document(doc_path);
      const SlideDeck stemmed =
          stem_deck(load_deck(deck_path), emb, rc.stem_sim, rc.stem_coverage);
      const MatchReport report = full_match(doc, stemmed, emb, rc.theta_I);
      const TrainingTarget target = build_targets(doc, stemmed, report, vocab);
      const fs::path base = fs::path(*out_dir);
      save_deck(normalized_gt(stemmed, doc, report), (base / (id + ".gt.json")).string());
      save_report(report, (base / (id + ".report.json")).string());
      save_target(target, (base / (id + ".target.json")).string());
    });
  });
}

void setup_generate(CLI::App& app) {
  auto* sub = app.add_subcommand("generate", "Decode slide decks from documents");
  auto opts = std::make_shared<Overrides>();
  auto docs = std::make_shared<std::string>();
  auto text_emb = std::make_shared<std::string>();
  auto image_emb = std::make_shared<std::string>();
  auto weights_path = std::make_shared<std::string>();
  auto vocab_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::optional<std::string>>();
  auto trace_out = std::make_shared<std::optional<std::string>>();
  auto out_dir = std::make_shared<std::optional<std::string>>();
  auto jobs = std::make_shared<std::size_t>(default_jobs());
  auto no_post = std::make_shared<bool>(false);
  auto no_mask = std::make_shared<bool>(false);
  auto no_hobj = std::make_shared<bool>(false);
  sub->add_option("--doc", *docs, "document JSON file or directory of <id>.doc.json")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--text-emb", *text_emb, "text embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--image-emb", *image_emb, "image embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--weights", *weights_path, "model weight file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--vocab", *vocab_path, "vocabulary JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", *out, "deck destination (single document)");
  sub->add_option("--trace", *trace_out, "trace destination (single document)");
  sub->add_option("--out-dir", *out_dir, "destination directory (batch)");
  sub->add_option("--jobs", *jobs, "worker threads");
  sub->add_flag("--no-post", *no_post, "skip figure removal/addition");
  sub->add_flag("--no-mask", *no_mask, "allow re-selecting placed objects");
  sub->add_flag("--no-hobj", *no_hobj, "decode paraphrases without the object state");
  sub->add_option("--slides-per-section", opts->slides, "slide budget per section");
  sub->add_option("--objects-per-slide", opts->objects, "object budget per slide");
  sub->add_option("--par-max-len", opts->par_len, "paraphrase token budget");
  sub->add_option("--theta-r", opts->theta_R, "figure removal threshold");
  sub->add_option("--theta-a", opts->theta_A, "figure addition threshold");
  sub->add_option("--template", opts->template_path, "layout template JSON")
      ->check(CLI::ExistingFile);
  add_config_flag(sub, *opts);
  sub->callback([=] {
    const RunConfig rc = resolve(*opts);
    GenerationConfig gc = generation_config(rc);
    gc.run_post_process = !*no_post;
    gc.mask_used = !*no_mask;
    gc.use_hobj = !*no_hobj;
    const EmbeddingBundle emb = load_bundle(*text_emb, *image_emb);
    const Vocabulary vocab = load_vocabulary(*vocab_path);
    const ModelConfig mc = model_config(rc, vocab.size(), emb.text.dim(), emb.image.dim());
    const WeightBundle weights = load_weights(*weights_path, mc);

    if (fs::is_directory(*docs)) {
      if (!*out_dir) throw MalformedFile("--out-dir is required when --doc is a directory");
      ensure_dir(**out_dir);
      const auto pairs = dir_entries(*docs, ".doc.json");
      parallel_pairs(pairs.size(), *jobs, [&](std::size_t i) {
        const auto& [id, doc_path] = pairs[i];
        const GenerationResult res = generate_deck(load_document(doc_path), emb, weights, vocab, gc);
        const fs::path base = fs::path(**out_dir);
        save_deck(res.deck, (base / (id + ".deck.json")).string());
        save_trace(res.trace, (base / (id + ".trace.json")).string());
      });
      return;
    }
    if (!*out) throw MalformedFile("--out is required for a single document");
    const GenerationResult res = generate_deck(load_document(*docs), emb, weights, vocab, gc);
    save_deck(res.deck, **out);
    if (*trace_out) save_trace(res.trace, **trace_out);
  });
}

void setup_eval(CLI::App& app) {
  auto* sub = app.add_subcommand("eval", "Score predicted decks against references");
  auto pred = std::make_shared<std::string>();
  auto gt = std::make_shared<std::string>();
  auto docs = std::make_shared<std::string>();
  auto pred_trace = std::make_shared<std::optional<std::string>>();
  auto gt_report = std::make_shared<std::optional<std::string>>();
  auto out = std::make_shared<std::optional<std::string>>();
  auto out_dir = std::make_shared<std::optional<std::string>>();
  auto jobs = std::make_shared<std::size_t>(default_jobs());
  auto literal_tfr = std::make_shared<bool>(false);
  sub->add_option("--pred", *pred, "predicted deck file or directory of <id>.deck.json")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--gt", *gt, "reference deck file or directory of <id>.gt.json")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--doc", *docs, "document JSON file or directory of <id>.doc.json")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--pred-trace", *pred_trace,
                  "generation trace file or directory of <id>.trace.json");
  sub->add_option("--gt-report", *gt_report,
                  "match report file or directory of <id>.report.json");
  sub->add_option("--out", *out, "metric report destination (single pair)");
  sub->add_option("--out-dir", *out_dir, "destination directory (batch)");
  sub->add_option("--jobs", *jobs, "worker threads");
  sub->add_flag("--literal-tfr", *literal_tfr, "average figure relevance over every document figure");
  sub->callback([=] {
    if (fs::is_directory(*pred)) {
      if (!*out_dir) throw MalformedFile("--out-dir is required when --pred is a directory");
      ensure_dir(**out_dir);
      const auto pairs = dir_entries(*pred, ".deck.json");
      std::vector<MetricReport> reports(pairs.size());
      parallel_pairs(pairs.size(), *jobs, [&](std::size_t i) {
        const auto& [id, pred_path] = pairs[i];
        std::optional<std::string> trace_path, report_path;
        if (*pred_trace) trace_path = find_for(**pred_trace, id, ".trace.json");
        if (*gt_report) report_path = find_for(**gt_report, id, ".report.json");
        reports[i] = eval_pair(pred_path, find_for(*gt, id, ".gt.json"),
                               find_for(*docs, id, ".doc.json"), trace_path, report_path,
                               *literal_tfr);
        detail::write_text_file((fs::path(**out_dir) / (id + ".metrics.json")).string(),
                                metric_report_to_json(reports[i]));
      });
      detail::write_text_file((fs::path(**out_dir) / "mean.json").string(),
                              metric_report_to_json(mean_report(reports)));
      return;
    }
    const MetricReport report =
        eval_pair(*pred, *gt, *docs, *pred_trace, *gt_report, *literal_tfr);
    emit(metric_report_to_json(report), *out);
  });
}

void setup_loss(CLI::App& app) {
  auto* sub = app.add_subcommand("loss", "Teacher-forced loss along a target trajectory");
  auto opts = std::make_shared<Overrides>();
  auto doc_path = std::make_shared<std::string>();
  auto target_path = std::make_shared<std::string>();
  auto text_emb = std::make_shared<std::string>();
  auto image_emb = std::make_shared<std::string>();
  auto weights_path = std::make_shared<std::string>();
  auto vocab_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::optional<std::string>>();
  sub->add_option("--doc", *doc_path, "document JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--target", *target_path, "training target JSON")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--text-emb", *text_emb, "text embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--image-emb", *image_emb, "image embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--weights", *weights_path, "model weight file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--vocab", *vocab_path, "vocabulary JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", *out, "loss report destination");
  sub->add_option("--seed", opts->seed, "negative sampling seed");
  sub->add_option("--gamma", opts->gamma, "content loss weight");
  add_config_flag(sub, *opts);
  sub->callback([=] {
    const RunConfig rc = resolve(*opts);
    const GenerationConfig gc = generation_config(rc);
    const EmbeddingBundle emb = load_bundle(*text_emb, *image_emb);
    const Vocabulary vocab = load_vocabulary(*vocab_path);
    const ModelConfig mc = model_config(rc, vocab.size(), emb.text.dim(), emb.image.dim());
    const WeightBundle weights = load_weights(*weights_path, mc);
    const LossReport report = teacher_forced_losses(
        load_document(*doc_path), emb, weights, vocab, load_target(*target_path), rc.seed, gc);
    emit(loss_to_json(report), *out);
  });
}

void setup_sweep(CLI::App& app) {
  auto* sub = app.add_subcommand("sweep", "Grid-search post-processing or matching thresholds");
  sub->require_subcommand(1);

  auto* post = sub->add_subcommand("post", "Tune theta_R/theta_A by figure selection F1");
  auto docs = std::make_shared<std::string>();
  auto decks = std::make_shared<std::string>();
  auto traces = std::make_shared<std::string>();
  auto gts = std::make_shared<std::string>();
  auto grid_r = std::make_shared<std::string>();
  auto grid_a = std::make_shared<std::string>();
  auto template_path = std::make_shared<std::optional<std::string>>();
  auto post_out = std::make_shared<std::optional<std::string>>();
  post->add_option("--docs", *docs, "document JSON file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  post->add_option("--decks", *decks, "unpostprocessed deck file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  post->add_option("--traces", *traces, "generation trace file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  post->add_option("--gt", *gts, "reference deck file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  post->add_option("--grid-r", *grid_r, "theta_R grid, VALUE or LO:HI:STEP")->required();
  post->add_option("--grid-a", *grid_a, "theta_A grid, VALUE or LO:HI:STEP")->required();
  post->add_option("--template", *template_path, "layout template JSON")
      ->check(CLI::ExistingFile);
  post->add_option("--out", *post_out, "CSV destination");
  post->callback([=] {
    std::vector<PostSweepCase> cases;
    if (fs::is_directory(*docs)) {
      for (const auto& [id, doc_path] : dir_entries(*docs, ".doc.json")) {
        PostSweepCase c;
        c.doc = load_document(doc_path);
        c.deck = load_deck(find_for(*decks, id, ".deck.json"));
        c.trace = load_trace(find_for(*traces, id, ".trace.json"));
        c.gt_figures = figure_sequence(load_deck(find_for(*gts, id, ".gt.json")));
        cases.push_back(std::move(c));
      }
    } else {
      PostSweepCase c;
      c.doc = load_document(*docs);
      c.deck = load_deck(*decks);
      c.trace = load_trace(*traces);
      c.gt_figures = figure_sequence(load_deck(*gts));
      cases.push_back(std::move(c));
    }
    const TemplateSpec spec = *template_path ? load_template(**template_path) : TemplateSpec{};
    const PostSweepResult result = sweep_post(cases, parse_grid(*grid_r, "--grid-r"),
                                              parse_grid(*grid_a, "--grid-a"), spec);
    emit(post_sweep_csv(result), *post_out);
  });

  auto* figure = sub->add_subcommand("figure", "Tune theta_I on labeled similarity scores");
  auto labels_path = std::make_shared<std::string>();
  auto grid_i = std::make_shared<std::string>();
  auto fig_out = std::make_shared<std::optional<std::string>>();
  figure->add_option("--labels", *labels_path, "JSON array of {score, match}")
      ->required()
      ->check(CLI::ExistingFile);
  figure->add_option("--grid", *grid_i, "theta_I grid, VALUE or LO:HI:STEP")->required();
  figure->add_option("--out", *fig_out, "CSV destination");
  figure->callback([=] {
    const auto j = parse_text(detail::slurp_file(*labels_path), "'" + *labels_path + "'");
    if (!j.is_array()) throw SchemaViolation("'" + *labels_path + "': expected an array");
    std::vector<FigureSweepCase> cases;
    for (const auto& e : j) {
      FigureSweepCase c;
      c.score = detail::require_number(e, "score", "'" + *labels_path + "'");
      const auto& m = detail::require(e, "match", "'" + *labels_path + "'");
      if (!m.is_boolean())
        throw SchemaViolation("'" + *labels_path + "': field 'match' must be a boolean");
      c.is_match = m.get<bool>();
      cases.push_back(c);
    }
    const FigureSweepResult result = sweep_figure(cases, parse_grid(*grid_i, "--grid"));
    emit(figure_sweep_csv(result), *fig_out);
  });
}

void setup_render(CLI::App& app) {
  auto* sub = app.add_subcommand("render", "Draw a deck as one SVG per slide");
  auto deck_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto template_path = std::make_shared<std::optional<std::string>>();
  auto image_dir = std::make_shared<std::string>();
  sub->add_option("--deck", *deck_path, "slide deck JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out-dir", *out_dir, "destination directory")->required();
  sub->add_option("--template", *template_path, "layout template JSON")
      ->check(CLI::ExistingFile);
  sub->add_option("--image-dir", *image_dir, "directory of figure images keyed by id");
  sub->callback([=] {
    const TemplateSpec spec = *template_path ? load_template(**template_path) : TemplateSpec{};
    render_deck(load_deck(*deck_path), spec, *out_dir, *image_dir);
  });
}

void setup_init_weights(CLI::App& app) {
  auto* sub = app.add_subcommand("init-weights", "Write a seeded random weight file");
  auto opts = std::make_shared<Overrides>();
  auto vocab_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto text_emb = std::make_shared<std::optional<std::string>>();
  auto image_emb = std::make_shared<std::optional<std::string>>();
  sub->add_option("--vocab", *vocab_path, "vocabulary JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", *out, "weight file destination")->required();
  sub->add_option("--text-emb", *text_emb, "text embedding file, sizes the sentence input")
      ->check(CLI::ExistingFile);
  sub->add_option("--image-emb", *image_emb, "image embedding file, sizes the image input")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", opts->seed, "initialization seed");
  add_config_flag(sub, *opts);
  sub->callback([=] {
    const RunConfig rc = resolve(*opts);
    const Vocabulary vocab = load_vocabulary(*vocab_path);
    const std::size_t text_dim = *text_emb ? load_embeddings(**text_emb).dim() : 0;
    const std::size_t image_dim = *image_emb ? load_embeddings(**image_emb).dim() : 0;
    const ModelConfig mc = model_config(rc, vocab.size(), text_dim, image_dim);
    save_weights(init_weights(mc, rc.seed), *out);
  });
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Document-to-slide-deck pipeline over precomputed embeddings"};
  app.require_subcommand(1);
  setup_stem(app);
  setup_match(app);
  setup_build_dataset(app);
  setup_generate(app);
  setup_eval(app);
  setup_loss(app);
  setup_sweep(app);
  setup_render(app);
  setup_init_weights(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace deckgen
