#include "deckgen/pipeline.hpp"

#include <cmath>
#include <unordered_map>

#include "deckgen/textutil.hpp"
#include "json_util.hpp"

namespace deckgen {

using detail::ojson;

double cosine(const Vec& u, const Vec& v) {
  if (u.size() != v.size())
    throw DimMismatch("cosine: dims " + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

const Vec& text_embedding(const TextObject& obj, const EmbeddingStore& emb, std::size_t slide,
                          std::size_t object) {
  if (!obj.id)
    throw MissingEmbedding("text object " + std::to_string(object) + " on slide " +
                           std::to_string(slide) + " has no embedding id");
  return emb.get(*obj.id);
}

// Mean of the slide's text-object embeddings; all-zero when the slide has none.
Vec slide_text_mean(const Slide& slide, const EmbeddingStore& emb, std::size_t slide_idx) {
  Vec mean(emb.dim(), 0.0);
  std::size_t n = 0;
  for (std::size_t k = 0; k < slide.objects.size(); ++k) {
    if (!is_text(slide.objects[k])) continue;
    const Vec& e = text_embedding(as_text(slide.objects[k]), emb, slide_idx, k);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += e[c];
    ++n;
  }
  if (n)
    for (double& c : mean) c /= static_cast<double>(n);
  return mean;
}

Vec section_text_mean(const Section& sec, const EmbeddingStore& emb) {
  Vec mean(emb.dim(), 0.0);
  for (const auto& s : sec.sentences) {
    const Vec& e = emb.get(s.id);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += e[c];
  }
  for (double& c : mean) c /= static_cast<double>(sec.sentences.size());
  return mean;
}

}  // namespace

double slide_coverage(const Slide& prev, const Slide& next, const EmbeddingBundle& emb,
                      double sim_threshold) {
  if (prev.objects.empty()) return 1.0;
  std::size_t covered = 0;
  for (std::size_t k = 0; k < prev.objects.size(); ++k) {
    const SlideObject& item = prev.objects[k];
    bool hit = false;
    if (is_text(item)) {
      const Vec& e = text_embedding(as_text(item), emb.text, 0, k);
      for (std::size_t m = 0; m < next.objects.size() && !hit; ++m) {
        if (!is_text(next.objects[m])) continue;
        hit = cosine(e, text_embedding(as_text(next.objects[m]), emb.text, 1, m)) >= sim_threshold;
      }
    } else {
      const auto& fig = as_figure(item);
      for (std::size_t m = 0; m < next.objects.size() && !hit; ++m) {
        if (!is_figure(next.objects[m])) continue;
        const auto& other = as_figure(next.objects[m]);
        hit = other.figure_id == fig.figure_id ||
              cosine(emb.image.get(fig.figure_id), emb.image.get(other.figure_id)) >= sim_threshold;
      }
    }
    if (hit) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(prev.objects.size());
}

SlideDeck stem_deck(const SlideDeck& deck, const EmbeddingBundle& emb, double sim_threshold,
                    double coverage_threshold) {
  SlideDeck cur = deck;
  bool changed = true;
  while (changed && cur.slides.size() > 1) {
    changed = false;
    std::vector<bool> keep(cur.slides.size(), true);
    for (std::size_t j = 0; j + 1 < cur.slides.size(); ++j) {
      if (slide_coverage(cur.slides[j], cur.slides[j + 1], emb, sim_threshold) >=
          coverage_threshold) {
        keep[j] = false;
        changed = true;
      }
    }
    if (changed) {
      SlideDeck next;
      next.id = cur.id;
      for (std::size_t j = 0; j < cur.slides.size(); ++j)
        if (keep[j]) next.slides.push_back(std::move(cur.slides[j]));
      cur = std::move(next);
    }
  }
  return cur;
}

SectionAssignment match_slides_to_sections(const SlideDeck& deck, const Document& doc,
                                           const EmbeddingStore& text_emb) {
  const std::size_t n_slides = deck.slides.size();
  const std::size_t n_secs = doc.sections.size();
  if (n_slides == 0) return {};

  std::vector<Vec> smean(n_slides), cmean(n_secs);
  for (std::size_t j = 0; j < n_slides; ++j) smean[j] = slide_text_mean(deck.slides[j], text_emb, j);
  for (std::size_t t = 0; t < n_secs; ++t) cmean[t] = section_text_mean(doc.sections[t], text_emb);

  std::vector<std::vector<double>> cost(n_slides, std::vector<double>(n_secs));
  for (std::size_t j = 0; j < n_slides; ++j)
    for (std::size_t t = 0; t < n_secs; ++t) cost[j][t] = cosine(smean[j], cmean[t]);

  // best[j][s]: top score assignable to slides j.. with section indices >= s
  std::vector<std::vector<double>> best(n_slides + 1, std::vector<double>(n_secs, 0.0));
  for (std::size_t j = n_slides; j-- > 0;) {
    for (std::size_t s = n_secs; s-- > 0;) {
      double v = cost[j][s] + best[j + 1][s];
      if (s + 1 < n_secs && best[j][s + 1] > v) v = best[j][s + 1];
      best[j][s] = v;
    }
  }

  // walk forward, taking the smallest section that still attains the optimum
  SectionAssignment out(n_slides);
  std::size_t s = 0;
  for (std::size_t j = 0; j < n_slides; ++j) {
    std::size_t pick = s;
    while (cost[j][pick] + best[j + 1][pick] != best[j][s]) ++pick;
    out[j] = pick;
    s = pick;
  }
  return out;
}

MatchReport match_sentences(const SlideDeck& deck, const Document& doc,
                            const SectionAssignment& assignment, const EmbeddingStore& text_emb) {
  if (assignment.size() != deck.slides.size())
    throw InconsistentReport("assignment covers " + std::to_string(assignment.size()) +
                             " slides, deck has " + std::to_string(deck.slides.size()));
  MatchReport report;
  report.assignment = assignment;
  report.slides.resize(deck.slides.size());
  for (std::size_t j = 0; j < deck.slides.size(); ++j) {
    const Slide& slide = deck.slides[j];
    report.slides[j].resize(slide.objects.size());
    const std::size_t sec = assignment[j];
    if (sec >= doc.sections.size())
      throw InconsistentReport("assignment for slide " + std::to_string(j) +
                               " names section " + std::to_string(sec) + " of " +
                               std::to_string(doc.sections.size()));
    const auto& sentences = doc.sections[sec].sentences;
    for (std::size_t k = 0; k < slide.objects.size(); ++k) {
      if (!is_text(slide.objects[k])) continue;
      const Vec& e = text_embedding(as_text(slide.objects[k]), text_emb, j, k);
      std::size_t best_idx = 0;
      double best_score = cosine(e, text_emb.get(sentences[0].id));
      for (std::size_t t = 1; t < sentences.size(); ++t) {
        double sc = cosine(e, text_emb.get(sentences[t].id));
        if (sc > best_score) {
          best_score = sc;
          best_idx = t;
        }
      }
      report.slides[j][k] = SentenceMatch{sec, best_idx, best_score};
    }
  }
  return report;
}

MatchReport match_figures(const SlideDeck& deck, const Document& doc,
                          const EmbeddingStore& image_emb, double theta_I) {
  MatchReport report;
  report.slides.resize(deck.slides.size());
  for (std::size_t j = 0; j < deck.slides.size(); ++j) {
    const Slide& slide = deck.slides[j];
    report.slides[j].resize(slide.objects.size());
    for (std::size_t k = 0; k < slide.objects.size(); ++k) {
      if (!is_figure(slide.objects[k])) continue;
      if (doc.figures.empty()) continue;
      const Vec& e = image_emb.get(as_figure(slide.objects[k]).figure_id);
      std::size_t best_idx = 0;
      double best_score = cosine(e, image_emb.get(doc.figures[0].id));
      for (std::size_t q = 1; q < doc.figures.size(); ++q) {
        double sc = cosine(e, image_emb.get(doc.figures[q].id));
        if (sc > best_score) {
          best_score = sc;
          best_idx = q;
        }
      }
      if (best_score >= theta_I)
        report.slides[j][k] = FigureMatch{doc.figures[best_idx].id, best_score};
    }
  }
  return report;
}

MatchReport merge_reports(const MatchReport& sentence_part, const MatchReport& figure_part) {
  if (sentence_part.slides.size() != figure_part.slides.size())
    throw InconsistentReport("reports cover different slide counts: " +
                             std::to_string(sentence_part.slides.size()) + " vs " +
                             std::to_string(figure_part.slides.size()));
  if (!sentence_part.assignment.empty() && !figure_part.assignment.empty() &&
      sentence_part.assignment != figure_part.assignment)
    throw InconsistentReport("reports disagree on the section assignment");
  MatchReport merged;
  merged.assignment =
      sentence_part.assignment.empty() ? figure_part.assignment : sentence_part.assignment;
  merged.slides.resize(sentence_part.slides.size());
  for (std::size_t j = 0; j < merged.slides.size(); ++j) {
    const auto& a = sentence_part.slides[j];
    const auto& b = figure_part.slides[j];
    if (a.size() != b.size())
      throw InconsistentReport("slide " + std::to_string(j) + ": reports cover " +
                               std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                               " objects");
    merged.slides[j].resize(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] && b[k])
        throw InconsistentReport("slide " + std::to_string(j) + " object " + std::to_string(k) +
                                 " matched in both reports");
      merged.slides[j][k] = a[k] ? a[k] : b[k];
    }
  }
  return merged;
}

TrainingTarget build_targets(const Document& doc, const SlideDeck& gt_deck,
                             const MatchReport& report, const Vocabulary& vocab) {
  const std::size_t n_slides = gt_deck.slides.size();
  if (report.assignment.size() != n_slides)
    throw InconsistentReport("assignment covers " + std::to_string(report.assignment.size()) +
                             " slides, deck has " + std::to_string(n_slides));
  if (report.slides.size() != n_slides)
    throw InconsistentReport("report covers " + std::to_string(report.slides.size()) +
                             " slides, deck has " + std::to_string(n_slides));
  for (std::size_t j = 0; j < n_slides; ++j) {
    if (report.slides[j].size() != gt_deck.slides[j].objects.size())
      throw InconsistentReport("slide " + std::to_string(j) + ": report covers " +
                               std::to_string(report.slides[j].size()) + " of " +
                               std::to_string(gt_deck.slides[j].objects.size()) + " objects");
    if (j && report.assignment[j] < report.assignment[j - 1])
      throw InconsistentReport("assignment decreases at slide " + std::to_string(j));
    if (report.assignment[j] >= doc.sections.size())
      throw InconsistentReport("assignment for slide " + std::to_string(j) + " names section " +
                               std::to_string(report.assignment[j]) + " of " +
                               std::to_string(doc.sections.size()));
  }

  std::unordered_map<std::string, std::size_t> figure_index;
  for (std::size_t q = 0; q < doc.figures.size(); ++q) figure_index[doc.figures[q].id] = q;

  TrainingTarget target;
  target.section_actions.assign(doc.sections.size(), {});
  for (std::size_t j = 0; j < n_slides; ++j)
    target.section_actions[report.assignment[j]].push_back(SectionAction::new_slide);
  for (auto& seq : target.section_actions) seq.push_back(SectionAction::end_section);

  for (std::size_t j = 0; j < n_slides; ++j) {
    const Slide& slide = gt_deck.slides[j];
    SlideTarget st;
    st.section = report.assignment[j];
    const std::size_t n_sent = doc.sections[st.section].sentences.size();
    for (std::size_t k = 0; k < slide.objects.size(); ++k) {
      const auto& match = report.slides[j][k];
      if (!match) continue;  // unmatched content carries no training signal
      ObjectTarget ot;
      ot.bbox = is_text(slide.objects[k]) ? as_text(slide.objects[k]).bbox
                                          : as_figure(slide.objects[k]).bbox;
      if (is_text(slide.objects[k])) {
        const auto* sm = std::get_if<SentenceMatch>(&*match);
        if (!sm)
          throw InconsistentReport("slide " + std::to_string(j) + " object " + std::to_string(k) +
                                   ": figure match recorded for a text object");
        if (sm->section != st.section)
          throw InconsistentReport("slide " + std::to_string(j) + " object " + std::to_string(k) +
                                   ": match cites section " + std::to_string(sm->section) +
                                   ", slide is assigned " + std::to_string(st.section));
        if (sm->sentence >= n_sent)
          throw InconsistentReport("slide " + std::to_string(j) + " object " + std::to_string(k) +
                                   ": sentence index " + std::to_string(sm->sentence) +
                                   " out of range " + std::to_string(n_sent));
        ot.is_figure = false;
        ot.selection = sm->sentence;
        for (const auto& tok : tokenize_keep_punct(as_text(slide.objects[k]).text))
          ot.tokens.push_back(vocab.id_of(tok));
        ot.tokens.push_back(Vocabulary::kEos);
      } else {
        const auto* fm = std::get_if<FigureMatch>(&*match);
        if (!fm)
          throw InconsistentReport("slide " + std::to_string(j) + " object " + std::to_string(k) +
                                   ": sentence match recorded for a figure object");
        auto it = figure_index.find(fm->figure_id);
        if (it == figure_index.end())
          throw InconsistentReport("slide " + std::to_string(j) + " object " + std::to_string(k) +
                                   ": matched figure '" + fm->figure_id +
                                   "' is not in the document");
        ot.is_figure = true;
        ot.selection = n_sent + it->second;
      }
      st.objects.push_back(std::move(ot));
    }
    st.actions.assign(st.objects.size(), SlideAction::new_object);
    st.actions.push_back(SlideAction::end_slide);
    target.slides.push_back(std::move(st));
  }
  return target;
}

// ---------------------------------------------------------------------------
// JSON round-trips
// ---------------------------------------------------------------------------

std::string report_to_json(const MatchReport& report) {
  ojson j;
  j["assignment"] = report.assignment;
  j["slides"] = ojson::array();
  for (const auto& slide : report.slides) {
    ojson js;
    js["objects"] = ojson::array();
    for (const auto& m : slide) {
      if (!m) {
        js["objects"].push_back(nullptr);
      } else if (const auto* sm = std::get_if<SentenceMatch>(&*m)) {
        js["objects"].push_back({{"kind", "text"},
                                 {"section", sm->section},
                                 {"sentence", sm->sentence},
                                 {"score", sm->score}});
      } else {
        const auto& fm = std::get<FigureMatch>(*m);
        js["objects"].push_back(
            {{"kind", "figure"}, {"figure_id", fm.figure_id}, {"score", fm.score}});
      }
    }
    j["slides"].push_back(std::move(js));
  }
  return j.dump(2) + "\n";
}

MatchReport report_from_json(const std::string& text, const std::string& where) {
  const auto j = detail::parse_text(text, where);
  MatchReport report;
  const auto& assignment = detail::require_array(j, "assignment", where);
  for (const auto& a : assignment) {
    if (!a.is_number_unsigned())
      throw SchemaViolation(where + ": assignment entries must be non-negative integers");
    report.assignment.push_back(a.get<std::size_t>());
  }
  const auto& slides = detail::require_array(j, "slides", where);
  for (std::size_t i = 0; i < slides.size(); ++i) {
    const std::string swhere = where + " slides[" + std::to_string(i) + "]";
    const auto& objects = detail::require_array(slides[i], "objects", swhere);
    std::vector<std::optional<ObjectMatch>> row;
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const std::string owhere = swhere + ".objects[" + std::to_string(k) + "]";
      if (objects[k].is_null()) {
        row.emplace_back(std::nullopt);
        continue;
      }
      const std::string kind = detail::require_string(objects[k], "kind", owhere);
      if (kind == "text") {
        SentenceMatch sm;
        sm.section = detail::require_index(objects[k], "section", owhere);
        sm.sentence = detail::require_index(objects[k], "sentence", owhere);
        sm.score = detail::require_number(objects[k], "score", owhere);
        row.emplace_back(sm);
      } else if (kind == "figure") {
        FigureMatch fm;
        fm.figure_id = detail::require_string(objects[k], "figure_id", owhere);
        fm.score = detail::require_number(objects[k], "score", owhere);
        row.emplace_back(fm);
      } else {
        throw SchemaViolation(owhere + ": unknown match kind '" + kind + "'");
      }
    }
    report.slides.push_back(std::move(row));
  }
  return report;
}

void save_report(const MatchReport& report, const std::string& path) {
  detail::write_text_file(path, report_to_json(report));
}

MatchReport load_report(const std::string& path) {
  return report_from_json(detail::slurp_file(path), "'" + path + "'");
}

namespace {

const char* section_action_name(SectionAction a) {
  return a == SectionAction::new_slide ? "NEW_SLIDE" : "END_SEC";
}

const char* slide_action_name(SlideAction a) {
  return a == SlideAction::new_object ? "NEW_OBJ" : "END_SLIDE";
}

}  // namespace

std::string target_to_json(const TrainingTarget& target) {
  ojson j;
  j["section_actions"] = ojson::array();
  for (const auto& seq : target.section_actions) {
    ojson row = ojson::array();
    for (auto a : seq) row.push_back(section_action_name(a));
    j["section_actions"].push_back(std::move(row));
  }
  j["slides"] = ojson::array();
  for (const auto& st : target.slides) {
    ojson js;
    js["section"] = st.section;
    js["actions"] = ojson::array();
    for (auto a : st.actions) js["actions"].push_back(slide_action_name(a));
    js["objects"] = ojson::array();
    for (const auto& ot : st.objects) {
      ojson jo;
      jo["kind"] = ot.is_figure ? "figure" : "text";
      jo["selection"] = ot.selection;
      jo["bbox"] = detail::bbox_to_json(ot.bbox);
      if (!ot.is_figure) jo["tokens"] = ot.tokens;
      js["objects"].push_back(std::move(jo));
    }
    j["slides"].push_back(std::move(js));
  }
  return j.dump(2) + "\n";
}

TrainingTarget target_from_json(const std::string& text, const std::string& where) {
  const auto j = detail::parse_text(text, where);
  TrainingTarget target;
  for (const auto& seq : detail::require_array(j, "section_actions", where)) {
    std::vector<SectionAction> row;
    if (!seq.is_array()) throw SchemaViolation(where + ": section_actions entries must be arrays");
    for (const auto& a : seq) {
      const std::string name = a.is_string() ? a.get<std::string>() : "";
      if (name == "NEW_SLIDE")
        row.push_back(SectionAction::new_slide);
      else if (name == "END_SEC")
        row.push_back(SectionAction::end_section);
      else
        throw SchemaViolation(where + ": unknown section action '" + name + "'");
    }
    target.section_actions.push_back(std::move(row));
  }
  const auto& slides = detail::require_array(j, "slides", where);
  for (std::size_t i = 0; i < slides.size(); ++i) {
    const std::string swhere = where + " slides[" + std::to_string(i) + "]";
    SlideTarget st;
    st.section = detail::require_index(slides[i], "section", swhere);
    for (const auto& a : detail::require_array(slides[i], "actions", swhere)) {
      const std::string name = a.is_string() ? a.get<std::string>() : "";
      if (name == "NEW_OBJ")
        st.actions.push_back(SlideAction::new_object);
      else if (name == "END_SLIDE")
        st.actions.push_back(SlideAction::end_slide);
      else
        throw SchemaViolation(swhere + ": unknown slide action '" + name + "'");
    }
    const auto& objects = detail::require_array(slides[i], "objects", swhere);
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const std::string owhere = swhere + ".objects[" + std::to_string(k) + "]";
      ObjectTarget ot;
      const std::string kind = detail::require_string(objects[k], "kind", owhere);
      if (kind != "text" && kind != "figure")
        throw SchemaViolation(owhere + ": unknown object kind '" + kind + "'");
      ot.is_figure = kind == "figure";
      ot.selection = detail::require_index(objects[k], "selection", owhere);
      ot.bbox = detail::parse_bbox(detail::require(objects[k], "bbox", owhere), owhere);
      if (!ot.is_figure) {
        for (const auto& t : detail::require_array(objects[k], "tokens", owhere)) {
          if (!t.is_number_unsigned())
            throw SchemaViolation(owhere + ": tokens must be non-negative integers");
          ot.tokens.push_back(t.get<std::size_t>());
        }
      }
      st.objects.push_back(std::move(ot));
    }
    target.slides.push_back(std::move(st));
  }
  return target;
}

void save_target(const TrainingTarget& target, const std::string& path) {
  detail::write_text_file(path, target_to_json(target));
}

TrainingTarget load_target(const std::string& path) {
  return target_from_json(detail::slurp_file(path), "'" + path + "'");
}

}  // namespace deckgen
