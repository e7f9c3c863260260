#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "deckgen/model.hpp"
#include "deckgen/textutil.hpp"
#include "model_internal.hpp"

namespace deckgen {

using detail_model::decoder_advance;
using detail_model::encode_source;
using detail_model::EncodedSource;
using detail_model::vocab_ids;

namespace {

// Clamped log so a zero-probability target yields a huge but finite loss.
double nll(double p) { return -std::log(std::max(p, 1e-300)); }

void check_target(const Document& doc, const TrainingTarget& target, std::size_t vocab_size) {
  const std::size_t n_secs = doc.sections.size();
  const std::size_t n_figs = doc.figures.size();
  if (target.section_actions.size() != n_secs)
    throw InconsistentTarget("target covers " + std::to_string(target.section_actions.size()) +
                             " sections, document has " + std::to_string(n_secs));

  std::size_t want_slides = 0;
  for (std::size_t i = 0; i < n_secs; ++i) {
    const auto& acts = target.section_actions[i];
    if (acts.empty() || acts.back() != SectionAction::end_section)
      throw InconsistentTarget("section " + std::to_string(i) + " actions must end with END_SEC");
    for (std::size_t k = 0; k + 1 < acts.size(); ++k)
      if (acts[k] != SectionAction::new_slide)
        throw InconsistentTarget("section " + std::to_string(i) + " has END_SEC before the end");
    want_slides += acts.size() - 1;
  }
  if (want_slides != target.slides.size())
    throw InconsistentTarget("actions open " + std::to_string(want_slides) + " slides, target has " +
                             std::to_string(target.slides.size()));

  std::size_t j = 0;
  for (std::size_t i = 0; i < n_secs; ++i) {
    for (std::size_t k = 0; k + 1 < target.section_actions[i].size(); ++k, ++j) {
      if (target.slides[j].section != i)
        throw InconsistentTarget("slide " + std::to_string(j) + " claims section " +
                                 std::to_string(target.slides[j].section) + ", actions place it in " +
                                 std::to_string(i));
    }
  }

  for (j = 0; j < target.slides.size(); ++j) {
    const SlideTarget& s = target.slides[j];
    const std::string at = "slide " + std::to_string(j);
    if (s.actions.empty() || s.actions.back() != SlideAction::end_slide)
      throw InconsistentTarget(at + " actions must end with END_SLIDE");
    for (std::size_t k = 0; k + 1 < s.actions.size(); ++k)
      if (s.actions[k] != SlideAction::new_object)
        throw InconsistentTarget(at + " has END_SLIDE before the end");
    if (s.actions.size() - 1 != s.objects.size())
      throw InconsistentTarget(at + " opens " + std::to_string(s.actions.size() - 1) +
                               " objects but lists " + std::to_string(s.objects.size()));

    const std::size_t n_sent = doc.sections[s.section].sentences.size();
    for (const ObjectTarget& o : s.objects) {
      if (o.is_figure) {
        if (o.selection < n_sent || o.selection >= n_sent + n_figs)
          throw InconsistentTarget(at + ": figure selection " + std::to_string(o.selection) +
                                   " outside [" + std::to_string(n_sent) + ", " +
                                   std::to_string(n_sent + n_figs) + ")");
        if (!o.tokens.empty())
          throw InconsistentTarget(at + ": figure object carries paraphrase tokens");
      } else {
        if (o.selection >= n_sent)
          throw InconsistentTarget(at + ": sentence selection " + std::to_string(o.selection) +
                                   " outside section of " + std::to_string(n_sent));
        if (o.tokens.empty()) throw InconsistentTarget(at + ": text object has no target tokens");
        for (auto id : o.tokens)
          if (id >= vocab_size)
            throw InconsistentTarget(at + ": token id " + std::to_string(id) +
                                     " outside vocabulary of " + std::to_string(vocab_size));
      }
      if (!bbox_valid(o.bbox)) throw InconsistentTarget(at + ": invalid target box");
    }
  }
}

}  // namespace

LossReport teacher_forced_losses(const Document& doc, const EmbeddingBundle& emb,
                                 const WeightBundle& weights, const Vocabulary& vocab,
                                 const TrainingTarget& target, std::uint64_t negatives_seed,
                                 const GenerationConfig& config) {
  config.check();
  validate_document(doc);
  const ModelWeights w = ModelWeights::from_bundle(weights);
  if (vocab.size() != w.config.vocab_size)
    throw ShapeMismatch("vocabulary holds " + std::to_string(vocab.size()) +
                        " tokens, weights expect " + std::to_string(w.config.vocab_size));
  check_target(doc, target, vocab.size());

  const std::size_t n_secs = doc.sections.size();
  const std::size_t n_figs = doc.figures.size();
  std::vector<SectionEmbedding> sections;
  sections.reserve(n_secs);
  for (std::size_t i = 0; i < n_secs; ++i) sections.push_back(project_section(doc, i, emb, w));

  std::vector<std::size_t> sent_offset(n_secs, 0);
  for (std::size_t i = 1; i < n_secs; ++i)
    sent_offset[i] = sent_offset[i - 1] + doc.sections[i - 1].sentences.size();
  const std::size_t n_sent_total =
      n_secs == 0 ? 0 : sent_offset[n_secs - 1] + doc.sections[n_secs - 1].sentences.size();

  LossReport rep;
  // (global sentence, figure) pairs co-located on some target slide, with the
  // section each was seen in so the projected embeddings can be looked up
  struct Colocated {
    std::size_t section, sentence, figure;
  };
  std::vector<Colocated> positives;

  Vec h_sec;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n_secs; ++i) {
    h_sec = i == 0 ? initial_section_state(sections[0], w) : pt_sec_step(h_sec, sections[i], w);
    const auto& sec = sections[i];

    TrackerState slide_state = TrackerState::enter(h_sec, w.config.shared_dim);
    for (const SectionAction act : target.section_actions[i]) {
      const TrackerStep sstep = pt_slide_step(slide_state, sec, w);
      const bool stop = act == SectionAction::end_section;
      rep.structure_loss += nll(stop ? 1.0 - sstep.p_advance : sstep.p_advance);
      slide_state.force_action(stop);
      if (stop) break;

      const SlideTarget& starget = target.slides[j++];
      TrackerState obj_state = TrackerState::enter(slide_state.h, w.config.shared_dim);
      std::size_t ok = 0;
      for (const SlideAction oact : starget.actions) {
        const TrackerStep ostep = pt_obj_step(obj_state, sec, w);
        const bool ostop = oact == SlideAction::end_slide;
        rep.structure_loss += nll(ostop ? 1.0 - ostep.p_advance : ostep.p_advance);
        obj_state.force_action(ostop);
        if (ostop) break;

        const ObjectTarget& ot = starget.objects[ok++];
        rep.selection_loss += nll(ostep.attention[ot.selection]);

        const BBox bb = predict_layout(obj_state.h, ostep.context, w);
        rep.predicted_boxes.push_back(bb);
        const double dx = bb.x - ot.bbox.x;
        const double dy = bb.y - ot.bbox.y;
        const double dw = bb.w - ot.bbox.w;
        const double dh = bb.h - ot.bbox.h;
        rep.layout_loss += (dx * dx + dy * dy + dw * dw + dh * dh) / 4.0;

        if (!ot.is_figure) {
          const Sentence& src = doc.sections[i].sentences[ot.selection];
          const auto src_ids = vocab_ids(src.text, vocab);
          EncodedSource enc = encode_source(src_ids, obj_state.h, w, config.use_hobj);
          Vec state = enc.state;
          Vec context = enc.context;
          std::size_t prev = Vocabulary::kBos;
          for (const std::size_t tok : ot.tokens) {
            const auto dstep = decoder_advance(state, context, prev, enc.outputs, src_ids, w);
            rep.paraphrase_loss += nll(dstep.dist[tok]);
            prev = tok;
          }
        }
      }

      for (const ObjectTarget& a : starget.objects) {
        if (a.is_figure) continue;
        for (const ObjectTarget& b : starget.objects)
          if (b.is_figure) positives.push_back({i, a.selection, b.selection - sec.sentence_count});
      }
    }
  }

  // Matching: every co-located pair is a positive; each draws one negative
  // from the pairs never seen together, uniformly by seed.
  if (!positives.empty()) {
    std::vector<char> is_pos(n_sent_total * n_figs, 0);
    for (const auto& p : positives) is_pos[(sent_offset[p.section] + p.sentence) * n_figs + p.figure] = 1;
    std::vector<std::pair<std::size_t, std::size_t>> pool;  // (global sentence, figure)
    for (std::size_t g = 0; g < n_sent_total; ++g)
      for (std::size_t q = 0; q < n_figs; ++q)
        if (!is_pos[g * n_figs + q]) pool.emplace_back(g, q);

    auto section_of = [&](std::size_t g) {
      std::size_t s = n_secs - 1;
      while (sent_offset[s] > g) --s;
      return s;
    };
    std::mt19937_64 gen(negatives_seed);
    for (const auto& p : positives) {
      const auto& cand = sections[p.section].candidates;
      const double d_pos =
          relevance(cand[p.sentence], cand[sections[p.section].sentence_count + p.figure], w);
      rep.matching_loss += nll(d_pos);
      if (pool.empty()) continue;
      const auto [g, q] = pool[gen() % pool.size()];
      const std::size_t s = section_of(g);
      const auto& ncand = sections[s].candidates;
      const double d_neg =
          relevance(ncand[g - sent_offset[s]], ncand[sections[s].sentence_count + q], w);
      rep.matching_loss += nll(1.0 - d_neg);
    }
  }

  rep.content_loss = rep.selection_loss + rep.paraphrase_loss + rep.matching_loss + rep.layout_loss;
  rep.total = rep.structure_loss + config.gamma * rep.content_loss;
  return rep;
}

}  // namespace deckgen
