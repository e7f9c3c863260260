#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "deckgen/model.hpp"
#include "deckgen/textutil.hpp"
#include "model_internal.hpp"

namespace deckgen {

namespace detail_model {

Vec affine(const Tensor& m, const Vec& b, const Vec& x) {
  Vec y = matvec(m, x);
  if (y.size() != b.size())
    throw ShapeMismatch("affine: output " + std::to_string(y.size()) + " vs bias " +
                        std::to_string(b.size()));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

Vec embed_row(const Tensor& table, std::size_t id) {
  const std::size_t dim = table.cols();
  if (id >= table.rows())
    throw ShapeMismatch("token id " + std::to_string(id) + " outside embedding table of " +
                        std::to_string(table.rows()));
  return Vec(table.data.begin() + static_cast<std::ptrdiff_t>(id * dim),
             table.data.begin() + static_cast<std::ptrdiff_t>((id + 1) * dim));
}

DecoderStep decoder_advance(Vec& state, Vec& context, std::size_t prev_token,
                            const std::vector<Vec>& enc_out,
                            const std::vector<std::size_t>& source_ids, const ModelWeights& w) {
  state = gru_cell(concat(embed_row(w.par_embed, prev_token), context), state, w.par_dec);
  const Vec att = bilinear_attention(state, enc_out, w.par_attn);
  context = weighted_sum(att, enc_out);
  const Vec sc = concat(state, context);
  const Vec gen = softmax(affine(w.par_gen_w, w.par_gen_b, sc));
  const double g = sigmoid(affine(w.par_gate_w, w.par_gate_b, sc)[0]);
  DecoderStep out;
  out.gate = g;
  out.dist.assign(gen.size(), 0.0);
  for (std::size_t t = 0; t < gen.size(); ++t) out.dist[t] = g * gen[t];
  for (std::size_t k = 0; k < source_ids.size(); ++k)
    out.dist[source_ids[k]] += (1.0 - g) * att[k];
  return out;
}

EncodedSource encode_source(const std::vector<std::size_t>& source_ids, const Vec& h_obj,
                            const ModelWeights& w, bool use_hobj) {
  if (source_ids.empty()) throw EmptySource("paraphrase source is empty");
  const std::size_t hidden = w.par_embed.cols();
  EncodedSource enc;
  Vec h(hidden, 0.0);
  for (auto id : source_ids) {
    h = gru_cell(embed_row(w.par_embed, id), h, w.par_enc);
    enc.outputs.push_back(h);
  }
  const std::size_t state_dim = w.par_bridge_w.cols() - hidden;
  Vec obj_part(state_dim, 0.0);
  if (use_hobj) {
    if (h_obj.size() != state_dim)
      throw ShapeMismatch("object state dim " + std::to_string(h_obj.size()) + ", bridge expects " +
                          std::to_string(state_dim));
    obj_part = h_obj;
  }
  enc.state = affine(w.par_bridge_w, w.par_bridge_b, concat(h, obj_part));
  enc.context.assign(hidden, 0.0);
  return enc;
}

std::vector<std::size_t> vocab_ids(const std::string& text, const Vocabulary& vocab) {
  std::vector<std::size_t> ids;
  for (const auto& tok : tokenize_keep_punct(text)) ids.push_back(vocab.id_of(tok));
  return ids;
}

}  // namespace detail_model

using detail_model::decoder_advance;
using detail_model::DecoderStep;
using detail_model::encode_source;
using detail_model::EncodedSource;
using detail_model::vocab_ids;

TrackerState TrackerState::enter(Vec h0, std::size_t context_dim) {
  TrackerState s;
  s.h = std::move(h0);
  s.prev_action.assign(2, 0.0);
  s.prev_context.assign(context_dim, 0.0);
  return s;
}

void TrackerState::force_action(bool stop) {
  prev_action = {stop ? 0.0 : 1.0, stop ? 1.0 : 0.0};
}

namespace {

TrackerStep tracker_step(TrackerState& state, const std::vector<Vec>& candidates,
                         const GruParams& gru, const Tensor& attn, const Mlp2Params& head) {
  state.h = gru_cell(concat(state.prev_action, state.prev_context), state.h, gru);
  TrackerStep step;
  step.attention = bilinear_attention(state.h, candidates, attn);
  step.context = weighted_sum(step.attention, candidates);
  const Vec p = softmax(mlp2(concat(state.h, step.context), head));
  if (p.size() != 2)
    throw ShapeMismatch("decision head emits " + std::to_string(p.size()) + " logits");
  step.p_advance = p[0];
  step.stop = p[1] > p[0];  // an exact tie keeps going
  state.force_action(step.stop);
  state.prev_context = step.context;
  return step;
}

}  // namespace

TrackerStep pt_slide_step(TrackerState& state, const SectionEmbedding& sec,
                          const ModelWeights& w) {
  return tracker_step(state, sec.candidates, w.slide_gru, w.slide_attn, w.slide_head);
}

TrackerStep pt_obj_step(TrackerState& state, const SectionEmbedding& sec, const ModelWeights& w) {
  return tracker_step(state, sec.candidates, w.obj_gru, w.obj_attn, w.obj_head);
}

std::size_t select_object(const Vec& attention, const std::vector<bool>& used) {
  if (used.size() != attention.size())
    throw ShapeMismatch("select_object: " + std::to_string(attention.size()) + " scores vs " +
                        std::to_string(used.size()) + " usage flags");
  bool found = false;
  std::size_t best = 0;
  for (std::size_t r = 0; r < attention.size(); ++r) {
    if (used[r]) continue;
    if (!found || attention[r] > attention[best]) {
      best = r;
      found = true;
    }
  }
  if (!found) throw AllCandidatesUsed("every candidate is already placed");
  return best;
}

BBox predict_layout(const Vec& h_obj, const Vec& context, const ModelWeights& w) {
  const Vec raw = mlp2(concat(h_obj, context), w.layout_head);
  if (raw.size() != 4)
    throw ShapeMismatch("layout head emits " + std::to_string(raw.size()) + " values");
  const double bw = std::max(sigmoid(raw[2]), 0.01);
  const double bh = std::max(sigmoid(raw[3]), 0.01);
  return BBox{sigmoid(raw[0]) * (1.0 - bw), sigmoid(raw[1]) * (1.0 - bh), bw, bh};
}

ParaphraseResult paraphrase(const std::vector<std::size_t>& source_ids, const Vec& h_obj,
                            const ModelWeights& w, std::size_t max_len, bool use_hobj) {
  EncodedSource enc = encode_source(source_ids, h_obj, w, use_hobj);
  ParaphraseResult res;
  std::size_t prev = Vocabulary::kBos;
  for (std::size_t step = 0; step < max_len; ++step) {
    const DecoderStep d = decoder_advance(enc.state, enc.context, prev, enc.outputs, source_ids, w);
    std::size_t tok = 0;
    for (std::size_t t = 1; t < d.dist.size(); ++t)
      if (d.dist[t] > d.dist[tok]) tok = t;
    res.tokens.push_back(tok);
    res.steps.push_back({tok, d.dist[tok], d.gate});
    prev = tok;
    if (tok == Vocabulary::kEos) break;
  }
  return res;
}

SlideDeck post_process(const SlideDeck& deck, const Document& doc,
                       const std::vector<std::vector<double>>& scores, double theta_R,
                       double theta_A, const TemplateSpec& spec,
                       std::vector<PostRemoval>* removed, std::vector<PostAddition>* added) {
  if (scores.size() != deck.slides.size())
    throw ShapeMismatch("score matrix covers " + std::to_string(scores.size()) + " of " +
                        std::to_string(deck.slides.size()) + " slides");
  for (const auto& row : scores)
    if (row.size() != doc.figures.size())
      throw ShapeMismatch("score row covers " + std::to_string(row.size()) + " of " +
                          std::to_string(doc.figures.size()) + " figures");

  std::unordered_map<std::string, std::size_t> figure_index;
  for (std::size_t q = 0; q < doc.figures.size(); ++q) figure_index[doc.figures[q].id] = q;

  SlideDeck out;
  out.id = deck.id;
  std::vector<bool> has_text(deck.slides.size(), false);
  for (std::size_t j = 0; j < deck.slides.size(); ++j)
    has_text[j] = !deck.slides[j].text_objects().empty();

  // pass 1: drop low-relevance figures from slides that carry text
  for (std::size_t j = 0; j < deck.slides.size(); ++j) {
    Slide slide;
    slide.title = deck.slides[j].title;
    for (const auto& obj : deck.slides[j].objects) {
      if (has_text[j] && is_figure(obj)) {
        auto it = figure_index.find(as_figure(obj).figure_id);
        if (it != figure_index.end() && scores[j][it->second] < theta_R) {
          if (removed) removed->push_back({j, as_figure(obj).figure_id});
          continue;
        }
      }
      slide.objects.push_back(obj);
    }
    out.slides.push_back(std::move(slide));
  }

  // pass 2: bring in unplaced figures where they score high enough
  std::vector<bool> placed(doc.figures.size(), false);
  for (const auto& slide : out.slides)
    for (const auto& obj : slide.objects)
      if (is_figure(obj)) {
        auto it = figure_index.find(as_figure(obj).figure_id);
        if (it != figure_index.end()) placed[it->second] = true;
      }

  std::vector<std::vector<std::size_t>> incoming(out.slides.size());
  for (std::size_t q = 0; q < doc.figures.size(); ++q) {
    if (placed[q]) continue;
    bool have = false;
    std::size_t best_slide = 0;
    for (std::size_t j = 0; j < out.slides.size(); ++j) {
      if (!has_text[j]) continue;
      if (!have || scores[j][q] > scores[best_slide][q]) {
        best_slide = j;
        have = true;
      }
    }
    if (have && scores[best_slide][q] > theta_A) incoming[best_slide].push_back(q);
  }

  for (std::size_t j = 0; j < out.slides.size(); ++j) {
    if (incoming[j].empty()) continue;
    const auto n_text = static_cast<double>(out.slides[j].text_objects().size());
    const double top = spec.body.y + n_text * spec.line_height + spec.margin;
    const double height = spec.figure_strip.bottom() - top;
    const std::size_t cols = incoming[j].size();
    const double total_w = spec.figure_strip.w - spec.margin * static_cast<double>(cols - 1);
    if (height <= 0.0 || total_w <= 0.0) continue;  // no room to add anything here
    const double col_w = total_w / static_cast<double>(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& fig = doc.figures[incoming[j][c]];
      const BBox column{spec.figure_strip.x + static_cast<double>(c) * (col_w + spec.margin), top,
                        col_w, height};
      const BBox bb = fit_figure(column, fig.aspect_ratio);
      out.slides[j].objects.emplace_back(FigureObject{fig.id, bb});
      if (added) added->push_back({j, fig.id, bb});
    }
  }
  return out;
}

SectionAssignment GenerationTrace::assignment() const {
  SectionAssignment a;
  for (const auto& s : slides) a.push_back(s.section);
  return a;
}

namespace {

std::string surface_text(const std::vector<std::size_t>& tokens, const Vocabulary& vocab) {
  std::vector<std::string> words;
  for (auto id : tokens) {
    if (id == Vocabulary::kEos) break;
    words.push_back(vocab.tokens().at(id));
  }
  return join_tokens(words);
}

}  // namespace

GenerationResult generate_deck(const Document& doc, const EmbeddingBundle& emb,
                               const WeightBundle& weights, const Vocabulary& vocab,
                               const GenerationConfig& config) {
  config.check();
  validate_document(doc);
  const ModelWeights w = ModelWeights::from_bundle(weights);
  if (vocab.size() != w.config.vocab_size)
    throw ShapeMismatch("vocabulary holds " + std::to_string(vocab.size()) +
                        " tokens, weights expect " + std::to_string(w.config.vocab_size));

  const std::size_t n_secs = doc.sections.size();
  const std::size_t n_figs = doc.figures.size();
  std::vector<SectionEmbedding> sections;
  sections.reserve(n_secs);
  for (std::size_t i = 0; i < n_secs; ++i) sections.push_back(project_section(doc, i, emb, w));

  std::vector<std::vector<bool>> sentence_used(n_secs);
  for (std::size_t i = 0; i < n_secs; ++i)
    sentence_used[i].assign(doc.sections[i].sentences.size(), false);
  std::vector<bool> figure_used(n_figs, false);

  GenerationResult res;
  res.deck.id = doc.id;
  res.trace.section_decisions.resize(n_secs);

  Vec h_sec;
  for (std::size_t i = 0; i < n_secs; ++i) {
    h_sec = i == 0 ? initial_section_state(sections[0], w) : pt_sec_step(h_sec, sections[i], w);
    const auto& sec = sections[i];
    auto all_used = [&] {
      if (!config.mask_used) return false;
      for (bool u : sentence_used[i])
        if (!u) return false;
      for (bool u : figure_used)
        if (!u) return false;
      return true;
    };

    TrackerState slide_state = TrackerState::enter(h_sec, w.config.shared_dim);
    for (std::size_t sj = 0; sj < config.max_slides_per_section; ++sj) {
      const TrackerStep sstep = pt_slide_step(slide_state, sec, w);
      res.trace.section_decisions[i].push_back({!sstep.stop, sstep.p_advance});
      if (sstep.stop) break;

      Slide slide;
      slide.title = doc.sections[i].title;
      SlideDecodeTrace strace;
      strace.section = i;

      TrackerState obj_state = TrackerState::enter(slide_state.h, w.config.shared_dim);
      for (std::size_t ok = 0; ok < config.max_objects_per_slide; ++ok) {
        if (all_used()) break;  // nothing left to place anywhere
        const TrackerStep ostep = pt_obj_step(obj_state, sec, w);
        strace.decisions.push_back({!ostep.stop, ostep.p_advance});
        if (ostep.stop) break;

        std::vector<bool> used(sec.candidates.size(), false);
        if (config.mask_used) {
          for (std::size_t k = 0; k < sec.sentence_count; ++k) used[k] = sentence_used[i][k];
          for (std::size_t q = 0; q < n_figs; ++q) used[sec.sentence_count + q] = figure_used[q];
        }
        const std::size_t pick = select_object(ostep.attention, used);
        const CandidateTag tag = sec.tags[pick];
        const BBox bb = predict_layout(obj_state.h, ostep.context, w);

        ObjectDecodeTrace otrace;
        otrace.selection = pick;
        otrace.attention = ostep.attention;
        otrace.bbox = bb;
        if (!tag.is_figure) {
          const Sentence& src = doc.sections[i].sentences[tag.index];
          const auto ids = vocab_ids(src.text, vocab);
          const ParaphraseResult pr =
              paraphrase(ids, obj_state.h, w, config.par_max_len, config.use_hobj);
          TextObject t;
          t.id = src.id;
          t.text = surface_text(pr.tokens, vocab);
          t.bbox = bb;
          slide.objects.emplace_back(std::move(t));
          otrace.is_figure = false;
          otrace.source_id = src.id;
          otrace.tokens = pr.tokens;
          for (const auto& st : pr.steps) otrace.token_probs.push_back(st.prob);
          sentence_used[i][tag.index] = true;
        } else {
          const FigureRef& fig = doc.figures[tag.index];
          slide.objects.emplace_back(FigureObject{fig.id, bb});
          otrace.is_figure = true;
          otrace.source_id = fig.id;
          figure_used[tag.index] = true;
        }
        strace.objects.push_back(std::move(otrace));
      }
      res.deck.slides.push_back(std::move(slide));
      res.trace.slides.push_back(std::move(strace));
    }
  }

  // relevance of every document figure to every slide's selected text
  for (const auto& fig : doc.figures) res.trace.figure_order.push_back(fig.id);
  res.trace.relevance.assign(res.deck.slides.size(), std::vector<double>(n_figs, 0.0));
  for (std::size_t j = 0; j < res.trace.slides.size(); ++j) {
    const auto& strace = res.trace.slides[j];
    const auto& sec = sections[strace.section];
    for (std::size_t q = 0; q < n_figs; ++q) {
      const Vec& e_fig = sec.candidates[sec.sentence_count + q];
      double best = 0.0;
      bool any = false;
      for (const auto& obj : strace.objects) {
        if (obj.is_figure) continue;
        const double sc = relevance(sec.candidates[obj.selection], e_fig, w);
        if (!any || sc > best) best = sc;
        any = true;
      }
      res.trace.relevance[j][q] = any ? best : 0.0;
    }
  }

  if (config.run_post_process)
    res.deck = post_process(res.deck, doc, res.trace.relevance, config.theta_R, config.theta_A,
                            config.template_spec, &res.trace.removed, &res.trace.added);
  return res;
}

}  // namespace deckgen
