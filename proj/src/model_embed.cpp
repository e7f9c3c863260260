#include "deckgen/model.hpp"

namespace deckgen {

SectionEmbedding project_section(const Document& doc, std::size_t section,
                                 const EmbeddingBundle& emb, const ModelWeights& w) {
  if (section >= doc.sections.size())
    throw ShapeMismatch("section " + std::to_string(section) + " of " +
                        std::to_string(doc.sections.size()));
  const Section& sec = doc.sections[section];

  std::vector<Vec> sentence_vecs;
  sentence_vecs.reserve(sec.sentences.size());
  for (const auto& s : sec.sentences) sentence_vecs.push_back(emb.text.get(s.id));

  SectionEmbedding out;
  out.sentence_count = sec.sentences.size();
  out.contextual = bi_gru(sentence_vecs, w.reader_fwd, w.reader_bwd);

  for (std::size_t k = 0; k < out.contextual.size(); ++k) {
    out.candidates.push_back(mlp2(out.contextual[k], w.text_proj));
    out.tags.push_back({false, k});
  }
  // every document figure is selectable from any section
  for (std::size_t q = 0; q < doc.figures.size(); ++q) {
    const auto& fig = doc.figures[q];
    Vec v = concat(emb.image.get(fig.id), emb.text.get(fig.id));
    out.candidates.push_back(mlp2(v, w.figure_proj));
    out.tags.push_back({true, q});
  }
  return out;
}

namespace {

Vec affine(const Tensor& m, const Vec& b, const Vec& x) {
  Vec y = matvec(m, x);
  if (y.size() != b.size())
    throw ShapeMismatch("affine: output " + std::to_string(y.size()) + " vs bias " +
                        std::to_string(b.size()));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

Vec head_tail(const SectionEmbedding& sec) {
  if (sec.contextual.empty()) throw EmptyInput("section has no contextualized sentences");
  return concat(sec.contextual.front(), sec.contextual.back());
}

}  // namespace

Vec initial_section_state(const SectionEmbedding& first, const ModelWeights& w) {
  return affine(w.sec_init_w, w.sec_init_b, head_tail(first));
}

Vec pt_sec_step(const Vec& prev, const SectionEmbedding& sec, const ModelWeights& w) {
  return gru_cell(head_tail(sec), prev, w.sec_gru);
}

double relevance(const Vec& e_txt, const Vec& e_fig, const ModelWeights& w) {
  const Vec out = mlp2(concat(e_txt, e_fig), w.relevance_head);
  if (out.size() != 1)
    throw ShapeMismatch("relevance head emits " + std::to_string(out.size()) + " values");
  return sigmoid(out[0]);
}

}  // namespace deckgen
