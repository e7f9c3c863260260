#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deckgen/io.hpp"
#include "deckgen/layout.hpp"
#include "deckgen/pipeline.hpp"
#include "deckgen/tensor.hpp"
#include "deckgen/types.hpp"

namespace deckgen {

struct GenerationConfig {
  std::size_t max_slides_per_section = 10;
  std::size_t max_objects_per_slide = 12;
  std::size_t par_max_len = 40;
  double theta_R = 0.8;
  double theta_A = 0.9;
  bool mask_used = true;        // block re-selecting already placed candidates
  bool use_hobj = true;         // condition the paraphraser on the object state
  bool run_post_process = true;
  double gamma = 1.0;           // weight of the content term in the total loss
  TemplateSpec template_spec;

  void check() const;
};

// The weight bundle unpacked into typed parameter blocks. Built once, then
// shared read-only by any number of decodes.
struct ModelWeights {
  ModelConfig config;

  GruParams reader_fwd, reader_bwd;
  Mlp2Params text_proj, figure_proj;

  Tensor sec_init_w;  // maps the first section's head-tail context to a state
  Vec sec_init_b;
  GruParams sec_gru;

  GruParams slide_gru;
  Tensor slide_attn;
  Mlp2Params slide_head;

  GruParams obj_gru;
  Tensor obj_attn;
  Mlp2Params obj_head;

  Mlp2Params layout_head;
  Mlp2Params relevance_head;

  Tensor par_embed;  // (vocab, par_hidden), one row per token
  GruParams par_enc;
  Tensor par_bridge_w;
  Vec par_bridge_b;
  GruParams par_dec;
  Tensor par_attn;
  Tensor par_gen_w;
  Vec par_gen_b;
  Tensor par_gate_w;
  Vec par_gate_b;

  static ModelWeights from_bundle(const WeightBundle& bundle);
};

struct CandidateTag {
  bool is_figure = false;
  std::size_t index = 0;  // sentence position in the section, or figure position in the document
};

// One section's view of the document in the shared space: contextualized
// sentence vectors plus the selectable candidate list (the section's
// sentences first, then every document figure).
struct SectionEmbedding {
  std::vector<Vec> contextual;  // Bi-GRU outputs, one per sentence
  std::vector<Vec> candidates;
  std::vector<CandidateTag> tags;
  std::size_t sentence_count = 0;
};

SectionEmbedding project_section(const Document& doc, std::size_t section,
                                 const EmbeddingBundle& emb, const ModelWeights& w);

// Recurrent tracker bookkeeping: the GRU state plus what the next step
// consumes as input (previous decision one-hot, previous attention context).
struct TrackerState {
  Vec h;
  Vec prev_action;   // one-hot over {advance, stop}; zero before the first step
  Vec prev_context;  // zero before the first step

  static TrackerState enter(Vec h0, std::size_t context_dim);
  void force_action(bool stop);  // teacher forcing overrides the fed-back decision
};

struct TrackerStep {
  bool stop = false;       // END_SEC / END_SLIDE
  double p_advance = 0.0;  // probability of NEW_SLIDE / NEW_OBJ
  Vec attention;           // distribution over the section candidates
  Vec context;             // attention-weighted candidate sum
};

// State for the first section: a learned projection of its head-tail
// contextual sentence pair.
Vec initial_section_state(const SectionEmbedding& first, const ModelWeights& w);

// Advances the section state with the next section's head-tail pair.
Vec pt_sec_step(const Vec& prev, const SectionEmbedding& sec, const ModelWeights& w);

TrackerStep pt_slide_step(TrackerState& state, const SectionEmbedding& sec, const ModelWeights& w);
TrackerStep pt_obj_step(TrackerState& state, const SectionEmbedding& sec, const ModelWeights& w);

// Argmax over candidates not yet used; ties resolve to the lowest index.
std::size_t select_object(const Vec& attention, const std::vector<bool>& used);

// Maps the object state and its attention context to a valid box: sigmoid
// outputs, width/height floored at 0.01, position scaled into the remaining
// extent.
BBox predict_layout(const Vec& h_obj, const Vec& context, const ModelWeights& w);

struct ParaphraseStep {
  std::size_t token = 0;
  double prob = 0.0;  // probability of the emitted token
  double gate = 0.0;  // generation-vs-copy mixture weight
};

struct ParaphraseResult {
  std::vector<std::size_t> tokens;  // emitted ids, trailing EOS included when produced
  std::vector<ParaphraseStep> steps;
};

// Greedy attention seq2seq with a copy gate over the source positions.
ParaphraseResult paraphrase(const std::vector<std::size_t>& source_ids, const Vec& h_obj,
                            const ModelWeights& w, std::size_t max_len = 40, bool use_hobj = true);

// Text-figure relevance in (0, 1) from the two shared-space embeddings.
double relevance(const Vec& e_txt, const Vec& e_fig, const ModelWeights& w);

struct PostRemoval {
  std::size_t slide = 0;
  std::string figure_id;
};

struct PostAddition {
  std::size_t slide = 0;
  std::string figure_id;
  BBox bbox;
};

// Threshold pass over placed figures: drops ones scoring under theta_R
// against their slide's text, adds unplaced document figures scoring over
// theta_A on their best slide (template-fitted below the text). Slides
// without text are left alone. `scores` is indexed [slide][document figure].
SlideDeck post_process(const SlideDeck& deck, const Document& doc,
                       const std::vector<std::vector<double>>& scores, double theta_R,
                       double theta_A, const TemplateSpec& spec,
                       std::vector<PostRemoval>* removed = nullptr,
                       std::vector<PostAddition>* added = nullptr);

struct DecisionTrace {
  bool advance = false;
  double p_advance = 0.0;
};

struct ObjectDecodeTrace {
  bool is_figure = false;
  std::size_t selection = 0;
  std::string source_id;  // document sentence or figure id
  Vec attention;
  BBox bbox;
  std::vector<std::size_t> tokens;  // text objects only
  std::vector<double> token_probs;
};

struct SlideDecodeTrace {
  std::size_t section = 0;
  std::vector<DecisionTrace> decisions;  // object-level
  std::vector<ObjectDecodeTrace> objects;
};

struct GenerationTrace {
  std::vector<std::vector<DecisionTrace>> section_decisions;  // slide-level, per section
  std::vector<SlideDecodeTrace> slides;
  std::vector<std::string> figure_order;          // column order of `relevance`
  std::vector<std::vector<double>> relevance;     // [slide][document figure]
  std::vector<PostRemoval> removed;
  std::vector<PostAddition> added;

  SectionAssignment assignment() const;
};

struct GenerationResult {
  SlideDeck deck;
  GenerationTrace trace;
};

GenerationResult generate_deck(const Document& doc, const EmbeddingBundle& emb,
                               const WeightBundle& weights, const Vocabulary& vocab,
                               const GenerationConfig& config = {});

struct LossReport {
  double structure_loss = 0.0;
  double selection_loss = 0.0;
  double paraphrase_loss = 0.0;
  double matching_loss = 0.0;
  double layout_loss = 0.0;
  double content_loss = 0.0;
  double total = 0.0;
  std::vector<BBox> predicted_boxes;  // per target object, decode order; not serialized
};

// Scores the model along a ground-truth trajectory: every recurrent input
// comes from `target`, the losses compare the model's distributions against
// it. Negative text-figure pairs for the matching term are drawn with
// `negatives_seed`.
LossReport teacher_forced_losses(const Document& doc, const EmbeddingBundle& emb,
                                 const WeightBundle& weights, const Vocabulary& vocab,
                                 const TrainingTarget& target, std::uint64_t negatives_seed,
                                 const GenerationConfig& config = {});

// Reproducible uniform(-0.1, 0.1) fill of every registered tensor.
WeightBundle init_weights(const ModelConfig& config, std::uint64_t seed);

std::string trace_to_json(const GenerationTrace& trace);
GenerationTrace trace_from_json(const std::string& text, const std::string& where = "trace");
void save_trace(const GenerationTrace& trace, const std::string& path);
GenerationTrace load_trace(const std::string& path);

std::string loss_to_json(const LossReport& report);

}  // namespace deckgen
