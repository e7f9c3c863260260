#include "deckgen/pipeline.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "testutil.hpp"

namespace {

using deckgen::Vec;
using testutil::unit_axis;

constexpr std::size_t kDim = 4;

// normalized sum of two axis vectors; cosine 1/sqrt(2) to both
Vec mix(std::size_t i, std::size_t j) {
  Vec v = unit_axis(kDim, i);
  const Vec o = unit_axis(kDim, j);
  for (std::size_t c = 0; c < kDim; ++c) v[c] = (v[c] + o[c]) / std::sqrt(2.0);
  return v;
}

deckgen::TextObject text_obj(const std::string& id, const std::string& text) {
  return deckgen::TextObject{id, text, {0.1, 0.2, 0.8, 0.1}};
}

deckgen::FigureObject fig_obj(const std::string& id) {
  return deckgen::FigureObject{id, {0.1, 0.4, 0.4, 0.3}};
}

// Two sections of two sentences, two figures; every sentence sits on its
// own embedding axis so cosines come out 0, 1, or 1/sqrt(2) by design.
deckgen::Document planted_doc() {
  deckgen::Document doc;
  doc.id = "planted";
  doc.sections.resize(2);
  doc.sections[0].title = "One";
  doc.sections[0].sentences = {{"s0", "alpha beta"}, {"s1", "gamma delta"}};
  doc.sections[1].title = "Two";
  doc.sections[1].sentences = {{"s2", "epsilon zeta"}, {"s3", "eta theta"}};
  doc.figures = {{"fA", "first figure", 1.5}, {"fB", "second figure", 1.0}};
  return doc;
}

deckgen::EmbeddingBundle planted_emb() {
  deckgen::EmbeddingBundle emb;
  emb.text = deckgen::EmbeddingStore(kDim);
  emb.text.add("s0", unit_axis(kDim, 0));
  emb.text.add("s1", unit_axis(kDim, 1));
  emb.text.add("s2", unit_axis(kDim, 2));
  emb.text.add("s3", unit_axis(kDim, 3));
  emb.image = deckgen::EmbeddingStore(3);
  emb.image.add("fA", unit_axis(3, 0));
  emb.image.add("fB", unit_axis(3, 1));
  return emb;
}

void add_deck_text(deckgen::EmbeddingBundle& emb, const std::string& id, const Vec& v) {
  emb.text.add(id, v);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("cosine identities") {
  CHECK(deckgen::cosine({1.0, 0.0}, {2.0, 0.0}) == 1.0);
  CHECK(deckgen::cosine({1.0, 0.0}, {0.0, 3.0}) == 0.0);
  // sqrt(2) * sqrt(2) lands one ulp under 2, so the quotient is not exactly -1
  CHECK(std::abs(deckgen::cosine({1.0, 1.0}, {-1.0, -1.0}) + 1.0) <= 1e-12);
  CHECK(deckgen::cosine({0.0, 0.0}, {1.0, 1.0}) == 0.0);
  CHECK(std::abs(deckgen::cosine({1.0, 0.0}, {1.0, 1.0}) - 1.0 / std::sqrt(2.0)) <= 1e-15);
  CHECK_THROWS_AS(deckgen::cosine({1.0}, {1.0, 2.0}), deckgen::DimMismatch);
}

TEST_CASE("slide_coverage counts carried-over content") {
  deckgen::EmbeddingBundle emb = planted_emb();
  add_deck_text(emb, "a", unit_axis(kDim, 0));
  add_deck_text(emb, "b", unit_axis(kDim, 1));
  add_deck_text(emb, "c", unit_axis(kDim, 0));
  add_deck_text(emb, "d", unit_axis(kDim, 2));

  deckgen::Slide prev, next;
  CHECK(deckgen::slide_coverage(prev, next, emb, 0.8) == 1.0);  // nothing to cover

  prev.objects = {text_obj("a", "x"), text_obj("b", "y")};
  next.objects = {text_obj("c", "x"), text_obj("d", "z")};
  // "a" reappears as "c" (same axis); "b" has no counterpart
  CHECK(deckgen::slide_coverage(prev, next, emb, 0.8) == 0.5);

  // an identically referenced figure needs no embedding similarity
  prev.objects = {fig_obj("fA")};
  next.objects = {fig_obj("fA")};
  CHECK(deckgen::slide_coverage(prev, next, emb, 0.8) == 1.0);

  next.objects = {fig_obj("fB")};  // orthogonal image vectors
  CHECK(deckgen::slide_coverage(prev, next, emb, 0.8) == 0.0);
}

TEST_CASE("stem_deck collapses a build-up chain") {
  deckgen::EmbeddingBundle emb = planted_emb();
  add_deck_text(emb, "a0", unit_axis(kDim, 0));
  add_deck_text(emb, "b0", unit_axis(kDim, 0));
  add_deck_text(emb, "b1", unit_axis(kDim, 1));
  add_deck_text(emb, "c0", unit_axis(kDim, 0));
  add_deck_text(emb, "c1", unit_axis(kDim, 1));
  add_deck_text(emb, "c2", unit_axis(kDim, 2));

  deckgen::SlideDeck deck;
  deck.id = "anim";
  deck.slides.resize(3);
  deck.slides[0].objects = {text_obj("a0", "one")};
  deck.slides[1].objects = {text_obj("b0", "one"), text_obj("b1", "two")};
  deck.slides[2].objects = {text_obj("c0", "one"), text_obj("c1", "two"), text_obj("c2", "three")};

  const deckgen::SlideDeck stemmed = deckgen::stem_deck(deck, emb);
  CHECK(stemmed.id == "anim");
  REQUIRE(stemmed.slides.size() == 1);
  CHECK(stemmed.slides[0].objects.size() == 3);

  // a second pass changes nothing
  const deckgen::SlideDeck twice = deckgen::stem_deck(stemmed, emb);
  CHECK(twice.slides.size() == 1);
}

TEST_CASE("stem_deck reaches slides exposed by earlier removals") {
  deckgen::EmbeddingBundle emb = planted_emb();
  add_deck_text(emb, "a0", unit_axis(kDim, 0));
  add_deck_text(emb, "x0", unit_axis(kDim, 3));
  add_deck_text(emb, "b0", unit_axis(kDim, 0));
  add_deck_text(emb, "b1", unit_axis(kDim, 3));

  // the middle slide hides that the first is covered by the last
  deckgen::SlideDeck deck;
  deck.slides.resize(3);
  deck.slides[0].objects = {text_obj("a0", "one")};
  deck.slides[1].objects = {text_obj("x0", "side")};
  deck.slides[2].objects = {text_obj("b0", "one"), text_obj("b1", "side")};

  const deckgen::SlideDeck stemmed = deckgen::stem_deck(deck, emb);
  REQUIRE(stemmed.slides.size() == 1);
  CHECK(stemmed.slides[0].objects.size() == 2);
}

TEST_CASE("stem_deck keeps slides under the coverage threshold") {
  deckgen::EmbeddingBundle emb = planted_emb();
  add_deck_text(emb, "a0", unit_axis(kDim, 0));
  add_deck_text(emb, "a1", unit_axis(kDim, 1));
  add_deck_text(emb, "b0", unit_axis(kDim, 0));
  add_deck_text(emb, "b1", unit_axis(kDim, 2));

  deckgen::SlideDeck deck;
  deck.slides.resize(2);
  deck.slides[0].objects = {text_obj("a0", "one"), text_obj("a1", "two")};
  deck.slides[1].objects = {text_obj("b0", "one"), text_obj("b1", "three")};

  // half of the first slide carries over: below the 0.8 default
  CHECK(deckgen::stem_deck(deck, emb).slides.size() == 2);
  // an explicit threshold at one half removes it
  CHECK(deckgen::stem_deck(deck, emb, 0.8, 0.5).slides.size() == 1);
}

TEST_CASE("match_slides_to_sections finds the planted assignment") {
  const deckgen::Document doc = planted_doc();
  deckgen::EmbeddingBundle emb = planted_emb();
  add_deck_text(emb, "d0", unit_axis(kDim, 0));
  add_deck_text(emb, "d1", unit_axis(kDim, 2));

  deckgen::SlideDeck deck;
  deck.slides.resize(2);
  deck.slides[0].objects = {text_obj("d0", "alpha beta")};
  deck.slides[1].objects = {text_obj("d1", "epsilon zeta")};

  CHECK(deckgen::match_slides_to_sections(deck, doc, emb.text) ==
        deckgen::SectionAssignment{0, 1});

  CHECK(deckgen::match_slides_to_sections(deckgen::SlideDeck{}, doc, emb.text).empty());
}

TEST_CASE("match_slides_to_sections stays monotone and breaks ties low") {
  const deckgen::Document doc = planted_doc();
  deckgen::EmbeddingBundle emb = planted_emb();
  add_deck_text(emb, "d0", unit_axis(kDim, 2));  // second-section content first
  add_deck_text(emb, "d1", unit_axis(kDim, 0));  // first-section content second

  deckgen::SlideDeck deck;
  deck.slides.resize(2);
  deck.slides[0].objects = {text_obj("d0", "epsilon zeta")};
  deck.slides[1].objects = {text_obj("d1", "alpha beta")};

  // the unconstrained optimum would swap the sections; under the
  // non-decreasing constraint both all-zero and all-one assignments tie,
  // and the smaller section indices win
  CHECK(deckgen::match_slides_to_sections(deck, doc, emb.text) ==
        deckgen::SectionAssignment{0, 0});

  // textless slides tie every section and fall to section zero
  deckgen::SlideDeck blank;
  blank.slides.resize(3);
  CHECK(deckgen::match_slides_to_sections(blank, doc, emb.text) ==
        deckgen::SectionAssignment{0, 0, 0});
}

TEST_CASE("match_slides_to_sections agrees with exhaustive enumeration") {
  // Signed axis vectors keep every cosine at exactly -1, 0, or 1, so the
  // totals both searches compare are order-independent integers and tie
  // handling is observable without floating-point ambiguity. Sections carry
  // one sentence and slides at most one object to keep the means literal.
  std::mt19937_64 gen(31);

  auto signed_axis = [&](std::size_t axis, bool flip) {
    Vec v = unit_axis(kDim, axis);
    if (flip) v[axis % kDim] = -1.0;
    return v;
  };

  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n_secs = 1 + gen() % 4;
    const std::size_t n_slides = 1 + gen() % 5;

    deckgen::Document doc;
    doc.id = "rand";
    deckgen::EmbeddingStore text(kDim);
    doc.sections.resize(n_secs);
    for (std::size_t t = 0; t < n_secs; ++t) {
      const std::string id = "s" + std::to_string(t);
      doc.sections[t].sentences.push_back({id, "text"});
      text.add(id, signed_axis(gen() % kDim, gen() % 2 == 0));
    }

    deckgen::SlideDeck deck;
    deck.slides.resize(n_slides);
    for (std::size_t j = 0; j < n_slides; ++j) {
      if (gen() % 4 == 0) continue;  // leave some slides textless
      const std::string id = "d" + std::to_string(j);
      deck.slides[j].objects.push_back(text_obj(id, "text"));
      text.add(id, signed_axis(gen() % kDim, gen() % 2 == 0));
    }

    // score matrix recomputed with plain loops
    oracle::Mat score(n_slides, oracle::Vec(n_secs, 0.0));
    for (std::size_t j = 0; j < n_slides; ++j) {
      oracle::Vec smean(kDim, 0.0);
      for (const auto& obj : deck.slides[j].objects) {
        const Vec& e = text.get(*deckgen::as_text(obj).id);
        for (std::size_t c = 0; c < kDim; ++c) smean[c] += e[c];
      }
      for (std::size_t t = 0; t < n_secs; ++t)
        score[j][t] = oracle::cosine(smean, text.get(doc.sections[t].sentences[0].id));
    }

    CAPTURE(rep);
    CHECK(deckgen::match_slides_to_sections(deck, doc, text) == oracle::best_assignment(score));
  }
}

TEST_CASE("match_sentences takes the argmax within the assigned section") {
  const deckgen::Document doc = planted_doc();
  deckgen::EmbeddingBundle emb = planted_emb();
  add_deck_text(emb, "d0", unit_axis(kDim, 1));    // exactly sentence s1
  add_deck_text(emb, "d1", mix(0, 1));             // tied between s0 and s1
  add_deck_text(emb, "d2", unit_axis(kDim, 0));    // first-section content on a second-section slide

  deckgen::SlideDeck deck;
  deck.slides.resize(2);
  deck.slides[0].objects = {text_obj("d0", "x"), text_obj("d1", "y"), fig_obj("fA")};
  deck.slides[1].objects = {text_obj("d2", "z")};

  const deckgen::MatchReport report =
      deckgen::match_sentences(deck, doc, {0, 1}, emb.text);
  REQUIRE(report.slides.size() == 2);
  REQUIRE(report.slides[0].size() == 3);

  const auto& m0 = std::get<deckgen::SentenceMatch>(*report.slides[0][0]);
  CHECK(m0.section == 0);
  CHECK(m0.sentence == 1);
  CHECK(m0.score == 1.0);

  // exact tie: the lower sentence index wins
  const auto& m1 = std::get<deckgen::SentenceMatch>(*report.slides[0][1]);
  CHECK(m1.sentence == 0);
  CHECK(std::abs(m1.score - 1.0 / std::sqrt(2.0)) <= 1e-15);

  // figures are not this pass's business
  CHECK_FALSE(report.slides[0][2].has_value());

  // the search never leaves the assigned section, even for a poor fit
  const auto& m2 = std::get<deckgen::SentenceMatch>(*report.slides[1][0]);
  CHECK(m2.section == 1);
  CHECK(m2.sentence == 0);
  CHECK(m2.score == 0.0);

  CHECK_THROWS_AS(deckgen::match_sentences(deck, doc, {0}, emb.text),
                  deckgen::InconsistentReport);
}

TEST_CASE("match_figures keeps scores at the threshold and drops below it") {
  const deckgen::Document doc = planted_doc();
  deckgen::EmbeddingBundle emb = planted_emb();
  emb.image.add("gA", unit_axis(3, 0));
  // a 3-4-5 triangle: cosine exactly 0.6 to fA and exactly 0.8 to fB
  emb.image.add("gB", {3.0, 4.0, 0.0});

  deckgen::SlideDeck deck;
  deck.slides.resize(1);
  deck.slides[0].objects = {text_obj("t", "x"), fig_obj("gA"), fig_obj("gB")};

  const deckgen::MatchReport strict = deckgen::match_figures(deck, doc, emb.image, 0.9);
  CHECK_FALSE(strict.slides[0][0].has_value());  // text ignored
  REQUIRE(strict.slides[0][1].has_value());
  CHECK(std::get<deckgen::FigureMatch>(*strict.slides[0][1]).figure_id == "fA");
  CHECK(std::get<deckgen::FigureMatch>(*strict.slides[0][1]).score == 1.0);
  CHECK_FALSE(strict.slides[0][2].has_value());  // 0.8 < 0.9

  // the best score lands exactly on theta_I and passes
  const deckgen::MatchReport at = deckgen::match_figures(deck, doc, emb.image, 0.8);
  REQUIRE(at.slides[0][2].has_value());
  CHECK(std::get<deckgen::FigureMatch>(*at.slides[0][2]).figure_id == "fB");
  CHECK(std::get<deckgen::FigureMatch>(*at.slides[0][2]).score == 0.8);
}

TEST_CASE("merge_reports unions disjoint slots and rejects conflicts") {
  deckgen::MatchReport sentences;
  sentences.assignment = {0};
  sentences.slides = {{deckgen::SentenceMatch{0, 1, 0.9}, std::nullopt}};

  deckgen::MatchReport figures;
  figures.assignment = {0};
  figures.slides = {{std::nullopt, deckgen::FigureMatch{"fA", 0.95}}};

  const deckgen::MatchReport merged = deckgen::merge_reports(sentences, figures);
  CHECK(std::get<deckgen::SentenceMatch>(*merged.slides[0][0]).sentence == 1);
  CHECK(std::get<deckgen::FigureMatch>(*merged.slides[0][1]).figure_id == "fA");

  deckgen::MatchReport clash = figures;
  clash.slides[0][0] = deckgen::FigureMatch{"fB", 0.5};
  CHECK_THROWS_AS(deckgen::merge_reports(sentences, clash), deckgen::InconsistentReport);

  deckgen::MatchReport ragged = figures;
  ragged.slides.push_back({});
  CHECK_THROWS_AS(deckgen::merge_reports(sentences, ragged), deckgen::InconsistentReport);
}

TEST_CASE("build_targets re-expresses the matched deck") {
  const deckgen::Document doc = planted_doc();
  const auto vocab = deckgen::Vocabulary::from_words({"alpha", "beta", "epsilon"});

  deckgen::SlideDeck deck;
  deck.slides.resize(2);
  deck.slides[0].objects = {text_obj("d0", "alpha beta"), fig_obj("gA")};
  deck.slides[1].objects = {text_obj("d1", "epsilon mystery"), text_obj("d2", "unmatched")};

  deckgen::MatchReport report;
  report.assignment = {0, 1};
  report.slides = {{deckgen::SentenceMatch{0, 0, 1.0}, deckgen::FigureMatch{"fA", 0.9}},
                   {deckgen::SentenceMatch{1, 0, 0.8}, std::nullopt}};

  const deckgen::TrainingTarget target = deckgen::build_targets(doc, deck, report, vocab);

  REQUIRE(target.section_actions.size() == 2);
  CHECK(target.section_actions[0] ==
        std::vector<deckgen::SectionAction>{deckgen::SectionAction::new_slide,
                                            deckgen::SectionAction::end_section});
  CHECK(target.section_actions[1] ==
        std::vector<deckgen::SectionAction>{deckgen::SectionAction::new_slide,
                                            deckgen::SectionAction::end_section});

  REQUIRE(target.slides.size() == 2);
  const auto& first = target.slides[0];
  CHECK(first.section == 0);
  CHECK(first.actions ==
        std::vector<deckgen::SlideAction>{deckgen::SlideAction::new_object,
                                          deckgen::SlideAction::new_object,
                                          deckgen::SlideAction::end_slide});
  REQUIRE(first.objects.size() == 2);
  CHECK_FALSE(first.objects[0].is_figure);
  CHECK(first.objects[0].selection == 0);
  CHECK(first.objects[0].bbox.y == 0.2);
  // "alpha beta" through the vocabulary, closed by the end marker
  CHECK(first.objects[0].tokens ==
        std::vector<std::size_t>{4, 5, deckgen::Vocabulary::kEos});
  CHECK(first.objects[1].is_figure);
  // figure slots come after the section's two sentences
  CHECK(first.objects[1].selection == 2);
  CHECK(first.objects[1].tokens.empty());

  // the unmatched object vanishes; unknown words map to the unk id
  const auto& second = target.slides[1];
  REQUIRE(second.objects.size() == 1);
  CHECK(second.section == 1);
  CHECK(second.objects[0].tokens ==
        std::vector<std::size_t>{6, deckgen::Vocabulary::kUnk, deckgen::Vocabulary::kEos});

  deckgen::MatchReport bad = report;
  bad.slides.pop_back();
  CHECK_THROWS_AS(deckgen::build_targets(doc, deck, bad, vocab), deckgen::InconsistentReport);
}

TEST_CASE("report json round trip") {
  deckgen::MatchReport report;
  report.assignment = {0, 0, 1};
  report.slides = {{deckgen::SentenceMatch{0, 2, 0.75}},
                   {std::nullopt},
                   {deckgen::FigureMatch{"fig9", 0.825}, std::nullopt}};

  const std::string json = deckgen::report_to_json(report);
  const deckgen::MatchReport back = deckgen::report_from_json(json);
  CHECK(back.assignment == report.assignment);
  REQUIRE(back.slides.size() == 3);
  CHECK(std::get<deckgen::SentenceMatch>(*back.slides[0][0]).sentence == 2);
  CHECK(std::get<deckgen::SentenceMatch>(*back.slides[0][0]).score == 0.75);
  CHECK_FALSE(back.slides[1][0].has_value());
  CHECK(std::get<deckgen::FigureMatch>(*back.slides[2][0]).figure_id == "fig9");
  CHECK(deckgen::report_to_json(back) == json);

  CHECK_THROWS_AS(deckgen::report_from_json("[]"), deckgen::SchemaViolation);
}

TEST_CASE("target json round trip") {
  deckgen::TrainingTarget target;
  target.section_actions = {{deckgen::SectionAction::new_slide, deckgen::SectionAction::end_section},
                            {deckgen::SectionAction::end_section}};
  deckgen::SlideTarget slide;
  slide.section = 0;
  slide.actions = {deckgen::SlideAction::new_object, deckgen::SlideAction::end_slide};
  deckgen::ObjectTarget obj;
  obj.is_figure = false;
  obj.selection = 3;
  obj.bbox = {0.1, 0.2, 0.3, 0.4};
  obj.tokens = {4, 7, deckgen::Vocabulary::kEos};
  slide.objects = {obj};
  target.slides = {slide};

  const std::string json = deckgen::target_to_json(target);
  const deckgen::TrainingTarget back = deckgen::target_from_json(json);
  REQUIRE(back.slides.size() == 1);
  CHECK(back.section_actions == target.section_actions);
  CHECK(back.slides[0].actions == target.slides[0].actions);
  CHECK(back.slides[0].objects[0].selection == 3);
  CHECK(back.slides[0].objects[0].tokens == obj.tokens);
  CHECK(back.slides[0].objects[0].bbox.h == 0.4);
  CHECK(deckgen::target_to_json(back) == json);

  CHECK_THROWS_AS(deckgen::target_from_json("{}"), deckgen::SchemaViolation);
}

}  // TEST_SUITE
