#include "deckgen/metrics.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

namespace {

deckgen::Slide slide_with_boxes(const std::vector<deckgen::BBox>& boxes) {
  deckgen::Slide s;
  for (const auto& b : boxes) s.objects.push_back(deckgen::TextObject{std::nullopt, "x", b});
  return s;
}

deckgen::Slide text_slide(const std::string& text) {
  deckgen::Slide s;
  s.objects.push_back(deckgen::TextObject{std::nullopt, text, {0.1, 0.2, 0.8, 0.1}});
  return s;
}

void add_figure(deckgen::Slide& s, const std::string& id) {
  s.objects.push_back(deckgen::FigureObject{id, {0.1, 0.5, 0.4, 0.3}});
}

std::vector<std::string> tokens(std::initializer_list<const char*> words) {
  return {words.begin(), words.end()};
}

double prf_f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("lcs_len hand cases") {
  CHECK(deckgen::lcs_len(tokens({"a", "b", "c", "b", "d", "a", "b"}),
                         tokens({"b", "d", "c", "a", "b", "a"})) == 4);
  CHECK(deckgen::lcs_len(tokens({}), tokens({"a"})) == 0);
  CHECK(deckgen::lcs_len(tokens({"a", "b"}), tokens({"a", "b"})) == 2);
  CHECK(deckgen::lcs_len(tokens({"a"}), tokens({"b"})) == 0);
  CHECK(deckgen::lcs_len(std::vector<int>{1, 2, 3, 1}, std::vector<int>{1, 1, 2}) == 2);
}

TEST_CASE("lcs_len agrees with the recursive definition") {
  std::mt19937_64 gen(51);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<int> a(gen() % 9), b(gen() % 9);
    for (int& x : a) x = static_cast<int>(gen() % 4);
    for (int& x : b) x = static_cast<int>(gen() % 4);
    CAPTURE(rep);
    CHECK(deckgen::lcs_len(a, b) == oracle::lcs(a, b));
  }
}

TEST_CASE("rouge_l identities and a worked example") {
  const auto same = deckgen::rouge_l(tokens({"x", "y", "z"}), tokens({"x", "y", "z"}));
  CHECK(same.p == 1.0);
  CHECK(same.r == 1.0);
  CHECK(same.f1 == 1.0);

  const auto none = deckgen::rouge_l(tokens({"x"}), tokens({"y"}));
  CHECK(none.f1 == 0.0);

  // LCS "the cat": p = 2/3, r = 2/5, f1 = 1/2
  const auto mixed = deckgen::rouge_l(tokens({"the", "cat", "sat"}),
                                      tokens({"the", "cat", "on", "the", "mat"}));
  CHECK(std::abs(mixed.p - 2.0 / 3.0) <= 1e-15);
  CHECK(std::abs(mixed.r - 0.4) <= 1e-15);
  CHECK(std::abs(mixed.f1 - 0.5) <= 1e-15);

  const auto empty = deckgen::rouge_l({}, {});
  CHECK(empty.f1 == 0.0);
}

TEST_CASE("deck_tokens lowercases content and skips titles") {
  deckgen::SlideDeck deck;
  deck.slides.push_back(text_slide("The Cat"));
  deck.slides[0].title = "IGNORED TITLE";
  deck.slides.push_back(text_slide("Sat, down."));
  add_figure(deck.slides[1], "fig1");

  CHECK(deckgen::deck_tokens(deck) == tokens({"the", "cat", "sat", "down"}));
  CHECK(deckgen::figure_sequence(deck) == tokens({"fig1"}));
}

TEST_CASE("figure_sequence follows slide then object order") {
  deckgen::SlideDeck deck;
  deck.slides.resize(2);
  add_figure(deck.slides[0], "b");
  add_figure(deck.slides[0], "a");
  add_figure(deck.slides[1], "c");
  CHECK(deckgen::figure_sequence(deck) == tokens({"b", "a", "c"}));
}

TEST_CASE("rouge_sl scales by the slide-count gap") {
  deckgen::SlideDeck gt;
  gt.slides.push_back(text_slide("a b c"));

  deckgen::SlideDeck same_count;
  same_count.slides.push_back(text_slide("a b"));
  CHECK(deckgen::rouge_sl(same_count, gt) ==
        deckgen::rouge_l(deckgen::deck_tokens(same_count), deckgen::deck_tokens(gt)).f1);

  deckgen::SlideDeck split;
  split.slides.push_back(text_slide("a b"));
  split.slides.push_back(text_slide("c"));
  // identical text over one extra slide: the full penalty factor survives
  CHECK(deckgen::rouge_sl(split, gt) == std::exp(-1.0));

  deckgen::SlideDeck empty;
  CHECK(deckgen::rouge_sl(empty, gt) == 0.0);
  CHECK_THROWS_AS(deckgen::rouge_sl(gt, empty), deckgen::EmptyGroundTruth);
}

TEST_CASE("lc_fs on hand cases") {
  const auto perfect = deckgen::lc_fs(tokens({"f1", "f2"}), tokens({"f1", "f2"}));
  CHECK(perfect.f1 == 1.0);

  // LCS f1,f3 against 3 predicted and 2 reference figures
  const auto partial = deckgen::lc_fs(tokens({"f1", "f2", "f3"}), tokens({"f1", "f3"}));
  CHECK(std::abs(partial.p - 2.0 / 3.0) <= 1e-15);
  CHECK(partial.r == 1.0);

  const auto nothing = deckgen::lc_fs({}, tokens({"f1"}));
  CHECK(nothing.p == 0.0);
  CHECK(nothing.r == 0.0);
  CHECK(nothing.f1 == 0.0);

  const auto both_empty = deckgen::lc_fs({}, {});
  CHECK(both_empty.f1 == 0.0);
}

TEST_CASE("lc_fs agrees with the recursive lcs") {
  std::mt19937_64 gen(52);
  const std::vector<std::string> pool = {"f0", "f1", "f2", "f3"};
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::string> a(gen() % 9), b(gen() % 9);
    for (auto& x : a) x = pool[gen() % pool.size()];
    for (auto& x : b) x = pool[gen() % pool.size()];

    const auto got = deckgen::lc_fs(a, b);
    const double l = static_cast<double>(oracle::lcs(a, b));
    const double p = a.empty() ? 0.0 : l / static_cast<double>(a.size());
    const double r = b.empty() ? 0.0 : l / static_cast<double>(b.size());
    CAPTURE(rep);
    CHECK(got.p == p);
    CHECK(got.r == r);
    CHECK(std::abs(got.f1 - prf_f1(p, r)) <= 1e-15);
  }
}

TEST_CASE("tfr relates text across decks figure by figure") {
  deckgen::Document doc;
  doc.id = "d";
  doc.sections.resize(1);
  doc.sections[0].sentences = {{"s0", "x"}};
  doc.figures = {{"f1", "cap", 1.0}, {"f2", "cap", 1.0}};

  deckgen::SlideDeck gt;
  gt.slides.push_back(text_slide("alpha beta"));
  add_figure(gt.slides[0], "f1");

  deckgen::SlideDeck pred;
  pred.slides.push_back(text_slide("alpha"));
  add_figure(pred.slides[0], "f1");

  // p = 1, r = 1/2 for the only reference-shown figure
  CHECK(std::abs(deckgen::tfr(pred, gt, doc) - 2.0 / 3.0) <= 1e-15);
  // the literal denominator counts the never-shown f2 as a zero
  CHECK(std::abs(deckgen::tfr(pred, gt, doc, true) - 1.0 / 3.0) <= 1e-15);

  // identical decks relate perfectly
  CHECK(deckgen::tfr(gt, gt, doc) == 1.0);

  // a figure with no text on either side counts as fully related
  deckgen::SlideDeck bare_gt;
  bare_gt.slides.resize(1);
  add_figure(bare_gt.slides[0], "f2");
  deckgen::SlideDeck bare_pred;
  bare_pred.slides.resize(1);
  add_figure(bare_pred.slides[0], "f2");
  CHECK(deckgen::tfr(bare_pred, bare_gt, doc) == 1.0);

  // missing from the prediction entirely: empty against "alpha beta"
  deckgen::SlideDeck absent;
  absent.slides.resize(1);
  CHECK(deckgen::tfr(absent, gt, doc) == 0.0);

  // no reference figures at all: vacuously perfect
  deckgen::SlideDeck no_figs;
  no_figs.slides.push_back(text_slide("words"));
  CHECK(deckgen::tfr(pred, no_figs, doc) == 1.0);
}

TEST_CASE("slide_iou conventions and hand cases") {
  CHECK(deckgen::slide_iou({}, {}) == 1.0);
  CHECK(deckgen::slide_iou({{0.1, 0.1, 0.2, 0.2}}, {}) == 0.0);
  CHECK(deckgen::slide_iou({}, {{0.1, 0.1, 0.2, 0.2}}) == 0.0);

  const deckgen::BBox a{0.0, 0.0, 0.4, 0.4};
  const deckgen::BBox b{0.5, 0.5, 0.4, 0.4};
  CHECK(deckgen::slide_iou({a, b}, {a, b}) == 1.0);
  // one box matched, the unmatched side inflates the denominator
  CHECK(deckgen::slide_iou({a}, {a, b}) == 0.5);
}

TEST_CASE("slide_iou pairs greedily past six boxes") {
  const deckgen::BBox box{0.2, 0.2, 0.3, 0.3};
  const std::vector<deckgen::BBox> seven(7, box);
  CHECK(deckgen::slide_iou(seven, seven) == 1.0);
}

TEST_CASE("slide_iou agrees with exhaustive pairing") {
  std::mt19937_64 gen(53);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + gen() % 6, m = 1 + gen() % 6;
    std::vector<deckgen::BBox> pred(n), gt(m);
    std::vector<oracle::Box> opred(n), ogt(m);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = testutil::rand_box(gen);
      opred[i] = {pred[i].x, pred[i].y, pred[i].w, pred[i].h};
    }
    for (std::size_t j = 0; j < m; ++j) {
      gt[j] = testutil::rand_box(gen);
      ogt[j] = {gt[j].x, gt[j].y, gt[j].w, gt[j].h};
    }
    CAPTURE(rep);
    CHECK(std::abs(deckgen::slide_iou(pred, gt) - oracle::slide_iou(opred, ogt)) <= 1e-9);
  }
}

TEST_CASE("miou conventions") {
  deckgen::SlideDeck gt;
  gt.slides.push_back(slide_with_boxes({{0.1, 0.1, 0.3, 0.3}}));
  gt.slides.push_back(slide_with_boxes({{0.5, 0.5, 0.3, 0.3}}));

  CHECK(deckgen::miou(deckgen::SlideDeck{}, gt) == 0.0);
  // reconstructing a box edge as (x + w) - x costs an ulp, so allow slack
  CHECK(std::abs(deckgen::miou(gt, gt) - 1.0) <= 1e-12);

  // an extra unmatched slide halves the normalized score
  deckgen::SlideDeck padded = gt;
  padded.slides.push_back(slide_with_boxes({{0.0, 0.8, 0.1, 0.1}}));
  const double three = deckgen::miou(padded, gt);
  CHECK(std::abs(three - 2.0 / 3.0) <= 1e-12);
}

TEST_CASE("miou agrees with exhaustive monotone alignment") {
  std::mt19937_64 gen(54);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t p = 1 + gen() % 4, g = 1 + gen() % 4;
    deckgen::SlideDeck pred, gt;
    std::vector<std::vector<oracle::Box>> opred(p), ogt(g);
    for (std::size_t i = 0; i < p; ++i) {
      std::vector<deckgen::BBox> boxes(gen() % 4);
      for (auto& b : boxes) b = testutil::rand_box(gen);
      pred.slides.push_back(slide_with_boxes(boxes));
      for (const auto& b : boxes) opred[i].push_back({b.x, b.y, b.w, b.h});
    }
    for (std::size_t j = 0; j < g; ++j) {
      std::vector<deckgen::BBox> boxes(gen() % 4);
      for (auto& b : boxes) b = testutil::rand_box(gen);
      gt.slides.push_back(slide_with_boxes(boxes));
      for (const auto& b : boxes) ogt[j].push_back({b.x, b.y, b.w, b.h});
    }

    oracle::Mat score(p, oracle::Vec(g, 0.0));
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < g; ++j) score[i][j] = oracle::slide_iou(opred[i], ogt[j]);
    const double want = oracle::best_monotone(score) / static_cast<double>(p);

    CAPTURE(rep);
    CHECK(std::abs(deckgen::miou(pred, gt) - want) <= 1e-9);
  }
}

TEST_CASE("structure_tokens linearizes sections per contiguous run") {
  deckgen::SlideDeck deck;
  deck.slides.push_back(slide_with_boxes({{0.1, 0.1, 0.2, 0.2}, {0.4, 0.4, 0.2, 0.2}}));
  deck.slides.push_back(slide_with_boxes({{0.1, 0.1, 0.2, 0.2}}));
  deck.slides.push_back(
      slide_with_boxes({{0.1, 0.1, 0.2, 0.2}, {0.4, 0.4, 0.2, 0.2}, {0.1, 0.7, 0.2, 0.2}}));

  using T = deckgen::StructureToken;
  const auto grouped = deckgen::structure_tokens(deck, {0, 0, 1});
  CHECK(grouped == std::vector<T>{T::section, T::slide, T::object, T::object, T::slide, T::object,
                                  T::section, T::slide, T::object, T::object, T::object});

  // a section revisited after a gap opens a fresh run
  const auto alternating = deckgen::structure_tokens(deck, {0, 1, 0});
  std::size_t sections = 0;
  for (const auto t : alternating)
    if (t == T::section) ++sections;
  CHECK(sections == 3);

  CHECK_THROWS_AS(deckgen::structure_tokens(deck, {0, 0}), deckgen::InconsistentReport);
}

TEST_CASE("structural_lcs endpoints") {
  using T = deckgen::StructureToken;
  const std::vector<T> seq{T::section, T::slide, T::object};
  CHECK(deckgen::structural_lcs(seq, seq) == 1.0);
  CHECK(deckgen::structural_lcs({}, seq) == 0.0);
  CHECK(deckgen::structural_lcs({}, {}) == 0.0);
  // shared prefix of two out of (3+4)/2 tokens
  const std::vector<T> longer{T::section, T::slide, T::slide, T::object};
  CHECK(std::abs(deckgen::structural_lcs(seq, longer) - 2.0 * 3.0 / 7.0) <= 1e-15);
}

TEST_CASE("evaluate_decks scores a deck against itself perfectly") {
  deckgen::Document doc;
  doc.id = "d";
  doc.sections.resize(2);
  doc.sections[0].sentences = {{"s0", "x"}};
  doc.sections[1].sentences = {{"s1", "y"}};
  doc.figures = {{"f1", "cap", 1.0}};

  deckgen::SlideDeck deck;
  deck.slides.push_back(text_slide("alpha beta"));
  add_figure(deck.slides[0], "f1");
  deck.slides.push_back(text_slide("gamma"));

  const deckgen::SectionAssignment assign{0, 1};
  const deckgen::MetricReport report = deckgen::evaluate_decks(deck, deck, doc, assign, assign);
  CHECK(report.rouge_l.f1 == 1.0);
  CHECK(report.rouge_sl == 1.0);
  CHECK(report.lc_fs.f1 == 1.0);
  CHECK(report.tfr == 1.0);
  CHECK(std::abs(report.miou - 1.0) <= 1e-12);
  CHECK(report.structural_lcs == 1.0);
}

TEST_CASE("metric report json carries every field") {
  deckgen::MetricReport report;
  report.rouge_l = {0.5, 0.25, 1.0 / 3.0};
  report.rouge_sl = 0.125;
  report.lc_fs = {1.0, 0.5, 2.0 / 3.0};
  report.tfr = 0.75;
  report.miou = 0.375;
  report.structural_lcs = 0.8125;

  const auto j = nlohmann::json::parse(deckgen::metric_report_to_json(report));
  CHECK(j.at("rouge_l").at("p").get<double>() == 0.5);
  CHECK(j.at("rouge_l").at("f1").get<double>() == 1.0 / 3.0);
  CHECK(j.at("rouge_sl").get<double>() == 0.125);
  CHECK(j.at("lc_fs").at("r").get<double>() == 0.5);
  CHECK(j.at("tfr").get<double>() == 0.75);
  CHECK(j.at("miou").get<double>() == 0.375);
  CHECK(j.at("structural_lcs").get<double>() == 0.8125);
}

}  // TEST_SUITE
