#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "deckgen/sweep.hpp"
#include "doctest.h"
#include "testutil.hpp"

using namespace deckgen;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Four scored candidates whose labels make 0.4 the lowest ideal cutoff:
// everything at or above it is a true match, everything below is not,
// except the 0.9 distractor that should be excluded but cannot be.
std::vector<FigureSweepCase> planted_cases() {
  return {{0.3, false}, {0.5, true}, {0.7, true}, {0.9, false}};
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("grid_points enumerates inclusive ranges") {
    const auto three = grid_points({0.0, 1.0, 0.5});
    REQUIRE(three.size() == 3);
    CHECK(three[0] == 0.0);
    CHECK(three[1] == 0.5);
    CHECK(three[2] == 1.0);

    const auto single = grid_points({0.8, 0.8, 0.1});
    REQUIRE(single.size() == 1);
    CHECK(single[0] == 0.8);

    const auto fine = grid_points({0.0, 1.0, 0.1});
    REQUIRE(fine.size() == 11);
    CHECK(fine.front() == 0.0);
    for (std::size_t k = 0; k < fine.size(); ++k)
      CHECK(std::abs(fine[k] - 0.1 * static_cast<double>(k)) <= 1e-9);

    const auto offset = grid_points({0.35, 0.65, 0.1});
    REQUIRE(offset.size() == 4);
    CHECK(std::abs(offset.back() - 0.65) <= 1e-9);
  }

  TEST_CASE("degenerate axes produce no points") {
    CHECK(grid_points({0.2, 0.4, 0.3}).empty());   // stride wider than the span
    CHECK(grid_points({0.6, 0.4, 0.1}).empty());   // inverted bounds
    CHECK(grid_points({0.0, 1.0, 0.0}).empty());   // zero step
    CHECK(grid_points({0.0, 1.0, -0.1}).empty());  // negative step
    CHECK(grid_points({-0.1, 0.5, 0.1}).empty());  // out of range low
    CHECK(grid_points({0.5, 1.2, 0.1}).empty());   // out of range high
  }

  TEST_CASE("figure sweep finds the planted threshold") {
    const FigureSweepResult res = sweep_figure(planted_cases(), {0.0, 1.0, 0.1});
    REQUIRE(res.rows.size() == 11);

    // keeping everything: half the kept candidates are real matches
    CHECK(res.rows[0].score.p == 0.5);
    CHECK(res.rows[0].score.r == 1.0);
    CHECK(std::abs(res.rows[0].score.f1 - 2.0 / 3.0) <= 1e-12);

    // three tenths of 0.1 land just above the 0.3 distractor's score, so the
    // fourth row already drops it; later rows tie 0.8 and lose on order
    CHECK(res.best == 3);
    CHECK(std::abs(res.rows[3].theta_I - 0.3) <= 1e-9);
    CHECK(std::abs(res.rows[3].score.p - 2.0 / 3.0) <= 1e-12);
    CHECK(res.rows[3].score.r == 1.0);
    CHECK(std::abs(res.rows[3].score.f1 - 0.8) <= 1e-12);
    CHECK(std::abs(res.rows[4].score.f1 - 0.8) <= 1e-12);
    CHECK(std::abs(res.rows[5].score.f1 - 0.8) <= 1e-12);

    // past both real matches nothing kept is correct
    CHECK(res.rows[10].score.f1 == 0.0);
  }

  TEST_CASE("figure sweep handles empty inputs") {
    const FigureSweepResult res = sweep_figure({}, {0.0, 1.0, 0.5});
    REQUIRE(res.rows.size() == 3);
    for (const auto& row : res.rows) {
      CHECK(row.score.p == 0.0);
      CHECK(row.score.r == 0.0);
      CHECK(row.score.f1 == 0.0);
    }
    CHECK(res.best == 0);

    CHECK_THROWS_AS(sweep_figure(planted_cases(), {0.6, 0.4, 0.1}), EmptyGrid);
  }

  TEST_CASE("post sweep rescreens figures at each grid point") {
    PostSweepCase c;
    c.doc = testutil::demo_doc();
    c.deck.id = "demo";
    c.deck.slides.resize(3);
    TextObject intro;
    intro.text = "panel basics";
    intro.bbox = {0.05, 0.18, 0.9, 0.07};
    TextObject costs = intro;
    costs.text = "cost talk";
    c.deck.slides[0].objects = {intro, FigureObject{"figX", {0.1, 0.5, 0.4, 0.3}}};
    c.deck.slides[1].objects = {costs};
    c.deck.slides[2].objects = {FigureObject{"figY", {0.1, 0.5, 0.4, 0.3}}};

    // relevance arrives in a shuffled column order; the sweep must put the
    // columns back into document order before thresholding
    c.trace.figure_order = {"figY", "figX", "figZ"};
    c.trace.relevance = {{0.30, 0.79, 0.85}, {0.90, 0.20, 0.91}, {0.99, 0.99, 0.99}};
    c.gt_figures = {"figZ", "figY"};

    // at (0.8, 0.9) figX drops off slide 0 and figZ joins slide 1, leaving
    // exactly the reference figure sequence
    const PostSweepResult res = sweep_post({c}, {0.8, 0.8, 0.1}, {0.9, 0.9, 0.1});
    REQUIRE(res.rows.size() == 1);
    CHECK(res.rows[0].theta_R == 0.8);
    CHECK(res.rows[0].theta_A == 0.9);
    CHECK(res.rows[0].score.p == 1.0);
    CHECK(res.rows[0].score.r == 1.0);
    CHECK(res.rows[0].score.f1 == 1.0);
    CHECK(res.best == 0);

    // a permissive removal grid keeps figX around and precision suffers
    const PostSweepResult loose = sweep_post({c}, {0.0, 0.8, 0.4}, {0.9, 0.9, 0.1});
    REQUIRE(loose.rows.size() == 3);
    CHECK(loose.rows[0].theta_R == 0.0);
    CHECK(std::abs(loose.rows[0].score.p - 2.0 / 3.0) <= 1e-12);
    CHECK(loose.rows[0].score.r == 1.0);
    CHECK(loose.best == 2);

    CHECK_THROWS_AS(sweep_post({c}, {0.6, 0.4, 0.1}, {0.9, 0.9, 0.1}), EmptyGrid);

    PostSweepCase bad = c;
    bad.trace.figure_order = {"figY", "figX"};
    CHECK_THROWS_AS(sweep_post({bad}, {0.8, 0.8, 0.1}, {0.9, 0.9, 0.1}), InconsistentReport);
  }

  TEST_CASE("sweep results serialize as csv") {
    const FigureSweepResult fig = sweep_figure(planted_cases(), {0.0, 1.0, 0.1});
    const auto fig_lines = split_lines(figure_sweep_csv(fig));
    REQUIRE(fig_lines.size() == 12);
    CHECK(fig_lines[0] == "theta_I,precision,recall,f1,best");
    CHECK(fig_lines[1] == "0.000000,0.500000,1.000000,0.666667,0");
    CHECK(fig_lines[4] == "0.300000,0.666667,1.000000,0.800000,1");
    for (std::size_t i = 1; i < fig_lines.size(); ++i)
      if (i != 4) CHECK(fig_lines[i].back() == '0');

    PostSweepCase c;
    c.doc = testutil::demo_doc();
    c.deck.id = "demo";
    c.deck.slides.resize(1);
    TextObject t;
    t.text = "panel basics";
    t.bbox = {0.05, 0.18, 0.9, 0.07};
    c.deck.slides[0].objects = {t, FigureObject{"figX", {0.1, 0.5, 0.4, 0.3}}};
    c.trace.figure_order = {"figX", "figY", "figZ"};
    c.trace.relevance = {{0.95, 0.1, 0.1}};
    c.gt_figures = {"figX"};

    const PostSweepResult post = sweep_post({c}, {0.8, 0.8, 0.1}, {0.9, 0.9, 0.1});
    const auto post_lines = split_lines(post_sweep_csv(post));
    REQUIRE(post_lines.size() == 2);
    CHECK(post_lines[0] == "theta_R,theta_A,precision,recall,f1,best");
    CHECK(post_lines[1] == "0.800000,0.900000,1.000000,1.000000,1.000000,1");
  }
}
