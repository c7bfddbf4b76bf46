#include <fstream>
#include <sstream>

#include "cabl/parser.hpp"
#include "cabl/partition.hpp"
#include "cabl/rng.hpp"
#include "cabl/tasks.hpp"
#include "doctest.h"

using namespace cabl::tasks;
using cabl::logic::KbView;
using cabl::logic::TargetValue;

TEST_CASE("addition KB: rule counts per base") {
  CHECK(Task::addition({10, 1}).kb().rule_count() == 14);
  CHECK(Task::addition({16, 1}).kb().rule_count() == 20);
  CHECK(Task::addition({10, 1}).kb().concepts().size() == 10);
  CHECK(Task::addition({16, 1}).kb().concepts().size() == 16);
}

TEST_CASE("addition KB: worked examples") {
  Task hex = Task::addition({16, 1});
  CHECK(std::get<std::int64_t>(hex.true_target({15, 15}, {})) == 30);

  Task dec = Task::addition({10, 3});
  CHECK(std::get<std::int64_t>(dec.true_target({0, 0, 0, 0, 0, 0}, {})) == 0);
  CHECK(std::get<std::int64_t>(dec.true_target({1, 3, 1, 7, 3, 7}, {})) == 131 + 737);
}

TEST_CASE("addition KB: 1000 random operand pairs per configuration match integer addition") {
  cabl::Rng rng(5);
  for (auto [base, digits] : {std::pair{10, 1}, {10, 2}, {16, 1}, {16, 2}}) {
    Task task = Task::addition({base, digits});
    std::int64_t max_operand = 1;
    for (int i = 0; i < digits; ++i) max_operand *= base;
    for (int trial = 0; trial < 1000; ++trial) {
      std::int64_t a = rng.next_u64() % static_cast<std::uint64_t>(max_operand);
      std::int64_t b = rng.next_u64() % static_cast<std::uint64_t>(max_operand);
      std::vector<int> labels;
      for (std::int64_t v : {a, b}) {
        std::int64_t rest = v;
        std::vector<int> ds(static_cast<std::size_t>(digits));
        for (int i = digits - 1; i >= 0; --i) {
          ds[static_cast<std::size_t>(i)] = static_cast<int>(rest % base);
          rest /= base;
        }
        labels.insert(labels.end(), ds.begin(), ds.end());
      }
      CHECK(std::get<std::int64_t>(task.true_target(labels, {})) == a + b);
    }
  }
}

TEST_CASE("chess KB: geometry fixtures") {
  Task task = Task::chess({8, 2});
  int knight = task.kb().concept_index("knight");
  int rook = task.kb().concept_index("rook");
  int king = task.kb().concept_index("king");
  int pawn = task.kb().concept_index("pawn");

  CHECK(std::get<bool>(task.true_target({knight, rook}, {{{0, 0}, {1, 2}}})) == true);
  CHECK(std::get<bool>(task.true_target({king, king}, {{{0, 0}, {7, 7}}})) == false);
  CHECK(std::get<bool>(task.true_target({rook, pawn}, {{{0, 0}, {0, 5}}})) == true);
  // pawn captures diagonally toward +y only
  CHECK(std::get<bool>(task.true_target({pawn, rook}, {{{3, 3}, {4, 4}}})) == true);
  CHECK(std::get<bool>(task.true_target({pawn, rook}, {{{3, 3}, {4, 2}}})) == false);
}

TEST_CASE("chess KB: solver agrees with the coordinate-arithmetic oracle on 1000 boards") {
  Task task = Task::chess({8, 3});
  cabl::Rng rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    ExampleContext ctx = task.sample_context(rng);
    std::vector<int> labels(3);
    for (int& l : labels) l = rng.uniform_int(0, 5);
    bool solver = std::get<bool>(task.true_target(labels, ctx));
    bool geometry = chess_attack_geometry(labels, ctx.positions);
    CHECK(solver == geometry);
  }
}

TEST_CASE("chess: sampled contexts have distinct positions") {
  Task task = Task::chess({4, 6});
  cabl::Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    ExampleContext ctx = task.sample_context(rng);
    REQUIRE(ctx.positions.size() == 6);
    for (std::size_t i = 0; i < ctx.positions.size(); ++i)
      for (std::size_t j = i + 1; j < ctx.positions.size(); ++j)
        CHECK(ctx.positions[i] != ctx.positions[j]);
  }
}

TEST_CASE("chess: overlapping positions are rejected") {
  Task task = Task::chess({8, 2});
  CHECK_THROWS_AS(task.context_facts({{{2, 2}, {2, 2}}}), cabl::logic::KbError);
}

TEST_CASE("chess curriculum starts with exactly the knight domain") {
  Task task = Task::chess({8, 2});
  cabl::curriculum::Curriculum cur = cabl::curriculum::partition(task.kb(), std::nullopt);
  REQUIRE(cur.phase_count() == 6);
  REQUIRE(cur.phases[0].domain.size() == 1);
  CHECK(task.kb().concepts()[static_cast<std::size_t>(cur.phases[0].domain[0])].name ==
        "knight");
}

TEST_CASE("shipped KB files match the generators byte for byte") {
  auto file_text = [](const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  std::string dir = CABL_KB_DIR;
  CHECK(file_text(dir + "/addition_base10.pl") == addition_kb_text({10, 1}));
  CHECK(file_text(dir + "/addition_base16.pl") == addition_kb_text({16, 1}));
  CHECK(file_text(dir + "/chess.pl") == chess_kb_text());
}

TEST_CASE("generated KB text round-trips through the parser") {
  for (const std::string& text :
       {addition_kb_text({10, 2}), addition_kb_text({16, 1}), chess_kb_text()}) {
    cabl::logic::KnowledgeBase kb = cabl::logic::parse_program(text);
    CHECK(kb.rule_count() > 0);
    // and the parsed rules render back to parseable clauses
    std::ostringstream os;
    for (const auto& c : kb.concepts()) os << "@concept " << c.to_string() << ".\n";
    os << "@target " << kb.target().to_string() << ".\n";
    for (const auto& r : kb.rules()) os << r.to_string() << '\n';
    cabl::logic::KnowledgeBase reparsed = cabl::logic::parse_program(os.str());
    CHECK(reparsed.rule_count() == kb.rule_count());
  }
}

TEST_CASE("task validation rejects bad specs") {
  CHECK_THROWS_AS(Task::addition({12, 1}), cabl::logic::KbError);
  CHECK_THROWS_AS(Task::addition({10, 0}), cabl::logic::KbError);
  CHECK_THROWS_AS(Task::chess({2, 2}), cabl::logic::KbError);
  CHECK_THROWS_AS(Task::chess({8, 1}), cabl::logic::KbError);
}
