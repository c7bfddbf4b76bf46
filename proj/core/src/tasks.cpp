#include "cabl/tasks.hpp"

#include <cmath>
#include <sstream>

#include "cabl/parser.hpp"

namespace cabl::tasks {

using logic::Atom;
using logic::Literal;
using logic::Term;

namespace {

std::string pos_name(int i) { return "p" + std::to_string(i + 1); }

std::vector<Rule> label_facts_at_positions(const std::vector<std::string>& labels) {
  std::vector<Rule> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back(Rule{-1, Atom{labels[i], {Term::symbol(pos_name(static_cast<int>(i)))}}, {}});
  }
  return out;
}

class AdditionOracle : public TaskOracle {
 public:
  AdditionOracle(int base, int digits) : base_(base), digits_(digits) {}

  AbductionSpace enumerate(const TargetValue& y, int m,
                           const std::vector<int>& domain) const override {
    const std::int64_t* target = std::get_if<std::int64_t>(&y);
    if (!target) throw logic::KbError("addition oracle needs an integer target");

    AbductionSpace out;
    out.target = y;
    out.domain = domain;
    out.seq_len = m;

    std::vector<bool> in_domain(static_cast<std::size_t>(base_), false);
    for (int d : domain)
      if (d < base_) in_domain[static_cast<std::size_t>(d)] = true;

    std::int64_t max_operand = 1;
    for (int i = 0; i < digits_; ++i) max_operand *= base_;
    --max_operand;

    // Enumerating the first operand in ascending order yields members in
    // lexicographic label order; the second operand is determined.
    std::int64_t lo = std::max<std::int64_t>(0, *target - max_operand);
    std::int64_t hi = std::min(max_operand, *target);
    for (std::int64_t a = lo; a <= hi; ++a) {
      std::int64_t b = *target - a;
      LabelSeq z;
      z.reserve(static_cast<std::size_t>(m));
      bool ok = true;
      for (std::int64_t operand : {a, b}) {
        std::int64_t rest = operand;
        std::vector<int> ds(static_cast<std::size_t>(digits_));
        for (int i = digits_ - 1; i >= 0; --i) {
          ds[static_cast<std::size_t>(i)] = static_cast<int>(rest % base_);
          rest /= base_;
        }
        for (int d : ds) {
          if (!in_domain[static_cast<std::size_t>(d)]) {
            ok = false;
            break;
          }
          z.push_back(d);
        }
        if (!ok) break;
      }
      if (ok) out.members.push_back(std::move(z));
    }
    return out;
  }

 private:
  int base_;
  int digits_;
};

class ChessOracle : public TaskOracle {
 public:
  explicit ChessOracle(std::vector<std::pair<int, int>> positions)
      : positions_(std::move(positions)) {}

  AbductionSpace enumerate(const TargetValue& y, int m,
                           const std::vector<int>& domain) const override {
    const bool* target = std::get_if<bool>(&y);
    if (!target) throw logic::KbError("chess oracle needs a boolean target");

    AbductionSpace out;
    out.target = y;
    out.domain = domain;
    out.seq_len = m;
    if (domain.empty() || m <= 0) return out;

    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    for (;;) {
      LabelSeq z(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i)
        z[static_cast<std::size_t>(i)] =
            domain[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      if (chess_attack_geometry(z, positions_) == *target) out.members.push_back(std::move(z));

      int pos = m - 1;
      while (pos >= 0) {
        if (++idx[static_cast<std::size_t>(pos)] < static_cast<int>(domain.size())) break;
        idx[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
    return out;
  }

 private:
  std::vector<std::pair<int, int>> positions_;
};

}  // namespace

std::vector<std::string> digit_names(int base) {
  static const std::vector<std::string> names = {
      "zero", "one",  "two", "three",    "four",     "five",    "six",     "seven",
      "eight", "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen"};
  return {names.begin(), names.begin() + base};
}

std::string addition_kb_text(const AdditionTaskSpec& spec) {
  std::ostringstream os;
  os << "% Multi-digit addition, base " << spec.base << ".\n";
  for (const std::string& n : digit_names(spec.base)) os << "@concept " << n << "/1.\n";
  os << "@target addition/3.\n\n";
  os << "addition(Num1, Num2, Y) :- number(Num1, Res1), number(Num2, Res2), "
        "Y is Res1 + Res2.\n";
  os << "number([], Res, Res).\n";
  os << "number([H|T], Acc, Res) :- digit(H, D), Acc1 is D + " << spec.base
     << " * Acc, number(T, Acc1, Res).\n";
  os << "number(X, N) :- number(X, 0, N).\n";
  std::vector<std::string> names = digit_names(spec.base);
  for (int v = 0; v < spec.base; ++v)
    os << "digit(Pos, " << v << ") :- " << names[static_cast<std::size_t>(v)] << "(Pos).\n";
  return os.str();
}

std::string chess_kb_text() {
  return R"(% Chess attack: does any piece attack another piece on the board?
% Board positions are per-example ground pos/3 facts; blocking is not modelled
% and pawns capture toward +y.
@concept rook/1.
@concept pawn/1.
@concept bishop/1.
@concept king/1.
@concept knight/1.
@concept queen/1.
@target attack/0.

attack :- knight(P), pos(P, X1, Y1), pos(Q, X2, Y2), lshape(X1, Y1, X2, Y2).
attack :- rook(P), pos(P, X1, Y1), pos(Q, X2, Y2), line(X1, Y1, X2, Y2).
attack :- bishop(P), pos(P, X1, Y1), pos(Q, X2, Y2), diag(X1, Y1, X2, Y2).
attack :- queen(P), pos(P, X1, Y1), pos(Q, X2, Y2), line_or_diag(X1, Y1, X2, Y2).
attack :- king(P), pos(P, X1, Y1), pos(Q, X2, Y2), adjacent(X1, Y1, X2, Y2).
attack :- pawn(P), pos(P, X1, Y1), pos(Q, X2, Y2), pawn_capture(X1, Y1, X2, Y2).

lshape(X1, Y1, X2, Y2) :- DX is abs(X1 - X2), DX = 1, DY is abs(Y1 - Y2), DY = 2.
lshape(X1, Y1, X2, Y2) :- DX is abs(X1 - X2), DX = 2, DY is abs(Y1 - Y2), DY = 1.

line(X1, Y1, X2, Y2) :- X1 = X2, Y1 \= Y2.
line(X1, Y1, X2, Y2) :- Y1 = Y2, X1 \= X2.

diag(X1, Y1, X2, Y2) :- diag_rise(X1, Y1, X2, Y2).
diag(X1, Y1, X2, Y2) :- diag_fall(X1, Y1, X2, Y2).
diag_rise(X1, Y1, X2, Y2) :- DX is X2 - X1, DY is Y2 - Y1, DX = DY, DX \= 0.
diag_fall(X1, Y1, X2, Y2) :- DX is X2 - X1, DY is Y1 - Y2, DX = DY, DX \= 0.

line_or_diag(X1, Y1, X2, Y2) :- line(X1, Y1, X2, Y2).
line_or_diag(X1, Y1, X2, Y2) :- diag(X1, Y1, X2, Y2).

adjacent(X1, Y1, X2, Y2) :- side_step(X1, Y1, X2, Y2).
adjacent(X1, Y1, X2, Y2) :- diag_step(X1, Y1, X2, Y2).
side_step(X1, Y1, X2, Y2) :- DX is abs(X1 - X2), DY is abs(Y1 - Y2), S is DX + DY, S = 1.
diag_step(X1, Y1, X2, Y2) :- DX is abs(X1 - X2), DX = 1, DY is abs(Y1 - Y2), DY = 1.

pawn_capture(X1, Y1, X2, Y2) :- DX is X2 - X1, DX = 1, DY is Y2 - Y1, DY = 1.
pawn_capture(X1, Y1, X2, Y2) :- DX is X1 - X2, DX = 1, DY is Y2 - Y1, DY = 1.
)";
}

bool chess_attack_geometry(const std::vector<int>& labels,
                           const std::vector<std::pair<int, int>>& positions) {
  // Concept declaration order: rook, pawn, bishop, king, knight, queen.
  enum { kRook = 0, kPawn = 1, kBishop = 2, kKing = 3, kKnight = 4, kQueen = 5 };
  const std::size_t n = positions.size();
  auto rook_geo = [](int dx, int dy) {
    return (dx == 0 && dy != 0) || (dy == 0 && dx != 0);
  };
  auto bishop_geo = [](int dx, int dy) { return dx != 0 && std::abs(dx) == std::abs(dy); };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      int dx = positions[j].first - positions[i].first;
      int dy = positions[j].second - positions[i].second;
      int adx = std::abs(dx), ady = std::abs(dy);
      bool hit = false;
      switch (labels[i]) {
        case kRook: hit = rook_geo(dx, dy); break;
        case kPawn: hit = adx == 1 && dy == 1; break;
        case kBishop: hit = bishop_geo(dx, dy); break;
        case kKing: hit = std::max(adx, ady) == 1; break;
        case kKnight: hit = (adx == 1 && ady == 2) || (adx == 2 && ady == 1); break;
        case kQueen: hit = rook_geo(dx, dy) || bishop_geo(dx, dy); break;
        default: break;
      }
      if (hit) return true;
    }
  }
  return false;
}

Task Task::addition(const AdditionTaskSpec& spec) {
  if (spec.base != 10 && spec.base != 16)
    throw logic::KbError("addition task supports base 10 or 16");
  if (spec.digits < 1) throw logic::KbError("addition task needs at least one digit");

  Task t;
  t.name_ = "addition";
  t.addition_ = spec;
  t.kb_text_ = addition_kb_text(spec);
  t.kb_ = std::make_shared<const KnowledgeBase>(logic::parse_program(t.kb_text_));
  t.seq_len_ = 2 * spec.digits;
  t.boolean_target_ = false;

  std::vector<Term> first, second;
  for (int i = 0; i < spec.digits; ++i) first.push_back(Term::symbol(pos_name(i)));
  for (int i = spec.digits; i < 2 * spec.digits; ++i)
    second.push_back(Term::symbol(pos_name(i)));
  t.query_.goal = {Literal{Atom{
      "addition",
      {Term::list(std::move(first)), Term::list(std::move(second)), Term::var("Y")}}}};
  t.query_.answer_var = "Y";
  t.query_.label_facts = label_facts_at_positions;
  return t;
}

Task Task::chess(const ChessTaskSpec& spec) {
  if (spec.board_size < 3) throw logic::KbError("chess board size must be at least 3");
  if (spec.piece_count < 2 || spec.piece_count > spec.board_size * spec.board_size)
    throw logic::KbError("chess piece count must be in [2, board^2]");

  Task t;
  t.name_ = "chess";
  t.chess_ = spec;
  t.kb_text_ = chess_kb_text();
  t.kb_ = std::make_shared<const KnowledgeBase>(logic::parse_program(t.kb_text_));
  t.seq_len_ = spec.piece_count;
  t.boolean_target_ = true;
  t.query_.goal = {Literal{Atom{"attack", {}}}};
  t.query_.answer_var.clear();
  t.query_.label_facts = label_facts_at_positions;
  return t;
}

ExampleContext Task::sample_context(Rng& rng) const {
  ExampleContext ctx;
  if (!is_chess()) return ctx;
  const int b = chess_->board_size;
  while (static_cast<int>(ctx.positions.size()) < chess_->piece_count) {
    std::pair<int, int> p{rng.uniform_int(0, b - 1), rng.uniform_int(0, b - 1)};
    bool taken = false;
    for (const auto& q : ctx.positions) taken = taken || q == p;
    if (!taken) ctx.positions.push_back(p);
  }
  return ctx;
}

std::vector<Rule> Task::context_facts(const ExampleContext& ctx) const {
  for (std::size_t i = 0; i < ctx.positions.size(); ++i)
    for (std::size_t j = i + 1; j < ctx.positions.size(); ++j)
      if (ctx.positions[i] == ctx.positions[j])
        throw logic::KbError("overlapping piece positions in a chess example");
  std::vector<Rule> out;
  for (std::size_t i = 0; i < ctx.positions.size(); ++i) {
    out.push_back(Rule{-1,
                       Atom{"pos",
                            {Term::symbol(pos_name(static_cast<int>(i))),
                             Term::integer(ctx.positions[i].first),
                             Term::integer(ctx.positions[i].second)}},
                       {}});
  }
  return out;
}

TargetValue Task::true_target(const LabelSeq& labels, const ExampleContext& ctx) const {
  std::vector<std::string> names;
  names.reserve(labels.size());
  for (int l : labels) names.push_back(kb_->concepts()[static_cast<std::size_t>(l)].name);
  std::optional<TargetValue> got =
      logic::deduce(logic::KbView::full(*kb_), names, query_, context_facts(ctx));
  if (!got) throw logic::KbError("task query produced no target for a label sequence");
  return *got;
}

std::unique_ptr<TaskOracle> Task::oracle(const ExampleContext& ctx) const {
  if (is_addition())
    return std::make_unique<AdditionOracle>(addition_->base, addition_->digits);
  return std::make_unique<ChessOracle>(ctx.positions);
}

}  // namespace cabl::tasks
