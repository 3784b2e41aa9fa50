#include <doctest.h>

#include <functional>

#include "stlrisk/formula.hpp"
#include "support/corpus.hpp"

using namespace stlrisk;

namespace {
const char* kTaskFormula = "G[0,3](!muC & !muD) & F[1,2](muA & F[0,1] muB)";
}

TEST_SUITE_BEGIN("formula");

TEST_CASE("parses the delivery task formula") {
  const FormulaPtr phi = parse_formula(kTaskFormula);
  REQUIRE(phi->kind() == NodeKind::And);
  const auto& g = *phi->left();
  CHECK(g.kind() == NodeKind::Always);
  CHECK(g.interval() == Interval(0, 3));
  CHECK(g.child()->kind() == NodeKind::And);
  CHECK(g.child()->left()->kind() == NodeKind::Not);
  CHECK(g.child()->left()->child()->predicate_name() == "muC");
  const auto& f = *phi->right();
  CHECK(f.kind() == NodeKind::Eventually);
  CHECK(f.interval() == Interval(1, 2));
  CHECK(f.child()->left()->predicate_name() == "muA");
  const auto& inner = *f.child()->right();
  CHECK(inner.kind() == NodeKind::Eventually);
  CHECK(inner.interval() == Interval(0, 1));
  CHECK(inner.child()->predicate_name() == "muB");
}

TEST_CASE("parses atoms and flavors") {
  CHECK(parse_formula("true")->kind() == NodeKind::True);
  CHECK(parse_formula("mu")->kind() == NodeKind::Predicate);

  const FormulaPtr u = parse_formula("a U[1,2] b");
  CHECK(u->kind() == NodeKind::Until);
  CHECK(u->flavor() == UntilFlavor::StrictNonMatching);
  CHECK(to_string(*u) == "a U[1,2] b");

  CHECK(parse_formula("a UM[1,2] b")->flavor() == UntilFlavor::NonStrictMatching);
  CHECK(parse_formula("a PU[1,2] b")->kind() == NodeKind::Since);
  CHECK(parse_formula("a PUM[1,2] b")->flavor() ==
        UntilFlavor::NonStrictMatching);
  CHECK(parse_formula("PF[0,2] a")->direction() == TimeDirection::Past);
  CHECK(parse_formula("PG[0,2] a")->kind() == NodeKind::Always);
  CHECK(parse_formula("G[2,inf] a")->interval().unbounded());
}

TEST_CASE("precedence: unary over & over | over U") {
  const FormulaPtr phi = parse_formula("!a & b | c U[0,1] d");
  // ((!a & b) | c) U (d)
  REQUIRE(phi->kind() == NodeKind::Until);
  REQUIRE(phi->left()->kind() == NodeKind::Or);
  CHECK(phi->left()->left()->kind() == NodeKind::And);
  CHECK(phi->left()->left()->left()->kind() == NodeKind::Not);
  CHECK(phi->right()->predicate_name() == "d");

  // until is right associative
  const FormulaPtr chain = parse_formula("a U[0,1] b U[0,2] c");
  REQUIRE(chain->kind() == NodeKind::Until);
  CHECK(chain->left()->predicate_name() == "a");
  CHECK(chain->right()->kind() == NodeKind::Until);
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_formula("a U[2,1] b"), ParseError);
  CHECK_THROWS_AS(parse_formula("a U b"), ParseError);
  CHECK_THROWS_AS(parse_formula("F[0,1]"), ParseError);
  CHECK_THROWS_AS(parse_formula("(a & b"), ParseError);
  CHECK_THROWS_AS(parse_formula("a @ b"), ParseError);
  CHECK_THROWS_AS(parse_formula(""), ParseError);
  CHECK_THROWS_AS(parse_formula("a U[-1,2] b"), ParseError);
  try {
    parse_formula("a & @");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("round-trip: parse(print(phi)) is structurally equal") {
  corpus::Rng rng(2024);
  corpus::FormulaOptions opt;
  opt.allow_unbounded = true;
  for (int i = 0; i < 500; ++i) {
    const FormulaPtr phi = corpus::make_formula(rng, opt);
    const FormulaPtr back = parse_formula(to_string(*phi));
    CHECK(structurally_equal(*phi, *back));
  }
}

TEST_CASE("future length of the delivery task formula is 3") {
  const FormulaPtr phi = parse_formula(kTaskFormula);
  CHECK(future_length(*phi) == 3);
  CHECK(past_length(*phi) == 0);
}

TEST_CASE("formula lengths: base cases and unbounded propagation") {
  CHECK(future_length(*parse_formula("mu")) == 0);
  CHECK(past_length(*parse_formula("true")) == 0);
  CHECK(future_length(*parse_formula("G[2,inf] v")) == std::nullopt);
  CHECK(past_length(*parse_formula("a PU[0,4] b")) == 4);
  CHECK(future_length(*parse_formula("a PU[0,4] b")) == 0);
  CHECK(past_length(*parse_formula("a U[0,4] b")) == 0);
  CHECK(future_length(*parse_formula("F[1,2](a & F[0,1] b)")) == 3);
  CHECK_THROWS_AS(future_length(*parse_formula("F[0,1.5] a")), ValidationError);
}

TEST_CASE("is_bounded") {
  CHECK(is_bounded(*parse_formula(kTaskFormula)));
  CHECK_FALSE(is_bounded(*parse_formula("G[0,inf] mu")));
  CHECK(is_bounded(*parse_formula("F[1,2] mu")));
  CHECK_FALSE(is_bounded(*parse_formula("a & (b U[3,inf] c)")));
}

TEST_CASE("normalize produces core operators only") {
  const FormulaPtr f = normalize(parse_formula("F[0,1] mu"));
  REQUIRE(f->kind() == NodeKind::Until);
  CHECK(f->left()->kind() == NodeKind::True);
  CHECK(f->right()->predicate_name() == "mu");
  CHECK(to_string(*f) == "true U[0,1] mu");

  const FormulaPtr g = normalize(parse_formula("G[0,1] mu"));
  CHECK(to_string(*g) == "!(true U[0,1] !mu)");

  const FormulaPtr mu = parse_formula("mu");
  CHECK(normalize(mu).get() == mu.get()); // fixed point, no copy

  corpus::Rng rng(7);
  corpus::FormulaOptions opt;
  opt.allow_unbounded = true;
  for (int i = 0; i < 300; ++i) {
    const FormulaPtr phi = corpus::make_formula(rng, opt);
    std::function<bool(const Formula&)> core_only = [&](const Formula& n) {
      switch (n.kind()) {
      case NodeKind::Or:
      case NodeKind::Eventually:
      case NodeKind::Always:
        return false;
      case NodeKind::True:
      case NodeKind::Predicate:
        return true;
      case NodeKind::Not:
        return core_only(*n.child());
      default:
        return core_only(*n.left()) && core_only(*n.right());
      }
    };
    CHECK(core_only(*normalize(phi)));
  }
}

TEST_CASE("lengths are invariant under normalize") {
  corpus::Rng rng(99);
  corpus::FormulaOptions opt;
  opt.allow_unbounded = true;
  for (int i = 0; i < 300; ++i) {
    const FormulaPtr phi = corpus::make_formula(rng, opt);
    const FormulaPtr norm = normalize(phi);
    CHECK(future_length(*phi) == future_length(*norm));
    CHECK(past_length(*phi) == past_length(*norm));
    const HorizonPair h = horizon(*phi);
    CHECK(is_bounded(*phi) == (h.future.has_value() && h.past.has_value()));
  }
}

TEST_CASE("wrapping in U[a,b] adds exactly b to the future length") {
  corpus::Rng rng(123);
  corpus::FormulaOptions opt; // bounded only
  for (int i = 0; i < 200; ++i) {
    const FormulaPtr phi = corpus::make_formula(rng, opt);
    const long a = rng.pick_long(0, 3);
    const long b = rng.pick_long(a, 6);
    const FormulaPtr wrapped = Formula::until(
        Formula::truth(), phi, Interval(static_cast<double>(a),
                                        static_cast<double>(b)));
    REQUIRE(future_length(*phi).has_value());
    CHECK(*future_length(*wrapped) == *future_length(*phi) + b);
  }
}

TEST_SUITE_END();
