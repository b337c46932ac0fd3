#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hppl/lang/ast.hpp"
#include "hppl/lang/data.hpp"
#include "hppl/lang/parser.hpp"
#include "hppl/lang/render.hpp"
#include "hppl/lang/validate.hpp"
#include "test_util.hpp"

using namespace hppl;

namespace {

bool has_rule(const ValidationResult& r, const std::string& rule) {
  for (const auto& e : r.errors) {
    if (e.rule == rule) return true;
  }
  return false;
}

ValidationResult check(const std::string& text) { return validate(parse(text)); }

}  // namespace

TEST(Parse, OutlierStructure) {
  Program p = parse(test::model_text("outlier_unannotated.hppl"));
  EXPECT_EQ(p.name, "outlier");
  ASSERT_EQ(p.params, std::vector<std::string>{"yobs"});
  ASSERT_EQ(p.body.size(), 2u);
  EXPECT_NE(p.body[0].as<SampleStmt>(), nullptr);
  const auto* loop = p.body[1].as<ForStmt>();
  ASSERT_NE(loop, nullptr);
  ASSERT_EQ(loop->body.size(), 4u);
  EXPECT_NE(loop->body[0].as<SampleStmt>(), nullptr);
  EXPECT_NE(loop->body[1].as<SampleStmt>(), nullptr);
  EXPECT_NE(loop->body[2].as<IfStmt>(), nullptr);
  EXPECT_NE(loop->body[3].as<ObserveStmt>(), nullptr);
  EXPECT_EQ(p.result, "x");
  ASSERT_EQ(p.consts.size(), 1u);
  EXPECT_EQ(p.consts[0].name, "N");
  EXPECT_EQ(p.consts[0].value, 5);
  EXPECT_EQ(loop->body[0].loc.line, 4);
}

TEST(Parse, Annotations) {
  Program p = parse(test::model_text("outlier.hppl"));
  const auto& body = p.body[1].as<ForStmt>()->body;
  EXPECT_EQ(body[0].as<SampleStmt>()->ann, Annotation::Exact);
  EXPECT_EQ(body[1].as<SampleStmt>()->ann, Annotation::Approx);
  EXPECT_EQ(p.body[0].as<SampleStmt>()->ann, Annotation::None);
}

TEST(Parse, MinimalProgram) {
  Program p = parse("function f(){ x <- gaussian(0.,1.); x }");
  ASSERT_EQ(p.body.size(), 1u);
  EXPECT_NE(p.body[0].as<SampleStmt>(), nullptr);
  EXPECT_TRUE(p.params.empty());
}

TEST(Parse, MissingSemicolonReportsSecondX) {
  try {
    parse("function f(){ x <- gaussian(0.,1.) x }");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.loc().line, 1);
    EXPECT_EQ(e.loc().column, 36);
    EXPECT_EQ(e.found(), "identifier 'x'");
    EXPECT_NE(std::find(e.expected().begin(), e.expected().end(), "';'"), e.expected().end());
  }
}

TEST(Parse, UnaryMinus) {
  Program p = parse("function f(){ a <- gaussian(0, 1); x <- gaussian(-2 - -a, 1); x }");
  const auto& mean = std::get<GaussianExpr>(p.body[1].as<SampleStmt>()->dist).mean;
  ASSERT_EQ(mean.kind, NumExpr::Kind::Sub);
  EXPECT_EQ(mean.lhs().kind, NumExpr::Kind::Literal);
  EXPECT_EQ(mean.lhs().value, -2.0);
  EXPECT_EQ(mean.rhs().kind, NumExpr::Kind::Mul);
}

TEST(Parse, CommentsAndKeywords) {
  EXPECT_NO_THROW(parse("// model\nfunction f(d) { // header\n x <- bernoulli(0.5); // coin\n observe(x, d[1]); x }"));
  EXPECT_THROW(parse("function f() { for <- gaussian(0, 1); for }"), ParseError);
  EXPECT_THROW(parse("function f() { x <- poisson(1); x }"), ParseError);
  EXPECT_THROW(parse("function f() { x <- gaussian(0, 1); x } trailing"), ParseError);
}

TEST(Validate, OutlierIsClean) {
  auto r = check(test::model_text("outlier.hppl"));
  ASSERT_TRUE(r.ok()) << r.errors.front().message;
  const CheckedProgram& c = *r.checked;
  EXPECT_EQ(c.stmt_count(), 8u);
  EXPECT_EQ(c.constants().at("N"), 5);
  EXPECT_EQ(c.annotated(Annotation::Exact), std::vector<StmtId>{3});
  EXPECT_EQ(c.annotated(Annotation::Approx), std::vector<StmtId>{4});
  EXPECT_EQ(describe(c.stmt(5)), "if(o)");
  EXPECT_EQ(describe(c.stmt(8)), "observe(y, yobs[i])");
}

TEST(Validate, UnboundIdentifier) {
  auto r = check("function f(d) { x <- gaussian(0, 1); observe(z, d[1]); x }");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, "unbound identifier"));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].stmt, 2);
}

TEST(Validate, NonAffineMeanIsFlaggedNotRejected) {
  auto r = check("function f() { y <- gaussian(0, 1); z <- gaussian(0, 1); x <- gaussian(y*z, 1); x }");
  ASSERT_TRUE(r.ok());
  const auto& mean = std::get<GaussianExpr>(r.checked->sample(3)->dist).mean;
  EXPECT_FALSE(mean.affine);
  EXPECT_FALSE(r.checked->notes().empty());
  auto scaled = check("const K = 2; function f() { y <- gaussian(0, 1); x <- gaussian(K*y*3, 1); x }");
  ASSERT_TRUE(scaled.ok());
  EXPECT_TRUE(std::get<GaussianExpr>(scaled.checked->sample(2)->dist).mean.affine);
}

TEST(Validate, Rules) {
  EXPECT_TRUE(has_rule(check("function f() { x <- bernoulli(1.5); x }"), "probability out of range"));
  EXPECT_TRUE(has_rule(check("function f() { y <- gaussian(0, 1); x <- bernoulli(y); x }"),
                       "non-constant probability"));
  EXPECT_TRUE(has_rule(check("function f() { x <- gaussian(0, 0); x }"), "non-positive variance"));
  EXPECT_TRUE(has_rule(check("function f() { y <- gaussian(0, 1); x <- gaussian(0, y*y); x }"),
                       "non-affine variance"));
  EXPECT_TRUE(has_rule(check("function f(d) { x <- gaussian(0, 1); observe(x, d[1]); observe(x, d[2]); x }"),
                       "observed twice"));
  EXPECT_TRUE(has_rule(check("function f(d) { x <- gaussian(0, 1); if (x) { y <- gaussian(0, 1); }; x }"),
                       "non-bernoulli condition"));
  EXPECT_TRUE(has_rule(check("function f() { x <- bernoulli(0.5); observe(x, 2); x }"), "bernoulli datum"));
  EXPECT_TRUE(has_rule(check("function f(d) { for i in 1 .. M { x <- gaussian(0, 1); }; d }"),
                       "unbound identifier"));
  EXPECT_TRUE(has_rule(check("function f() { c <- bernoulli(0.5); if (c) { y <- gaussian(0, 1); }; y }"),
                       "result not in scope"));
  EXPECT_TRUE(has_rule(check("function f(d) { x <- gaussian(d, 1); x }"), "parameter without index"));
  EXPECT_TRUE(has_rule(check("function f(d) { x <- gaussian(0, 1); for i in 1 .. 3 { x <- gaussian(i, 1); "
                             "observe(x, d[1]); observe(x, e[i]); }; x }"),
                       "unknown parameter"));
  EXPECT_TRUE(has_rule(check("function f(d) { x <- gaussian(0, 1); for i in 1 .. 3 { observe(x, d[i]); }; x }"),
                       "observed twice"));
}

TEST(Validate, OverridesReplaceConstants) {
  Program p = parse(test::model_text("outlier.hppl"));
  auto r = validate(p, {{"N", 100}});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.checked->constants().at("N"), 100);
}

TEST(Validate, IsDeterministic) {
  Program p = parse("function f(d) { x <- gaussian(q, 1); observe(z, d[1]); w }");
  EXPECT_EQ(validate(p).errors, validate(p).errors);
  EXPECT_GE(validate(p).errors.size(), 3u);
}

TEST(Render, OutlierRoundTrip) {
  Program p = parse(test::model_text("outlier.hppl"));
  std::string text = render(p);
  EXPECT_EQ(parse(text), p);
  EXPECT_EQ(render(parse(text)), text);
}

TEST(Render, MinimalProgramHasOneLineBody) {
  std::string text = render(parse("function f(){ x <- gaussian(0.,1.); x }"));
  EXPECT_EQ(text, "function f() {\n  x <- gaussian(0, 1);\n  x\n}\n");
}

namespace {

class ProgramGen {
 public:
  explicit ProgramGen(unsigned seed) : rng_(seed) {}

  Program program() {
    Program p;
    p.name = "g";
    p.params = {"d", "e"};
    if (coin()) p.consts.push_back({"N", pick(1, 9), {}});
    p.body = block(2);
    p.result = name();
    return p;
  }

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return pick(0, 1) == 1; }
  std::string name() { return std::string(1, static_cast<char>('a' + pick(0, 4))); }

  double number() {
    switch (pick(0, 3)) {
      case 0:
        return pick(-5, 5);
      case 1:
        return pick(1, 999) / 8.0;
      case 2:
        return std::uniform_real_distribution<double>(-1e3, 1e3)(rng_);
      default:
        return std::ldexp(std::uniform_real_distribution<double>(0.5, 1)(rng_), pick(-40, 40));
    }
  }

  IntExpr int_expr() { return coin() ? IntExpr::literal(pick(0, 9)) : IntExpr::named(coin() ? "i" : "N"); }

  NumExpr expr(int depth) {
    int k = depth <= 0 ? pick(0, 2) : pick(0, 5);
    switch (k) {
      case 0:
        return NumExpr::literal(number());
      case 1:
        return NumExpr::var(name());
      case 2:
        return NumExpr::datum(coin() ? "d" : "e", int_expr());
      case 3:
        return NumExpr::binary(NumExpr::Kind::Add, expr(depth - 1), expr(depth - 1));
      case 4:
        return NumExpr::binary(NumExpr::Kind::Sub, expr(depth - 1), expr(depth - 1));
      default:
        return NumExpr::binary(NumExpr::Kind::Mul, expr(depth - 1), expr(depth - 1));
    }
  }

  Stmt stmt(int depth) {
    Stmt s;
    int k = depth <= 0 ? pick(0, 1) : pick(0, 3);
    if (k == 0) {
      SampleStmt x;
      x.target = name();
      x.ann = static_cast<Annotation>(pick(0, 2));
      if (coin()) {
        x.dist = GaussianExpr{expr(2), expr(1)};
      } else {
        x.dist = BernoulliExpr{expr(1)};
      }
      s.node = std::move(x);
    } else if (k == 1) {
      ObserveStmt o;
      o.subject = name();
      if (coin()) {
        o.datum = DataRef{"d", int_expr()};
      } else {
        o.datum = number();
      }
      s.node = std::move(o);
    } else if (k == 2) {
      IfStmt i;
      i.cond = name();
      i.then_body = block(depth - 1);
      if (coin()) i.else_body = block(depth - 1);
      s.node = std::move(i);
    } else {
      ForStmt f;
      f.index = "i";
      f.lo = int_expr();
      f.hi = int_expr();
      f.body = block(depth - 1);
      s.node = std::move(f);
    }
    return s;
  }

  Block block(int depth) {
    Block b;
    int n = pick(0, 4);
    for (int k = 0; k < n; ++k) b.push_back(stmt(depth));
    return b;
  }

  std::mt19937 rng_;
};

}  // namespace

TEST(Render, RandomProgramsRoundTrip) {
  ProgramGen gen(20240611);
  for (int k = 0; k < 500; ++k) {
    Program p = gen.program();
    std::string text = render(p);
    Program back = parse(text);
    ASSERT_EQ(back, p) << text;
    ASSERT_EQ(render(back), text);
  }
}

TEST(Data, ReadCsvColumns) {
  std::istringstream in("yobs,zobs\n1.5,2\n-3,\n0.25,\n");
  DataTable t = read_csv(in);
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.column("yobs"), (std::vector<double>{1.5, -3, 0.25}));
  EXPECT_EQ(t.column("zobs"), (std::vector<double>{2}));
  EXPECT_EQ(t.at(t.column_index("yobs"), 2), -3);
  EXPECT_THROW(t.at(t.column_index("zobs"), 2), DataError);
  EXPECT_THROW(t.at(t.column_index("yobs"), 0), DataError);
}

TEST(Data, RejectsMalformed) {
  std::istringstream bad_cell("a\n1\nfoo\n");
  EXPECT_THROW(read_csv(bad_cell), DataError);
  std::istringstream gap("a,b\n1,\n2,3\n");
  EXPECT_THROW(read_csv(gap), DataError);
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), DataError);
}

TEST(Data, WriteReadRoundTrip) {
  DataTable t;
  t.add_column("a", {0.1, 1e-300, -2});
  t.add_column("b", {3});
  std::ostringstream out;
  write_csv(out, t);
  std::istringstream in(out.str());
  DataTable back = read_csv(in);
  EXPECT_EQ(back.column("a"), t.column("a"));
  EXPECT_EQ(back.column("b"), t.column("b"));
}
