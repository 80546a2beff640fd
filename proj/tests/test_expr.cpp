#include <lcf/expr.hpp>

#include <gtest/gtest.h>

#include <numbers>

#include "expr_corpus.hpp"

using namespace lcf;

namespace {

const Matrix kJ = (Matrix(2, 2) << 0, -1, 1, 0).finished();

Vector point(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

}  // namespace

TEST(Parse, ScalarTimesMatrix) {
  const Expr e = parse("sin(x1)*[[0,-1],[1,0]]", {"x1"});
  EXPECT_EQ(e.root().op, ast::Op::Mul);
  EXPECT_TRUE(e.root().args[0]->shape.scalar);
  EXPECT_EQ(e.shape(), Shape::matrix(2, 2));
}

TEST(Parse, TrailingOperatorIsSyntaxErrorAtEnd) {
  try {
    parse("x1 +", {"x1"});
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 5);
  }
}

TEST(Parse, SyntaxErrorReportsLine) {
  try {
    parse("x1 *\n  (x1 + )", {"x1"});
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 9);
  }
}

TEST(Parse, RaggedLiteralIsValidationError) {
  EXPECT_THROW(parse("[[1,0],[0]]"), ValidationError);
}

TEST(Parse, UnknownIdentifier) {
  try {
    parse("x1 + y", {"x1"});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos);
  }
}

TEST(Parse, DimensionMismatches) {
  EXPECT_THROW(parse("[[1,2]] * [[1,2]]"), ValidationError);
  EXPECT_THROW(parse("[[1,2]] + [[1],[2]]"), ValidationError);
  EXPECT_THROW(parse("x1 + [[1]]", {"x1"}), ValidationError);
  EXPECT_THROW(parse("mexp([[1,2]])"), ValidationError);
  EXPECT_THROW(parse("sin([[1]])"), ValidationError);
  EXPECT_THROW(parse("x1 / [[1]]", {"x1"}), ValidationError);
  EXPECT_THROW(parse("block(eye(2), 1, 1, 2, 2)"), ValidationError);
  EXPECT_THROW(parse("x1 ^ 1.5", {"x1"}), ValidationError);
  EXPECT_THROW(parse("foo(x1)", {"x1"}), ValidationError);
}

TEST(Parse, MalformedInputs) {
  EXPECT_THROW(parse(""), SyntaxError);
  EXPECT_THROW(parse("(x1", {"x1"}), SyntaxError);
  EXPECT_THROW(parse("x1 $ 2", {"x1"}), SyntaxError);
  EXPECT_THROW(parse("[[1,2]"), SyntaxError);
  EXPECT_THROW(parse("sin x1", {"x1"}), SyntaxError);
}

TEST(Parse, Precedence) {
  const ParamMap none;
  EXPECT_DOUBLE_EQ(eval_scalar(parse("1 + 2 * 3"), Vector(0)), 7.0);
  EXPECT_DOUBLE_EQ(eval_scalar(parse("-2^2"), Vector(0)), -4.0);
  EXPECT_DOUBLE_EQ(eval_scalar(parse("8 / 4 / 2"), Vector(0)), 1.0);
  EXPECT_DOUBLE_EQ(eval_scalar(parse("2 - 3 - 4"), Vector(0)), -5.0);
  EXPECT_DOUBLE_EQ(eval_scalar(parse("2^-1"), Vector(0)), 0.5);
}

TEST(Parse, MatrixProductIsLeftAssociative) {
  const Expr e = parse("[[1,2]] * [[1,0],[0,1]] * [[3],[4]]");
  EXPECT_EQ(e.shape(), Shape::matrix(1, 1));
  EXPECT_DOUBLE_EQ(eval(e, Vector(0))(0, 0), 11.0);
}

TEST(Print, RoundTripIsStable) {
  const char* sources[] = {
      "sin(x1)*[[0,-1],[1,0]]",
      "-x1^2 + 3.25e-3 / (1 + x2)",
      "mexp(x1 * [[0, -k], [k, 0]]) * transpose(inv([[1, x2], [0, 1]]))",
      "block(eye(3), 0, 0, 2, 2) + entry([[x1, 2], [3, 4]], 1, 0) * eye(2)",
      "atan2(x2, x1) - det([[x1, 1], [1, x2]])^-2 + tr(eye(4)) + pi",
      "0.1 + 1e300",
  };
  for (const auto* src : sources) {
    const Expr a = parse(src, Symbols{{"x1", "x2"}, {"k"}, {}});
    const Expr b = parse(a.str(), a.symbols());
    EXPECT_TRUE(a == b) << src;
    EXPECT_EQ(a.str(), b.str()) << src;
  }
}

TEST(Print, RoundTripOverRandomCorpus) {
  oracle::ExprGenerator gen(7);
  for (int i = 0; i < 200; ++i) {
    const std::string src = i % 2 ? gen.scalar(3) : gen.matrix(2);
    const Expr a = parse(src, Symbols{{"x1", "x2"}, {"p"}, {}});
    const Expr b = parse(a.str(), a.symbols());
    ASSERT_TRUE(a == b) << src;
    ASSERT_EQ(a.str(), b.str());
  }
}

TEST(Eval, Basics) {
  EXPECT_DOUBLE_EQ(eval_scalar(parse("x1*x1", {"x1"}), point({3.0})), 9.0);
  const Expr rot = parse("mexp([[0,-x1],[x1,0]])", {"x1"});
  EXPECT_TRUE(eval(rot, point({0.0})).isApprox(Matrix::Identity(2, 2)));
  EXPECT_LT((eval(rot, point({std::numbers::pi / 2})) - kJ).norm(), 1e-12);
}

TEST(Eval, RotationClosedForm) {
  const Expr rot = parse("mexp([[0,-x1],[x1,0]])", {"x1"});
  for (double t : {-7.0, -1.0, 0.3, 2.0, 9.5}) {
    Matrix r(2, 2);
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    EXPECT_LT((eval(rot, point({t})) - r).norm(), 1e-12) << t;
  }
}

TEST(Eval, Params) {
  const Expr e = parse("k * x1", {"x1"}, {"k"});
  EXPECT_DOUBLE_EQ(eval_scalar(e, point({2.0}), {{"k", 1.5}}), 3.0);
  EXPECT_THROW(eval(e, point({2.0})), ValidationError);
}

TEST(Eval, DomainErrors) {
  EXPECT_THROW(eval(parse("log(x1)", {"x1"}), point({0.0})), DomainError);
  EXPECT_THROW(eval(parse("log(x1)", {"x1"}), point({-1.0})), DomainError);
  EXPECT_THROW(eval(parse("1 / x1", {"x1"}), point({0.0})), DomainError);
  EXPECT_THROW(eval(parse("sqrt(x1)", {"x1"}), point({-1.0})), DomainError);
  EXPECT_THROW(eval(parse("inv([[x1, 0], [0, 1]])", {"x1"}), point({0.0})), DomainError);
  EXPECT_THROW(eval(parse("x1^-1", {"x1"}), point({0.0})), DomainError);
  EXPECT_THROW(eval(parse("atan2(x1, x1)", {"x1"}), point({0.0})), DomainError);
}

TEST(Eval, ShapeErrorOnWrongPointSize) {
  EXPECT_THROW(eval(parse("x1", {"x1"}), point({1.0, 2.0})), ShapeError);
}

TEST(Eval, MatrixFunctions) {
  const Matrix m = eval(parse("[[1,2],[3,4]]^2 - [[7,10],[15,22]]"), Vector(0));
  EXPECT_EQ(m.norm(), 0.0);
  EXPECT_NEAR(eval_scalar(parse("det([[1,2],[3,4]])"), Vector(0)), -2.0, 1e-14);
  EXPECT_DOUBLE_EQ(eval_scalar(parse("tr(eye(3))"), Vector(0)), 3.0);
  EXPECT_DOUBLE_EQ(eval_scalar(parse("entry(transpose([[1,2],[3,4]]), 0, 1)"), Vector(0)), 3.0);
  const Matrix inv = eval(parse("[[2,1],[1,1]]^-1"), Vector(0));
  EXPECT_LT((inv - (Matrix(2, 2) << 1, -1, -1, 2).finished()).norm(), 1e-14);
}

TEST(Eval, IsDeterministic) {
  oracle::ExprGenerator gen(11);
  for (int i = 0; i < 50; ++i) {
    const Expr e = parse(gen.matrix(2), Symbols{{"x1", "x2"}, {"p"}, {}});
    const Vector x = point({0.3, -0.7});
    const Matrix a = eval(e, x, {{"p", 0.7}});
    const Matrix b = eval(e, x, {{"p", 0.7}});
    ASSERT_EQ(a.size(), b.size());
    for (Eigen::Index k = 0; k < a.size(); ++k)
      ASSERT_EQ(std::memcmp(a.data() + k, b.data() + k, sizeof(double)), 0);
  }
}

TEST(Dual, HandRules) {
  const Vector e1 = Vector::Unit(1, 0);
  const Vector seeds[] = {e1};
  Jet j = eval_dual(parse("x1*x1", {"x1"}), point({3.0}), {}, seeds);
  EXPECT_DOUBLE_EQ(j.as_scalar(), 9.0);
  EXPECT_DOUBLE_EQ(j.tangents[0](0, 0), 6.0);

  j = eval_dual(parse("sin(x1) * exp(x1)", {"x1"}), point({0.4}), {}, seeds);
  EXPECT_NEAR(j.tangents[0](0, 0), std::exp(0.4) * (std::cos(0.4) + std::sin(0.4)), 1e-15);

  j = eval_dual(parse("x1 / (1 + x1^2)", {"x1"}), point({2.0}), {}, seeds);
  EXPECT_NEAR(j.tangents[0](0, 0), (1 - 4.0) / 25.0, 1e-15);

  j = eval_dual(parse("atan2(x1, 1)", {"x1"}), point({0.5}), {}, seeds);
  EXPECT_NEAR(j.tangents[0](0, 0), 1.0 / 1.25, 1e-15);

  j = eval_dual(parse("mexp([[0,-x1],[x1,0]])", {"x1"}), point({0.0}), {}, seeds);
  EXPECT_LT((j.value - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LT((j.tangents[0] - kJ).norm(), 1e-15);
}

TEST(Dual, SeedsAreDirectional) {
  const Expr e = parse("x1^2 * x2", {"x1", "x2"});
  const Vector v = point({1.0, 2.0});
  const Vector seeds[] = {Vector::Unit(2, 0), Vector::Unit(2, 1), v};
  const Jet j = eval_dual(e, point({3.0, 5.0}), {}, seeds);
  EXPECT_DOUBLE_EQ(j.tangents[0](0, 0), 30.0);
  EXPECT_DOUBLE_EQ(j.tangents[1](0, 0), 9.0);
  EXPECT_DOUBLE_EQ(j.tangents[2](0, 0), 48.0);
}

TEST(Dual, RandomCorpusMatchesCentralDifferences) {
  oracle::ExprGenerator gen(2024);
  const ParamMap params{{"p", 0.7}};
  for (int i = 0; i < 100; ++i) {
    const std::string src = i % 2 ? gen.scalar(3) : gen.matrix(2);
    const Expr e = parse(src, Symbols{{"x1", "x2"}, {"p"}, {}});
    const Vector x = point({gen.uniform(-1, 1), gen.uniform(-1, 1)});
    const Vector v = point({gen.uniform(-1, 1), gen.uniform(-1, 1)});
    const Vector seeds[] = {v};
    const Jet j = eval_dual(e, x, params, seeds);
    const Matrix fd = oracle::central_difference(e, x, v, params);
    EXPECT_LT(oracle::relative_error(j.tangents[0], fd), 1e-7) << src;
  }
}
