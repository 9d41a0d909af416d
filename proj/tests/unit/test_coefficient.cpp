#include <doctest.h>

#include <filesystem>

#include "common.hpp"
#include "lichflow/error.hpp"
#include "lichflow/io.hpp"

using namespace lichflow;
using namespace lichflow::test;

TEST_CASE("expression parsing and evaluation") {
  const CoefficientSpec c = CoefficientSpec::parse("2 + 0.5*cos(x)");
  CHECK(c.to_sexpr() == "(+ 2 (* 0.5 (cos x)))");
  CHECK(c.evaluate(0.0) == doctest::Approx(2.5));
  CHECK(c.evaluate(std::numbers::pi) == doctest::Approx(1.5));
  CHECK_FALSE(c.uses_y());
  CHECK_FALSE(c.is_constant());

  CHECK(CoefficientSpec::parse("2*pi").evaluate(0.0) == doctest::Approx(kTwoPi));
  CHECK(CoefficientSpec::parse("2*pi").is_constant());
  CHECK(CoefficientSpec::parse("-(1 - 3)").evaluate(0.0) == doctest::Approx(2.0));
  CHECK(CoefficientSpec::parse("1 - 2 - 3").evaluate(0.0) == doctest::Approx(-4.0));
  CHECK(CoefficientSpec::parse("1e-3").evaluate(0.0) == doctest::Approx(1e-3));
  CHECK(CoefficientSpec::parse("sin(x)*cos(y)").uses_y());
  CHECK(CoefficientSpec::constant(4.5).evaluate(1.0, 2.0) == 4.5);
}

TEST_CASE("parse errors carry offset and expectations") {
  try {
    CoefficientSpec::parse("2 + * x");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
    CHECK_FALSE(e.expected().empty());
  }
  try {
    CoefficientSpec::parse("2 +* x");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(CoefficientSpec::parse("tan(x)"), ParseError);
  CHECK_THROWS_AS(CoefficientSpec::parse("(1 + x"), ParseError);
  CHECK_THROWS_AS(CoefficientSpec::parse("1 + x)"), ParseError);
  CHECK_THROWS_AS(CoefficientSpec::parse(""), ParseError);
  CHECK_THROWS_AS(CoefficientSpec::parse("@file:"), ParseError);
}

TEST_CASE("materialize samples on grid coordinates") {
  const Grid g = torus(8, 4);
  const Field f = expr("x + 10*y", g);
  CHECK(f[g.flatten(3, 2)] == doctest::Approx(3 * g.spacing(0) + 20 * g.spacing(1)));
  CHECK_THROWS_WITH_AS(expr("y", circle(8)), doctest::Contains("dimension mismatch"), Error);
}

TEST_CASE("tabulated coefficients load snapshots") {
  const auto dir = std::filesystem::temp_directory_path() / "lichflow_test_coefficient";
  std::filesystem::create_directories(dir);
  const Grid g = circle(16);
  const Field f = expr("1 + sin(x)*sin(x)", g);
  io::write_snapshot(f, dir / "a.txt");
  const CoefficientSpec spec = CoefficientSpec::parse("@file:" + (dir / "a.txt").string());
  CHECK(spec.is_tabulated());
  CHECK(materialize(spec, g) == f);
  CHECK_THROWS_AS(spec.evaluate(0.0), Error);
  CHECK_THROWS_WITH_AS(materialize(spec, torus(16, 4)), doctest::Contains("dim 1"), Error);
  CHECK_THROWS_AS(materialize(spec, circle(32)), Error);
  CHECK_THROWS_AS(materialize(CoefficientSpec::parse("@file:" + (dir / "missing.txt").string()), g), Error);
  std::filesystem::remove_all(dir);
}
