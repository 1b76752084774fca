#include <catch2/catch_amalgamated.hpp>

#include "cellbf/graded.hpp"
#include "cellbf/matrix.hpp"
#include "cellbf/rational.hpp"
#include "cellbf/scalar.hpp"

using namespace cellbf;

TEST_CASE("rational parsing and formatting") {
  CHECK(parse_rational("3/4") == Q(3, 4));
  CHECK(parse_rational("-7") == Q(-7));
  CHECK(parse_rational("-7/2") == Q(-7, 2));
  CHECK(rational_str(Q(22, 4)) == "11/2");
  CHECK_THROWS_AS(parse_rational("x/y"), std::invalid_argument);
}

TEST_CASE("sqrt arithmetic") {
  SqrtQ a = sqrtq(Q(8));  // 2 sqrt 2
  CHECK(a.q == 2);
  CHECK(a.rad == 2);
  SqrtQ b = a * a;
  CHECK(b.is_rational());
  CHECK(b.q == 8);
  SqrtQ c = sqrtq(Q(1, 2));
  CHECK((c * c).q == Q(1, 2));
  CHECK((c * c.inverse()).q == 1);
}

TEST_CASE("matrix inverse, det, kernel") {
  Mat m{{Q(2), Q(1)}, {Q(1), Q(1)}};
  CHECK(m.det() == 1);
  auto inv = m.inverse();
  REQUIRE(inv);
  CHECK((*inv) * m == Mat::identity(2));

  Mat sing{{Q(1), Q(2)}, {Q(2), Q(4)}};
  CHECK(sing.det() == 0);
  CHECK(!sing.inverse());
  Mat k = sing.kernel_basis();
  CHECK(k.cols() == 1);
  CHECK(sing.apply({k(0, 0), k(1, 0)}) == std::vector<Q>{Q(0), Q(0)});

  Mat r{{Q(1), Q(2), Q(3)}, {Q(2), Q(4), Q(6)}, {Q(1), Q(1), Q(1)}};
  CHECK(r.rank() == 2);
}

TEST_CASE("matrix solve") {
  Mat m{{Q(1), Q(2)}, {Q(3), Q(4)}};
  auto x = m.solve({Q(5), Q(11)});
  REQUIRE(x);
  CHECK(m.apply(*x) == std::vector<Q>{Q(5), Q(11)});
  Mat bad{{Q(1), Q(1)}, {Q(1), Q(1)}};
  CHECK(!bad.solve({Q(0), Q(1)}));
}

TEST_CASE("scalar monomials") {
  // xi^0 * xi^1 = e^{-i pi/2} hbar (phase -4/16, hbar quarters 4)
  ScalarMono xi0(SqrtQ(Q(1)), -1, -1 + 1, -1);  // (2pi)^{-1/4} hbar^{0} e^{-i pi/8}
  ScalarMono xi1(SqrtQ(Q(1)), 1, 1 + 3, -3);
  ScalarMono prod = xi0 * xi1;
  CHECK(prod.two_pi_quarters() == 0);
  CHECK(prod.hbar_quarters() == 4);
  CHECK(prod.phase16() == ((-4%16)+16)%16);
  CHECK(ScalarMono::equal_mod_sign(prod, ScalarMono(SqrtQ(Q(-1)), 0, 4, 4)));
  CHECK(!ScalarMono::equal_mod_sign(prod, ScalarMono(SqrtQ(Q(1)), 0, 4, 2)));
  CHECK((prod * prod.inverse()) == ScalarMono::one());
}

TEST_CASE("graded maps compose and sdet alternates") {
  GradedVS v;
  v.dims[0] = 1;
  v.dims[1] = 1;
  GradedMap f(v, v, 0);
  f.set_block(0, Mat{{Q(3)}});
  f.set_block(1, Mat{{Q(2)}});
  int bad = 0;
  CHECK(graded_sdet(f, bad) == Q(3, 2));

  GradedMap id = GradedMap::identity(v);
  CHECK(graded_sdet(id, bad) == 1);
  CHECK(f * id == f);
  CHECK((f - f).is_zero());
}
