#include "gradcert/estimator.hpp"
#include "gradcert/methods.hpp"
#include "gradcert/problems.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace gradcert;

namespace {

const SpaceGeometry kE = SpaceGeometry::euclidean();

double nu_at(const BoundData& b, double r) { return std::get<NuContraction>(b.contraction).nu(r); }

}  // namespace

TEST_CASE("registry contents and lookup errors") {
  const auto names = problem_names();
  for (const char* n : {"identity", "linear_spd", "quad2d", "scalar_quad", "chandrasekhar"}) {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
  CHECK(registry().size() == names.size());
  CHECK_THROWS_AS(make_problem("nope"), InputError);
  CHECK_THROWS_AS(make_problem("quad2d", {{"bogus", {1.0}}}), InputError);
  CHECK_THROWS_AS(make_problem("linear_spd", {{"m", {0.0}}}), InputError);
  CHECK_THROWS_AS(make_problem("chandrasekhar", {{"c", {1.0}}}), InputError);
  CHECK_THROWS_AS(make_problem("chandrasekhar", {{"n", {2.5}}}), InputError);
  CHECK_THROWS_AS(make_problem("quad2d", {{"x0", {1.0}}}), InputError);
  CHECK_THROWS_AS(make_problem("linear_diag"), InputError);
}

TEST_CASE("problem examples") {
  const Problem id = make_problem("identity", {{"b", {1.0, 2.0, 3.0}}});
  CHECK((id.eval_f(id.x0) - Vector{{-1.0, -2.0, -3.0}}).norm() == 0.0);
  CHECK((*id.known_solution - Vector{{1.0, 2.0, 3.0}}).norm() == 0.0);

  const Problem q = make_problem("quad2d");
  const Vector one{{1.0, 1.0}};
  CHECK((q.eval_f(one) - Vector{{0.9, 0.9}}).norm() < 1e-15);
  Matrix jq(2, 2);
  jq << 1.0, -0.2, -0.2, 1.0;
  CHECK((q.eval_jacobian(one) - jq).norm() < 1e-15);
  CHECK((q.x0 - Vector{{0.5, 0.5}}).norm() == 0.0);
  CHECK(q.R == 1.0);

  const Problem l = make_problem("linear_spd", {{"m", {1.0}}, {"M", {4.0}}, {"dim", {2.0}}});
  const auto b = l.certified_bounds({MethodFamily::MinResidual, 1.0}, kE);
  REQUIRE(b.has_value());
  CHECK(nu_at(*b, 0.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(big_omega(*b, 1.0, 5.0) == 0.0);
}

TEST_CASE("known solutions solve the equation") {
  for (const auto& p : registry()) {
    if (!p.known_solution) continue;
    const double scale = 1.0 + p.known_solution->norm();
    CHECK(p.eval_f(*p.known_solution).norm() <= 1e-12 * scale);
  }
}

TEST_CASE("validate_jacobian") {
  for (const auto& p : registry()) {
    const auto rep = validate_jacobian(p, 17);
    CHECK_MESSAGE(rep.passed, p.name);
    CHECK(rep.points_checked == 10);
  }
  const auto affine = validate_jacobian(make_problem("linear_spd"), 3);
  CHECK(affine.max_deviation <= 1e-10);

  Problem bad = make_problem("quad2d");
  const auto good_jac = bad.eval_jacobian;
  bad.eval_jacobian = [good_jac](const Vector& x) {
    Matrix j = good_jac(x);
    j(0, 1) = -j(0, 1);
    return j;
  };
  const auto rep = validate_jacobian(bad, 3);
  CHECK_FALSE(rep.passed);
  REQUIRE(rep.witness.has_value());
  CHECK(rep.witness->row == 0);
  CHECK(rep.witness->col == 1);

  Problem throwing = make_problem("quad2d");
  throwing.eval_f = [](const Vector&) -> Vector { throw InputError("outside the domain"); };
  const auto thrown = validate_jacobian(throwing, 3);
  CHECK_FALSE(thrown.passed);
  CHECK(thrown.error.find("outside the domain") != std::string::npos);
  CHECK(thrown.witness.has_value());
}

TEST_CASE("certified bounds are conservative against sampled estimates") {
  const std::vector<Problem> problems = {make_problem("quad2d"), make_problem("scalar_quad"),
                                         make_problem("chandrasekhar", {{"n", {8}}})};
  const SamplePlan plan{5, 24, 128, true};
  for (const auto& p : problems) {
    for (auto f : kHilbertMethodFamilies) {
      const MethodSpec m{f, 1.0};
      const auto b = p.certified_bounds(m, kE);
      REQUIRE(b.has_value());
      for (double r : {0.25 * p.R, p.R}) {
        CHECK(nu_at(*b, r) <= estimate_nu_tilde(p, m, kE, r, plan).value + 1e-12);
        CHECK(b->lambda(r) >= estimate_lambda_tilde(p, m, kE, r, plan).value - 1e-12);
        CHECK(b->theta(r) >= estimate_theta(p, m, kE, r, plan).value - 1e-12);
        CHECK(omega_value(b->omega, r, 1.0) >= estimate_omega_lipschitz(p, kE, r, plan).value - 1e-12);
      }
    }
  }
}

TEST_CASE("certified bounds are offered only in Hilbert geometry") {
  for (const auto& p : registry()) {
    CHECK_FALSE(p.certified_bounds({MethodFamily::BanachMinResidual, 1.0}, SpaceGeometry::sequence(3.0)).has_value());
  }
  CHECK(make_problem("quad2d").certified_bounds({MethodFamily::BanachMinResidual, 1.0}, SpaceGeometry::sequence(2.0)).has_value());
  CHECK_FALSE(make_problem("indefinite2d").certified_bounds({MethodFamily::MinResidual, 1.0}, kE).has_value());
}

TEST_CASE("certified runs on every built-in problem") {
  std::size_t feasible_runs = 0;
  for (const auto& p : registry()) {
    for (auto f : kHilbertMethodFamilies) {
      const MethodSpec m{f, 1.0};
      const auto b = p.certified_bounds(m, kE);
      if (!b) continue;
      const auto c = certify(*b, 1.0, norm(kE, p.eval_f(p.x0)));
      if (!c.feasible) continue;
      ++feasible_runs;
      const Certification cert{*b, c};
      const auto t = solve(p, m, kE, {1e-10, 2000}, &cert);
      CHECK_MESSAGE(t.termination == Termination::Converged, p.name, " ", to_string(f));
      CHECK_MESSAGE(verify_relaxation(t, c, *b, 1e-9).verified(), p.name, " ", to_string(f));
    }
  }
  CHECK(feasible_runs >= 20);
}

TEST_CASE("chandrasekhar converges under steepest descent and matches Newton") {
  const Problem p = make_problem("chandrasekhar", {{"c", {0.5}}, {"n", {20}}});
  const auto t = solve(p, {MethodFamily::SteepestDescent, 1.0}, kE, {1e-10, 1000});
  CHECK(t.termination == Termination::Converged);
  CHECK(t.iterations() < 200);
  const Vector xs = newton_reference_solution(p);
  CHECK((t.last().x - xs).norm() <= 1e-8);
  // H is increasing in the node and bounded by 1 / sqrt(1 - c).
  for (int i = 1; i < p.dim; ++i) CHECK(xs[i] > xs[i - 1]);
  CHECK(xs.maxCoeff() < 1.0 / std::sqrt(0.5));
}
