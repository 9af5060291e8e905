#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "bergman/measure.hpp"
#include "bergman/operators.hpp"

#include <json.hpp>

using namespace bergman;

namespace {

std::shared_ptr<const TruncatedBasis> make_basis(int D, double gamma) {
  return std::make_shared<TruncatedBasis>(D, gamma);
}

double moment1(double gamma, int k) {
  return std::exp(std::lgamma(k + 1.0) + std::lgamma(gamma + 2.0) -
                  std::lgamma(k + gamma + 2.0));
}

Eigen::MatrixXcd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = complexd(g(rng), g(rng));
  return m;
}

Eigen::MatrixXcd householder_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = complexd(g(rng), g(rng));
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(n, n);
  u -= 2.0 / v.squaredNorm() * (v * v.adjoint());
  return u;
}

}  // namespace

TEST_CASE("basis: extreme sector is the normalized top monomial") {
  const int D = 9;
  const double gamma = 1.4;
  auto basis = make_basis(D, gamma);
  CHECK(basis->size() == (D + 1) * (D + 1));
  CHECK(basis->sector_size(D) == 1);
  CHECK(basis->sector_size(-D) == 1);
  const Symbol& top = basis->vector_symbol(basis->position(D, 0));
  const auto terms = top.terms();
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].a[0] == D);
  CHECK(terms[0].b[0] == 0);
  CHECK(terms[0].coeff.real() ==
        doctest::Approx(1.0 / std::sqrt(moment1(gamma, D))).epsilon(1e-12));
}

// total absolute term mass of <f, g>; the attainable accuracy of the
// monomial-coefficient route is eps times this (it grows like 34^degree,
// which is why the assembly works with recurrence node values instead)
static double abs_inner_mass(const Symbol& f, const Symbol& g, double gamma) {
  double s = 0.0;
  for (const auto& t1 : f.terms())
    for (const auto& t2 : g.terms())
      if (t1.a[0] + t2.b[0] == t2.a[0] + t1.b[0])
        s += std::abs(t1.coeff) * std::abs(t2.coeff) *
             moment1(gamma, t1.a[0] + t2.b[0]);
  return s;
}

TEST_CASE("basis: orthonormal under the exact monomial inner product") {
  const WeightedMeasure meas{1, 0.8};
  for (int D : {4, 8}) {
    auto basis = make_basis(D, 0.8);
    CHECK(basis->orthonormality_defect() < 1e-10);
    for (int i = 0; i < basis->size(); ++i)
      for (int j = i; j < basis->size(); ++j) {
        const Symbol& fi = basis->vector_symbol(i);
        const Symbol& fj = basis->vector_symbol(j);
        const complexd g = symbol_inner(fi, fj, meas);
        const double bound = 1e-12 * abs_inner_mass(fi, fj, 0.8) + 1e-13;
        CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < bound);
      }
  }
}

TEST_CASE("basis: flat-weight sector zero starts with 1 and u - 1/2") {
  auto basis = make_basis(6, 0.0);
  const Symbol& first = basis->vector_symbol(basis->position(0, 0));
  CHECK(std::abs(first.eval1(complexd(0.3, 0.4)) - 1.0) < 1e-13);
  // second vector is (u - 1/2) / sqrt(1/12)
  const Symbol& second = basis->vector_symbol(basis->position(0, 1));
  const double u = 0.37;
  const complexd z(std::sqrt(u), 0.0);
  CHECK(second.eval1(z).real() ==
        doctest::Approx((u - 0.5) * std::sqrt(12.0)).epsilon(1e-12));
  // and the expansion of u - 1/2 picks out exactly that direction
  Symbol f = Symbol::monomial1(1, 1) + Symbol::constant(1, -0.5);
  const Eigen::VectorXcd c = basis->expand(f);
  for (int i = 0; i < basis->size(); ++i) {
    const double want = i == basis->position(0, 1) ? std::sqrt(1.0 / 12.0) : 0.0;
    CHECK(std::abs(c[i] - want) < 1e-13);
  }
}

TEST_CASE("projection: diagonal idempotent self-adjoint, reproduces holomorphics") {
  for (double gamma : {0.0, 2.5}) {
    auto basis = make_basis(12, gamma);
    const OperatorMatrix P = projection_matrix(basis);
    CHECK((P.mat * P.mat - P.mat).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((P.mat - P.mat.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    for (int a = 0; a <= 8; ++a) {
      const Eigen::VectorXcd v = basis->expand(Symbol::monomial1(a, 0));
      CHECK((P.mat * v - v).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("projection: smooths |z|^2 to its mean and z^2 zbar to (2/3) z") {
  auto basis = make_basis(10, 0.0);
  const OperatorMatrix P = projection_matrix(basis);
  {
    const Eigen::VectorXcd got = P.mat * basis->expand(Symbol::monomial1(1, 1));
    const Eigen::VectorXcd want = basis->expand(Symbol::constant(1, 0.5));
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-13);
  }
  {
    const Eigen::VectorXcd got = P.mat * basis->expand(Symbol::monomial1(2, 1));
    const Eigen::VectorXcd want =
        basis->expand(Symbol::monomial1(1, 0).scaled(2.0 / 3.0));
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("multiplication: identity symbol, self-adjoint real symbol, moments") {
  auto basis = make_basis(9, 1.2);
  {
    const OperatorMatrix one =
        multiplication_matrix(basis, Symbol::constant(1, 1.0));
    CHECK((one.mat - Eigen::MatrixXcd::Identity(basis->size(), basis->size()))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
    CHECK(one.max_dropped() < 1e-12);
  }
  {
    // real symbol |z|^2: Hermitian matrix
    const OperatorMatrix m = multiplication_matrix(basis, Symbol::monomial1(1, 1));
    CHECK((m.mat - m.mat.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
  {
    // <M_zbar z, 1> = m_1 at gamma = 0
    auto flat = make_basis(6, 0.0);
    const OperatorMatrix mz = multiplication_matrix(flat, Symbol::monomial1(0, 1));
    const Eigen::VectorXcd img = mz.mat * flat->expand(Symbol::monomial1(1, 0));
    CHECK(std::abs(img[flat->position(0, 0)] - 0.5) < 1e-13);
  }
}

TEST_CASE("multiplication: charge additivity and truncation accounting") {
  auto basis = make_basis(8, 0.6);
  const OperatorMatrix mz = multiplication_matrix(basis, Symbol::monomial1(1, 0));
  for (int c = 0; c < basis->size(); ++c)
    for (int r = 0; r < basis->size(); ++r)
      if (std::abs(mz.mat(r, c)) > 1e-14)
        CHECK(basis->index()[r].q == basis->index()[c].q + 1);
  // the top holomorphic vector is pushed entirely out of the box
  const int top = basis->position(8, 0);
  const double want = moment1(0.6, 9) / moment1(0.6, 8);
  CHECK(mz.dropped[top] == doctest::Approx(want).epsilon(1e-11));
  // interior columns suffer no truncation at all
  CHECK(mz.dropped[basis->position(0, 0)] < 1e-14);
  CHECK(mz.dropped[basis->position(2, 1)] < 1e-14);
}

TEST_CASE("hankel: vanishes on holomorphic symbols, matches the closed form") {
  auto basis = make_basis(16, 0.0);
  {
    const OperatorMatrix hz = hankel_matrix(basis, Symbol::monomial1(1, 0));
    CHECK(hz.mat.cwiseAbs().maxCoeff() < 1e-13);
  }
  const OperatorMatrix h = hankel_matrix(basis, Symbol::monomial1(0, 1));
  // column a has norm s_a; the first two are 1/sqrt(2), 1/sqrt(6)
  CHECK(h.mat.col(0).norm() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(h.mat.col(1).norm() == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-12));
  CHECK(h.max_dropped() < 1e-14);  // zbar never leaves the box on holomorphics
}

TEST_CASE("commutator identity [M_f, P] = H_f - H_fbar^* entrywise") {
  const Symbol f = Symbol::monomial1(2, 1) + Symbol::monomial1(0, 2, 3.0) +
                   Symbol::constant(1, -2.0);
  for (double gamma : {0.0, 1.0, 2.5}) {
    auto basis = make_basis(12, gamma);
    const OperatorMatrix c = commutator_matrix(basis, f);
    const Eigen::MatrixXcd hf = embed_full(hankel_matrix(basis, f));
    const Eigen::MatrixXcd hfbar = embed_full(hankel_matrix(basis, f.conj()));
    CHECK((c.mat - (hf - hfbar.adjoint())).cwiseAbs().maxCoeff() < 1e-12);
  }
  // constant symbols commute
  auto basis = make_basis(8, 0.5);
  const OperatorMatrix c0 =
      commutator_matrix(basis, Symbol::constant(1, complexd(2.0, -1.0)));
  CHECK(c0.mat.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("singular values: fixed matrices, unitary invariance, eigen cross-check") {
  {
    Eigen::MatrixXcd t(2, 2);
    t << 0, 2, 0, 0;
    const auto s = singular_values(t);
    CHECK(s.s[0] == doctest::Approx(2.0));
    CHECK(s.s[1] == doctest::Approx(0.0));
  }
  {
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2, 2);
    t(0, 0) = 3.0;
    t(1, 1) = 4.0;
    const auto s = singular_values(t);
    CHECK(s.s[0] == doctest::Approx(4.0));
    CHECK(s.s[1] == doctest::Approx(3.0));
  }
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXcd t = random_matrix(9, 9, rng);
    const Eigen::MatrixXcd u = householder_unitary(9, rng);
    const Eigen::MatrixXcd v = householder_unitary(9, rng);
    const auto s1 = singular_values(t);
    const auto s2 = singular_values(Eigen::MatrixXcd(u * t * v));
    for (int i = 0; i < 9; ++i)
      CHECK(s1.s[i] == doctest::Approx(s2.s[i]).epsilon(1e-10));
  }
  // validate SVD against T*T eigenvalues on a Hankel block
  auto basis = make_basis(24, 2.0);
  const OperatorMatrix h = hankel_matrix(basis, Symbol::monomial1(0, 1));
  const auto s = singular_values(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.mat.adjoint() * h.mat);
  std::vector<double> byeig;
  for (int i = eig.eigenvalues().size() - 1; i >= 0; --i)
    byeig.push_back(std::sqrt(std::max(0.0, eig.eigenvalues()[i])));
  for (size_t i = 0; i < s.s.size(); ++i)
    CHECK(std::abs(s.s[i] - byeig[i]) < 1e-10);
}

TEST_CASE("schatten norms: closed forms, appended zeros, triangle inequalities") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 4.0;
  CHECK(schatten_norm(d, 2.0) == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(schatten_norm(d, 1.0) == doctest::Approx(7.0).epsilon(1e-13));
  Eigen::MatrixXcd ones(2, 2);
  ones << 1, 1, 1, 1;
  CHECK(schatten_norm(ones, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
  // appending zero rows/columns changes nothing
  Eigen::MatrixXcd padded = Eigen::MatrixXcd::Zero(4, 3);
  padded.topLeftCorner(2, 2) = d;
  CHECK(schatten_norm(padded, 1.3) ==
        doctest::Approx(schatten_norm(d, 1.3)).epsilon(1e-13));
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXcd a = random_matrix(6, 6, rng);
    const Eigen::MatrixXcd b = random_matrix(6, 6, rng);
    for (double p : {1.0, 1.7, 2.0})
      CHECK(schatten_norm(Eigen::MatrixXcd(a + b), p) <=
            schatten_norm(a, p) + schatten_norm(b, p) + 1e-10);
    for (double p : {0.4, 0.8}) {
      const double lhs = std::pow(schatten_norm(Eigen::MatrixXcd(a + b), p), p);
      const double rhs =
          std::pow(schatten_norm(a, p), p) + std::pow(schatten_norm(b, p), p);
      CHECK(lhs <= rhs + 1e-10);
    }
  }
  CHECK_THROWS_AS(schatten_norm(d, 0.0), std::domain_error);
}

TEST_CASE("entrywise schatten bound: equality cases and a randomized suite") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = complexd(1.0, 2.0);
  d(1, 1) = -0.5;
  d(2, 2) = complexd(0.0, 3.0);
  for (double p : {0.5, 1.0, 2.0}) {
    const auto r = entrywise_schatten_check(d, p);
    CHECK(r.pass);
    CHECK(std::abs(r.slack) < 1e-11);
  }
  Eigen::MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  const auto r = entrywise_schatten_check(x, 1.0);
  CHECK(r.lhs == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.rhs == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.pass);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 30);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = dim(rng), m = dim(rng);
    const Eigen::MatrixXcd t = random_matrix(n, m, rng);
    for (double p : {0.5, 1.0, 2.0}) CHECK(entrywise_schatten_check(t, p).pass);
  }
  CHECK_THROWS_AS(entrywise_schatten_check(x, 2.5), std::domain_error);
}

TEST_CASE("hankel spectrum oracle matches the truncated model") {
  for (double gamma : {0.0, 2.0}) {
    auto basis = make_basis(64, gamma);
    const OperatorMatrix h = hankel_matrix(basis, Symbol::monomial1(0, 1));
    const auto numeric = singular_values(h);
    const auto exact = hankel_zbar_spectrum_exact(gamma, 40);
    for (int a = 0; a <= 30; ++a)
      CHECK(std::abs(numeric.s[a] - exact.s[a]) < 1e-10);
  }
  // named values: gamma 0 gives 1/sqrt((a+1)(a+2)); gamma 1 gives s_1 = 1/sqrt(6)
  const auto flat = hankel_zbar_spectrum_exact(0.0, 3);
  CHECK(flat.s[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(flat.s[1] == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
  const auto one = hankel_zbar_spectrum_exact(1.0, 3);
  CHECK(one.s[1] == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("hankel partial p-sums diverge at the cutoff and converge above it") {
  // closed form s_a^2 = 1/((a+1)(a+2)) summed on the fly
  auto partial = [](double p, long upto) {
    double acc = 0.0;
    for (long a = 0; a < upto; ++a)
      acc += std::pow((a + 1.0) * (a + 2.0), -0.5 * p);
    return acc;
  };
  // p = 1 (the cutoff 2n/(n+1+gamma) at gamma = 0) is log-divergent: every
  // squaring of the index budget adds at least 10 percent
  double prev = partial(1.0, 1L << 8);
  for (int e : {12, 16, 20}) {
    const double cur = partial(1.0, 1L << e);
    CHECK(cur > prev * 1.10);
    prev = cur;
  }
  // p = 1.2 converges: the doubling increment at 2^20 is under 1 percent,
  // and increments keep shrinking
  const double t1 = partial(1.2, 1L << 20), t2 = partial(1.2, 1L << 21);
  CHECK(t2 < t1 * 1.01);
  const double t0 = partial(1.2, 1L << 19);
  CHECK(t2 - t1 < t1 - t0);
}

TEST_CASE("matrix export writes a parsable header and a complete payload") {
  auto basis = make_basis(4, 0.3);
  const OperatorMatrix h = hankel_matrix(basis, Symbol::monomial1(0, 1));
  const std::string base = "export_probe";
  export_matrix(h, base);
  std::ifstream hdr(base + ".json");
  REQUIRE(hdr.good());
  nlohmann::json j;
  hdr >> j;
  CHECK(j["rows"] == h.mat.rows());
  CHECK(j["cols"] == h.mat.cols());
  CHECK(j["D"] == 4);
  CHECK(j["domain"] == "holomorphic");
  std::ifstream bin(base + ".bin", std::ios::binary | std::ios::ate);
  REQUIRE(bin.good());
  CHECK(long(bin.tellg()) == long(h.mat.rows()) * h.mat.cols() * 16);
  std::remove((base + ".json").c_str());
  std::remove((base + ".bin").c_str());
}
