#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <vector>

#include "copmix/grid.hpp"
#include "copmix/rng.hpp"

using namespace copmix;
using Catch::Matchers::WithinAbs;

namespace {

TransitionMatrix uniform_matrix(int m) {
  return TransitionMatrix(m, Eigen::MatrixXd::Constant(m, m, 1.0 / m), "independence",
                          "cdf-difference");
}

TransitionMatrix identity_matrix(int m) {
  return TransitionMatrix(m, Eigen::MatrixXd::Identity(m, m), "frechet_m", "cdf-difference");
}

double max_abs_diff(const TransitionMatrix& a, const TransitionMatrix& b) {
  return (a.entries() - b.entries()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("cell_volume reference values") {
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j)
      CHECK_THAT(cell_volume(CopulaSpec::independence(), i, j, 4),
                 WithinAbs(1.0 / 16.0, 1e-15));

  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j)
      CHECK_THAT(cell_volume(CopulaSpec::frechet_m(), i, j, 4),
                 WithinAbs(i == j ? 0.25 : 0.0, 1e-15));

  const auto mix_pm = CopulaSpec::mixture(
      {CopulaSpec::independence(), CopulaSpec::frechet_m()}, {0.5, 0.5});
  CHECK_THAT(cell_volume(mix_pm, 2, 2, 4), WithinAbs(5.0 / 32.0, 1e-15));

  CHECK_THROWS_AS(cell_volume(CopulaSpec::independence(), 0, 1, 4), OutOfRangeParameter);
  CHECK_THROWS_AS(cell_volume(CopulaSpec::independence(), 1, 5, 4), OutOfRangeParameter);
}

TEST_CASE("discretize reference matrices") {
  const auto u = discretize(CopulaSpec::independence(), 4);
  CHECK(u.method() == "cdf-difference");
  CHECK(max_abs_diff(u, uniform_matrix(4)) <= 1e-15);

  const auto id = discretize(CopulaSpec::frechet_m(), 4);
  CHECK(max_abs_diff(id, identity_matrix(4)) <= 1e-15);

  const auto clayton = discretize(CopulaSpec::clayton(1.0), 64);
  CHECK(clayton.max_row_sum_error() <= 1e-12);
  CHECK(clayton.max_col_sum_error() <= 1e-12);

  CHECK_THROWS_AS(discretize(CopulaSpec::independence(), 1), OutOfRangeParameter);
  CHECK_THROWS_AS(discretize(CopulaSpec::independence(), 5000), OutOfRangeParameter);
}

TEST_CASE("every constructed matrix is doubly stochastic within 1e-12") {
  const std::vector<CopulaSpec> specs = {
      CopulaSpec::independence(),
      CopulaSpec::frechet_m(),
      CopulaSpec::clayton(1.0),
      CopulaSpec::gumbel(2.0),
      CopulaSpec::marshall_olkin(0.5, 0.5),
      CopulaSpec::student_t(0.5, 3.0),
      CopulaSpec::mixture({CopulaSpec::clayton(1.0), CopulaSpec::marshall_olkin(0.5, 0.5)},
                          {0.4, 0.6})};
  for (const auto& spec : specs) {
    const int m = spec.has_closed_cdf() ? 32 : 16;
    const auto p = discretize(spec, m);
    INFO(spec.id());
    CHECK(p.is_doubly_stochastic(1e-12));
  }
}

TEST_CASE("fold algebra") {
  const auto u = uniform_matrix(4);
  const auto id = identity_matrix(4);
  const auto p = discretize(CopulaSpec::clayton(1.0), 4);

  // independence absorbs, Frechet-M is the identity of the fold product
  CHECK(max_abs_diff(fold(u, p), u) <= 1e-14);
  CHECK(max_abs_diff(fold(p, u), u) <= 1e-14);
  CHECK(max_abs_diff(fold(id, p), p) <= 1e-15);
  CHECK(max_abs_diff(fold(p, id), p) <= 1e-15);

  const auto blend = mix({{0.5, u}, {0.5, id}});
  const auto expected = mix({{0.75, u}, {0.25, id}});
  CHECK(max_abs_diff(fold(blend, blend), expected) <= 1e-15);

  CHECK_THROWS_AS(fold(u, uniform_matrix(8)), ResolutionMismatch);
}

TEST_CASE("power by repeated squaring") {
  const auto u = uniform_matrix(4);
  const auto p = discretize(CopulaSpec::clayton(1.0), 8);
  CHECK(max_abs_diff(power(p, 1), p) == 0.0);
  CHECK(max_abs_diff(power(u, 7), u) <= 1e-14);

  const auto blend = mix({{0.5, uniform_matrix(4)}, {0.5, identity_matrix(4)}});
  CHECK(max_abs_diff(power(blend, 2), fold(blend, blend)) <= 1e-15);

  // power(P,n) equals n sequential folds
  auto seq = p;
  for (int k = 2; k <= 6; ++k) seq = fold(seq, p);
  CHECK(max_abs_diff(power(p, 6), seq) <= 1e-13);

  CHECK_THROWS_AS(power(p, 0), OutOfRangeParameter);
  CHECK_THROWS_AS(power(p, 2000000), OutOfRangeParameter);
}

TEST_CASE("mix weights and resolutions") {
  const auto u = uniform_matrix(4);
  const auto id = identity_matrix(4);
  const auto p = discretize(CopulaSpec::clayton(1.0), 4);

  CHECK(max_abs_diff(mix({{1.0, p}}), p) == 0.0);

  const auto blend = mix({{0.5, u}, {0.5, id}});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK_THAT(blend(i, j), WithinAbs(i == j ? 0.625 : 0.125, 1e-15));

  CHECK_THROWS_AS(mix({{0.6, u}, {0.5, id}}), BadWeights);
  CHECK_THROWS_AS(mix({{0.5, u}, {0.5, uniform_matrix(8)}}), ResolutionMismatch);
  CHECK_THROWS_AS(mix({}), BadWeights);
}

TEST_CASE("checkerboard cdf") {
  const auto u = uniform_matrix(8);
  for (std::uint64_t i = 0; i < 30; ++i) {
    const double x = Philox::uniform01(11, 2 * i), y = Philox::uniform01(11, 2 * i + 1);
    CHECK_THAT(checkerboard_cdf(u, UnitSquarePoint(x, y)), WithinAbs(x * y, 1e-15));
  }

  const auto p = discretize(CopulaSpec::clayton(1.0), 8);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const double x = Philox::uniform01(12, i);
    CHECK_THAT(checkerboard_cdf(p, UnitSquarePoint(x, 1.0)), WithinAbs(x, 1e-13));
    CHECK_THAT(checkerboard_cdf(p, UnitSquarePoint(1.0, x)), WithinAbs(x, 1e-13));
    CHECK_THAT(checkerboard_cdf(p, UnitSquarePoint(x, 0.0)), WithinAbs(0.0, 1e-15));
  }

  // node values are the cumulative cell masses
  double cum = 0.0;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) cum += p(k, l) / 8.0;
  CHECK_THAT(checkerboard_cdf(p, UnitSquarePoint(3.0 / 8.0, 3.0 / 8.0)),
             WithinAbs(cum, 1e-14));
}

TEST_CASE("aggregation coherence: block sums of 2m equal m") {
  const std::vector<CopulaSpec> specs = {
      CopulaSpec::clayton(1.0), CopulaSpec::gumbel(2.0), CopulaSpec::marshall_olkin(0.5, 0.5),
      CopulaSpec::mixture({CopulaSpec::independence(), CopulaSpec::frechet_m()}, {0.5, 0.5})};
  const int m = 16;
  for (const auto& spec : specs) {
    const auto coarse = discretize(spec, m);
    const auto fine = discretize(spec, 2 * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double block = fine(2 * i, 2 * j) + fine(2 * i, 2 * j + 1) +
                             fine(2 * i + 1, 2 * j) + fine(2 * i + 1, 2 * j + 1);
        // fine entries are 2m * volume, coarse are m * volume
        CHECK_THAT(block / 2.0, WithinAbs(coarse(i, j), 1e-12));
      }
  }
}

TEST_CASE("fold is associative and distributes over mix") {
  const auto a = discretize(CopulaSpec::clayton(1.0), 16);
  const auto b = discretize(CopulaSpec::gumbel(2.0), 16);
  const auto c = discretize(CopulaSpec::marshall_olkin(0.5, 0.5), 16);

  CHECK(max_abs_diff(fold(fold(a, b), c), fold(a, fold(b, c))) <= 1e-13);

  const auto lhs = fold(a, mix({{0.3, b}, {0.7, c}}));
  const auto rhs = mix({{0.3, fold(a, b)}, {0.7, fold(a, c)}});
  CHECK(max_abs_diff(lhs, rhs) <= 1e-13);
}

TEST_CASE("student t volumes: raw mass, balancing, symmetry") {
  const double rho = 0.5, nu = 3.0;
  const int m = 16;
  const Eigen::MatrixXd raw = detail::volumes_student_t(rho, nu, m);
  CHECK_THAT(raw.sum(), WithinAbs(1.0, 1e-8));
  // v-side is exact, so raw row sums are already 1/m up to rounding
  for (int i = 0; i < m; ++i) CHECK_THAT(raw.row(i).sum(), WithinAbs(1.0 / m, 1e-13));

  const auto p = discretize(CopulaSpec::student_t(rho, nu), m);
  CHECK(p.method() == "density-quadrature");
  CHECK(p.is_doubly_stochastic(1e-12));
  CHECK((p.entries() - p.entries().transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  // single-cell volumes agree with the CDF second difference (independent route)
  const auto spec = CopulaSpec::student_t(rho, nu);
  for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 1}, {3, 7}, {16, 16}, {8, 2}}) {
    const double direct = cell_volume(spec, i, j, m);
    const double by_cdf =
        cdf(spec, i / 16.0, j / 16.0) - cdf(spec, (i - 1) / 16.0, j / 16.0) -
        cdf(spec, i / 16.0, (j - 1) / 16.0) + cdf(spec, (i - 1) / 16.0, (j - 1) / 16.0);
    CHECK_THAT(direct, WithinAbs(by_cdf, 5e-8));
  }
}

TEST_CASE("matrix file round trip is bitwise") {
  const auto p = discretize(CopulaSpec::clayton(1.0), 8);
  std::ostringstream os;
  write_matrix(os, p);
  const std::string text = os.str();
  CHECK(text.rfind("m=8\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);

  std::istringstream is(text);
  const auto q = read_matrix(is);
  CHECK(q.resolution() == 8);
  CHECK((p.entries() - q.entries()).cwiseAbs().maxCoeff() == 0.0);

  std::ostringstream os2;
  write_matrix(os2, q);
  CHECK(os2.str() == text);

  std::istringstream bad("q=8\n");
  CHECK_THROWS_AS(read_matrix(bad), std::invalid_argument);
}
