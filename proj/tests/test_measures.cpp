#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "softquant/matrix.hpp"
#include "softquant/measures.hpp"

namespace {

using softquant::DiscreteMeasure;
using softquant::DistanceSpec;
using softquant::Matrix;
using softquant::Point;
using softquant::SourceSpec;

struct Moments {
  Point mean;
  Matrix cov;
};

Moments sample_moments(const std::vector<Point>& draws) {
  const std::size_t n = draws.size();
  const std::size_t d = draws.front().size();
  Moments m{Point(d, 0.0), Matrix(d, d)};
  for (const Point& x : draws)
    for (std::size_t l = 0; l < d; ++l) m.mean[l] += x[l];
  for (std::size_t l = 0; l < d; ++l) m.mean[l] /= static_cast<double>(n);
  for (const Point& x : draws)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        m.cov(a, b) += (x[a] - m.mean[a]) * (x[b] - m.mean[b]);
  for (double& v : m.cov.data) v /= static_cast<double>(n);
  return m;
}

Matrix cov2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("source parameter validation") {
  CHECK_THROWS_WITH_AS(SourceSpec::normal1d(0.0, 0.0),
                       "normal1d: stddev must be > 0", std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::exponential(-1.0),
                       "exponential: rate must be > 0", std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::gamma(0.0, 2.0), "gamma: shape must be > 0",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::gamma(2.0, 0.0), "gamma: scale must be > 0",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::uniform_box({0.0, 0.0}, {1.0}),
                       "uniform_box: bounds size mismatch", std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::uniform_box({0.0, 1.0}, {1.0, 1.0}),
                       "uniform_box: lo must be < hi", std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::mvnormal({0.0}, cov2(3, 1, 1, 3)),
                       "mvnormal: mean/cov shape mismatch", std::invalid_argument);
  // Correlation above 1 is not a covariance; the factorization must refuse.
  CHECK_THROWS_AS(SourceSpec::mvnormal({0.0, 0.0}, cov2(1, 2, 2, 1)),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::empirical({}), "empirical: no points",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(SourceSpec::empirical({{1.0, 2.0}, {1.0}}),
                       "empirical: ragged points", std::invalid_argument);
}

TEST_CASE("total variance has the family closed forms") {
  CHECK(SourceSpec::normal1d(0.0, 1.0).total_variance() == doctest::Approx(1.0));
  CHECK(SourceSpec::normal1d(3.0, 2.0).total_variance() == doctest::Approx(4.0));
  CHECK(SourceSpec::exponential(1.0).total_variance() == doctest::Approx(1.0));
  CHECK(SourceSpec::exponential(2.0).total_variance() == doctest::Approx(0.25));
  CHECK(SourceSpec::gamma(2.0, 2.0).total_variance() == doctest::Approx(8.0));
  CHECK(SourceSpec::uniform_box({0.0, 0.0}, {1.0, 1.0}).total_variance() ==
        doctest::Approx(2.0 / 12.0));
  CHECK(SourceSpec::mvnormal({0.0, 0.0}, cov2(3, 1, 1, 3)).total_variance() ==
        doctest::Approx(6.0));
  // Empirical variance of {0, 2}: mean 1, per-point deviation 1.
  CHECK(SourceSpec::empirical({{0.0}, {2.0}}).total_variance() ==
        doctest::Approx(1.0));
}

TEST_CASE("sampling is deterministic and prefix-stable") {
  const SourceSpec spec = SourceSpec::gamma(2.0, 2.0);
  const std::vector<Point> a = softquant::sample(spec, 200, 42);
  const std::vector<Point> b = softquant::sample(spec, 200, 42);
  CHECK(a == b);

  // Draw i depends only on (seed, i): a longer run extends a shorter one.
  const std::vector<Point> prefix = softquant::sample(spec, 50, 42);
  CHECK(std::equal(prefix.begin(), prefix.end(), a.begin()));

  const std::vector<Point> other = softquant::sample(spec, 200, 43);
  CHECK(a != other);
}

TEST_CASE("standard normal sample obeys the law of large numbers") {
  const std::size_t n = 100000;
  const std::vector<Point> draws =
      softquant::sample(SourceSpec::normal1d(0.0, 1.0), n, 7);
  const Moments m = sample_moments(draws);
  CHECK(std::abs(m.mean[0]) <= 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(m.cov(0, 0) - 1.0) <= 0.05);
}

TEST_CASE("exponential and gamma samples match their moments") {
  const std::size_t n = 100000;
  const std::vector<Point> ex =
      softquant::sample(SourceSpec::exponential(1.0), n, 11);
  const Moments me = sample_moments(ex);
  CHECK(std::abs(me.mean[0] - 1.0) <= 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(me.cov(0, 0) - 1.0) <= 0.1);
  for (const Point& x : ex) CHECK(x[0] >= 0.0);

  const std::vector<Point> ga = softquant::sample(SourceSpec::gamma(2.0, 2.0), n, 13);
  const Moments mg = sample_moments(ga);
  // Mean 4, variance 8.
  CHECK(std::abs(mg.mean[0] - 4.0) <=
        4.0 * std::sqrt(8.0) / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(mg.cov(0, 0) - 8.0) <= 0.5);
  for (const Point& x : ga) CHECK(x[0] >= 0.0);
}

TEST_CASE("uniform box samples stay inside the box") {
  const std::vector<Point> draws =
      softquant::sample(SourceSpec::uniform_box({0.0, 0.0}, {1.0, 1.0}), 5000, 3);
  for (const Point& x : draws) {
    CHECK(x[0] >= 0.0);
    CHECK(x[0] < 1.0);
    CHECK(x[1] >= 0.0);
    CHECK(x[1] < 1.0);
  }
  const Moments m = sample_moments(draws);
  CHECK(std::abs(m.mean[0] - 0.5) <= 0.02);
  CHECK(std::abs(m.mean[1] - 0.5) <= 0.02);
}

TEST_CASE("correlated normal samples reproduce the covariance") {
  const SourceSpec spec = SourceSpec::mvnormal({0.0, 0.0}, cov2(3, 1, 1, 3));
  const std::vector<Point> draws = softquant::sample(spec, 100000, 17);
  const Moments m = sample_moments(draws);
  CHECK(std::abs(m.mean[0]) <= 0.05);
  CHECK(std::abs(m.mean[1]) <= 0.05);
  CHECK(std::abs(m.cov(0, 0) - 3.0) <= 0.15);
  CHECK(std::abs(m.cov(1, 1) - 3.0) <= 0.15);
  CHECK(std::abs(m.cov(0, 1) - 1.0) <= 0.15);
}

TEST_CASE("empirical sources draw only the given points") {
  const std::vector<Point> support{{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  const std::vector<Point> draws =
      softquant::sample(SourceSpec::empirical(support), 1000, 5);
  std::vector<bool> seen(support.size(), false);
  for (const Point& x : draws) {
    const auto it = std::find(support.begin(), support.end(), x);
    REQUIRE(it != support.end());
    seen[static_cast<std::size_t>(it - support.begin())] = true;
  }
  // With a thousand draws over three points, every point shows up.
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }));
}

TEST_CASE("center of measure under quadratic cost is the sample mean") {
  const DistanceSpec quadratic{2.0, 2.0, {}};
  const std::size_t n = 20000;

  const SourceSpec normal = SourceSpec::normal1d(0.0, 1.0);
  const Point c = softquant::center_of_measure(normal, quadratic, n, 3);
  CHECK(std::abs(c[0]) <= 4.0 / std::sqrt(static_cast<double>(n)));

  // The closed form averages exactly the draws sample() would hand out.
  const std::vector<Point> draws = softquant::sample(normal, n, 3);
  double mean = 0.0;
  for (const Point& x : draws) mean += x[0];
  mean /= static_cast<double>(n);
  CHECK(c[0] == doctest::Approx(mean).epsilon(1e-15));

  const Point cg = softquant::center_of_measure(SourceSpec::gamma(2.0, 2.0),
                                                quadratic, n, 3);
  CHECK(std::abs(cg[0] - 4.0) <=
        4.0 * std::sqrt(8.0) / std::sqrt(static_cast<double>(n)));

  const SourceSpec mv = SourceSpec::mvnormal({0.0, 0.0}, cov2(3, 1, 1, 3));
  const Point cm = softquant::center_of_measure(mv, quadratic, n, 3);
  CHECK(std::abs(cm[0]) <= 0.06);
  CHECK(std::abs(cm[1]) <= 0.06);
}

TEST_CASE("generic one-atom minimizer agrees with the closed form") {
  const DistanceSpec quadratic{2.0, 2.0, {}};
  const std::size_t n = 20000;
  for (const SourceSpec& spec :
       {SourceSpec::normal1d(0.0, 1.0), SourceSpec::gamma(2.0, 2.0)}) {
    const Point closed = softquant::center_of_measure(spec, quadratic, n, 9);
    const Point generic =
        softquant::center_of_measure_generic(spec, quadratic, n, 9);
    const double sigma = std::sqrt(spec.total_variance());
    CHECK(std::abs(closed[0] - generic[0]) <= 1e-3 * sigma);
  }
}

TEST_CASE("generic minimizer finds the median under first-order cost") {
  // For a symmetric source the r=1 minimizer coincides with the mean, so
  // the generic path can be checked without a second closed form.
  const DistanceSpec absolute{2.0, 1.0, {}};
  const Point c = softquant::center_of_measure(SourceSpec::normal1d(0.0, 1.0),
                                               absolute, 50000, 21);
  CHECK(std::abs(c[0]) <= 0.1);
}

TEST_CASE("center of measure rejects an empty budget") {
  CHECK_THROWS_WITH_AS(softquant::center_of_measure(SourceSpec::normal1d(0.0, 1.0),
                                                    DistanceSpec{}, 0, 1),
                       "center_of_measure: need n >= 1", std::invalid_argument);
}

TEST_CASE("discrete measure validation") {
  DiscreteMeasure ok{{{0.0}, {1.0}}, {0.5, 0.5}};
  CHECK_NOTHROW(ok.validate());
  CHECK_THROWS_WITH_AS((DiscreteMeasure{{}, {}}.validate()), "empty support",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((DiscreteMeasure{{{0.0}}, {0.5, 0.5}}.validate()),
                       "atoms/weights size mismatch", std::invalid_argument);
  CHECK_THROWS_WITH_AS((DiscreteMeasure{{{0.0}, {1.0, 2.0}}, {0.5, 0.5}}.validate()),
                       "ragged atoms", std::invalid_argument);
  CHECK_THROWS_WITH_AS((DiscreteMeasure{{{0.0}, {1.0}}, {1.5, -0.5}}.validate()),
                       "negative weight", std::invalid_argument);
  CHECK_THROWS_WITH_AS((DiscreteMeasure{{{0.0}, {1.0}}, {0.6, 0.6}}.validate()),
                       "weights must sum to 1", std::invalid_argument);
}

TEST_CASE("cumulative distribution knots of a discrete measure") {
  SUBCASE("single atom") {
    const auto knots = softquant::empirical_cdf({{{4.0}}, {1.0}});
    REQUIRE(knots.size() == 1);
    CHECK(knots[0].first == 4.0);
    CHECK(knots[0].second == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("two atoms accumulate left to right") {
    const auto knots = softquant::empirical_cdf({{{0.0}, {1.0}}, {0.5, 0.5}});
    REQUIRE(knots.size() == 2);
    CHECK(knots[0] == std::pair<double, double>{0.0, 0.5});
    CHECK(knots[1].first == 1.0);
    CHECK(knots[1].second == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("unsorted atoms come out sorted, duplicates merged") {
    const auto knots = softquant::empirical_cdf(
        {{{1.0}, {0.0}, {1.0}}, {0.25, 0.5, 0.25}});
    REQUIRE(knots.size() == 2);
    CHECK(knots[0].first == 0.0);
    CHECK(knots[0].second == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(knots[1].first == 1.0);
    CHECK(knots[1].second == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("only one-dimensional measures have a scalar CDF") {
    CHECK_THROWS_WITH_AS(
        softquant::empirical_cdf({{{0.0, 0.0}}, {1.0}}),
        "empirical_cdf requires one-dimensional atoms", std::invalid_argument);
  }
}

TEST_CASE("source descriptions name the family") {
  CHECK(softquant::describe(SourceSpec::normal1d(0.0, 1.0)).find("normal1d") !=
        std::string::npos);
  CHECK(softquant::describe(SourceSpec::gamma(2.0, 2.0)).find("gamma") !=
        std::string::npos);
  CHECK(softquant::describe(SourceSpec::uniform_box({0.0}, {1.0})).find("uniform") !=
        std::string::npos);
}

}  // TEST_SUITE("measures")
