#include "softquant/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "softquant/text_io.hpp"

namespace softquant {

namespace {

// Stream bases for internal consumers; keep them disjoint from
// kSampleStream so public sampling indices never collide.
constexpr std::uint64_t kCenterPilotStream = 9ULL << 56;

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(what);
}

struct Validator {
  std::size_t dim = 1;

  void operator()(const Normal1d& d) {
    check_finite(d.mean, "normal1d: non-finite mean");
    if (!(d.stddev > 0.0) || !std::isfinite(d.stddev))
      throw std::invalid_argument("normal1d: stddev must be > 0");
    dim = 1;
  }
  void operator()(const Exponential& d) {
    if (!(d.rate > 0.0) || !std::isfinite(d.rate))
      throw std::invalid_argument("exponential: rate must be > 0");
    dim = 1;
  }
  void operator()(const GammaDist& d) {
    if (!(d.shape > 0.0) || !std::isfinite(d.shape))
      throw std::invalid_argument("gamma: shape must be > 0");
    if (!(d.scale > 0.0) || !std::isfinite(d.scale))
      throw std::invalid_argument("gamma: scale must be > 0");
    dim = 1;
  }
  void operator()(const UniformBox& d) {
    if (d.lo.empty() || d.lo.size() != d.hi.size())
      throw std::invalid_argument("uniform_box: bounds size mismatch");
    for (std::size_t l = 0; l < d.lo.size(); ++l) {
      check_finite(d.lo[l], "uniform_box: non-finite bound");
      check_finite(d.hi[l], "uniform_box: non-finite bound");
      if (!(d.lo[l] < d.hi[l]))
        throw std::invalid_argument("uniform_box: lo must be < hi");
    }
    dim = d.lo.size();
  }
  void operator()(const MvNormal& d) {
    if (d.mean.empty() || d.cov.rows != d.mean.size() || d.cov.cols != d.mean.size())
      throw std::invalid_argument("mvnormal: mean/cov shape mismatch");
    for (double v : d.mean) check_finite(v, "mvnormal: non-finite mean");
    for (double v : d.cov.data) check_finite(v, "mvnormal: non-finite covariance");
    dim = d.mean.size();
  }
  void operator()(const Empirical& d) {
    if (d.points.empty()) throw std::invalid_argument("empirical: no points");
    dim = d.points.front().size();
    if (dim == 0) throw std::invalid_argument("empirical: zero-dimensional points");
    for (const Point& pt : d.points) {
      if (pt.size() != dim) throw std::invalid_argument("empirical: ragged points");
      for (double v : pt) check_finite(v, "empirical: non-finite point");
    }
  }
};

}  // namespace

SourceSpec::SourceSpec(Dist dist) : dist_(std::move(dist)) {
  Validator v;
  std::visit(v, dist_);
  dim_ = v.dim;
  if (const auto* mv = std::get_if<MvNormal>(&dist_))
    chol_ = cholesky_lower(mv->cov);  // also verifies positive definiteness
}

SourceSpec SourceSpec::normal1d(double mean, double stddev) {
  return SourceSpec(Normal1d{mean, stddev});
}
SourceSpec SourceSpec::exponential(double rate) {
  return SourceSpec(Exponential{rate});
}
SourceSpec SourceSpec::gamma(double shape, double scale) {
  return SourceSpec(GammaDist{shape, scale});
}
SourceSpec SourceSpec::uniform_box(std::vector<double> lo, std::vector<double> hi) {
  return SourceSpec(UniformBox{std::move(lo), std::move(hi)});
}
SourceSpec SourceSpec::mvnormal(std::vector<double> mean, Matrix cov) {
  return SourceSpec(MvNormal{std::move(mean), std::move(cov)});
}
SourceSpec SourceSpec::empirical(std::vector<Point> points) {
  return SourceSpec(Empirical{std::move(points)});
}

double SourceSpec::total_variance() const {
  struct Visitor {
    double operator()(const Normal1d& d) const { return d.stddev * d.stddev; }
    double operator()(const Exponential& d) const { return 1.0 / (d.rate * d.rate); }
    double operator()(const GammaDist& d) const { return d.shape * d.scale * d.scale; }
    double operator()(const UniformBox& d) const {
      double total = 0.0;
      for (std::size_t l = 0; l < d.lo.size(); ++l) {
        const double w = d.hi[l] - d.lo[l];
        total += w * w / 12.0;
      }
      return total;
    }
    double operator()(const MvNormal& d) const {
      double total = 0.0;
      for (std::size_t l = 0; l < d.cov.rows; ++l) total += d.cov(l, l);
      return total;
    }
    double operator()(const Empirical& d) const {
      const std::size_t dim = d.points.front().size();
      const double n = static_cast<double>(d.points.size());
      double total = 0.0;
      for (std::size_t l = 0; l < dim; ++l) {
        double mean = 0.0;
        for (const Point& pt : d.points) mean += pt[l];
        mean /= n;
        double var = 0.0;
        for (const Point& pt : d.points) var += (pt[l] - mean) * (pt[l] - mean);
        total += var / n;
      }
      return total;
    }
  };
  return std::visit(Visitor{}, dist_);
}

void SourceSpec::sample_point(Rng& rng, std::span<double> out) const {
  if (out.size() != dim_) throw std::invalid_argument("sample buffer size mismatch");
  struct Visitor {
    Rng& rng;
    std::span<double> out;
    const Matrix& chol;

    void operator()(const Normal1d& d) const {
      out[0] = d.mean + d.stddev * rng.normal();
    }
    void operator()(const Exponential& d) const { out[0] = rng.exponential(d.rate); }
    void operator()(const GammaDist& d) const { out[0] = rng.gamma(d.shape, d.scale); }
    void operator()(const UniformBox& d) const {
      for (std::size_t l = 0; l < out.size(); ++l)
        out[l] = d.lo[l] + (d.hi[l] - d.lo[l]) * rng.uniform();
    }
    void operator()(const MvNormal& d) const {
      const std::size_t n = out.size();
      std::vector<double> z(n);
      for (std::size_t l = 0; l < n; ++l) z[l] = rng.normal();
      for (std::size_t l = 0; l < n; ++l) {
        double v = d.mean[l];
        for (std::size_t k = 0; k <= l; ++k) v += chol(l, k) * z[k];
        out[l] = v;
      }
    }
    void operator()(const Empirical& d) const {
      const Point& pt = d.points[rng.below(d.points.size())];
      std::copy(pt.begin(), pt.end(), out.begin());
    }
  };
  std::visit(Visitor{rng, out, chol_}, dist_);
}

std::vector<Point> sample(const SourceSpec& spec, std::size_t n,
                          std::uint64_t seed) {
  std::vector<Point> out(n, Point(spec.dim()));
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, kSampleStream + i);
    spec.sample_point(rng, out[i]);
  }
  return out;
}

Point center_of_measure_generic(const SourceSpec& spec, const DistanceSpec& dspec,
                                std::size_t n, std::uint64_t seed) {
  dspec.validate();
  if (n == 0) throw std::invalid_argument("center_of_measure: need n >= 1");
  const std::size_t d = spec.dim();

  // Start from a small pilot mean so the iteration begins inside the mass.
  Point y(d, 0.0);
  {
    Point draw(d);
    const std::size_t pilot = 128;
    for (std::size_t i = 0; i < pilot; ++i) {
      Rng rng(seed, kCenterPilotStream + i);
      spec.sample_point(rng, draw);
      for (std::size_t l = 0; l < d; ++l) y[l] += draw[l];
    }
    for (std::size_t l = 0; l < d; ++l) y[l] /= static_cast<double>(pilot);
  }

  // One-atom stochastic gradient descent on E dist(y, xi)^r.  For r == 2
  // the 1/(offset+k) schedule with scale 1/2 makes the iterate an exact
  // running mean of the consumed samples; other orders get a dimensionally
  // matched scale and the standard 2/3 decay.
  double scale, exponent;
  const double offset = 30.0;
  if (dspec.r == 2.0) {
    scale = 0.5;
    exponent = 1.0;
  } else {
    const double sigma = std::sqrt(spec.total_variance());
    scale = 0.5 * std::pow(std::max(sigma, 1e-12), 2.0 - dspec.r);
    exponent = 2.0 / 3.0;
  }

  Point draw(d);
  std::vector<double> grad(d);
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(seed, kSampleStream + k);
    spec.sample_point(rng, draw);
    dist_power_grad(dspec, y, draw, grad);
    const double alpha = scale / std::pow(offset + static_cast<double>(k), exponent);
    bool finite = true;
    for (double g : grad)
      if (!std::isfinite(g)) { finite = false; break; }
    if (!finite) continue;  // skip pathological samples, keep the stream aligned
    for (std::size_t l = 0; l < d; ++l) y[l] -= alpha * grad[l];
  }
  return y;
}

Point center_of_measure(const SourceSpec& spec, const DistanceSpec& dspec,
                        std::size_t n, std::uint64_t seed) {
  dspec.validate();
  if (n == 0) throw std::invalid_argument("center_of_measure: need n >= 1");
  const bool unweighted = dspec.coord_weights.empty() ||
                          std::all_of(dspec.coord_weights.begin(),
                                      dspec.coord_weights.end(),
                                      [](double w) { return w == 1.0; });
  // Quadratic Euclidean cost: the center is the mean, so average the same
  // draws the generic path would consume.  (Per-coordinate weights do not
  // move the quadratic minimizer either, but keep the check conservative.)
  if (dspec.r == 2.0 && dspec.p == 2.0 && unweighted) {
    const std::size_t d = spec.dim();
    Point mean(d, 0.0);
    Point draw(d);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(seed, kSampleStream + i);
      spec.sample_point(rng, draw);
      for (std::size_t l = 0; l < d; ++l) mean[l] += draw[l];
    }
    for (std::size_t l = 0; l < d; ++l) mean[l] /= static_cast<double>(n);
    return mean;
  }
  return center_of_measure_generic(spec, dspec, n, seed);
}

void DiscreteMeasure::validate() const {
  if (atoms.empty()) throw std::invalid_argument("empty support");
  if (weights.size() != atoms.size())
    throw std::invalid_argument("atoms/weights size mismatch");
  const std::size_t dim = atoms.front().size();
  if (dim == 0) throw std::invalid_argument("zero-dimensional atoms");
  double total = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (atoms[j].size() != dim) throw std::invalid_argument("ragged atoms");
    for (double v : atoms[j])
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
    if (!std::isfinite(weights[j]) || weights[j] < 0.0)
      throw std::invalid_argument("negative weight");
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument("weights must sum to 1");
}

std::vector<std::pair<double, double>> empirical_cdf(const DiscreteMeasure& m) {
  m.validate();
  if (m.atoms.front().size() != 1)
    throw std::invalid_argument("empirical_cdf requires one-dimensional atoms");
  std::vector<std::pair<double, double>> knots(m.size());
  for (std::size_t j = 0; j < m.size(); ++j)
    knots[j] = {m.atoms[j][0], m.weights[j]};
  std::sort(knots.begin(), knots.end());
  // Merge exactly coincident locations, then accumulate.
  std::vector<std::pair<double, double>> out;
  for (const auto& [loc, w] : knots) {
    if (!out.empty() && out.back().first == loc)
      out.back().second += w;
    else
      out.emplace_back(loc, w);
  }
  double cum = 0.0;
  for (auto& [loc, w] : out) {
    cum += w;
    w = cum;
  }
  if (!out.empty()) out.back().second = 1.0;  // absorb rounding at the top knot
  return out;
}

std::string describe(const SourceSpec& spec) {
  struct Visitor {
    std::string operator()(const Normal1d& d) const {
      return "normal1d mean=" + format_label(d.mean) +
             " stddev=" + format_label(d.stddev);
    }
    std::string operator()(const Exponential& d) const {
      return "exponential rate=" + format_label(d.rate);
    }
    std::string operator()(const GammaDist& d) const {
      return "gamma shape=" + format_label(d.shape) +
             " scale=" + format_label(d.scale);
    }
    std::string operator()(const UniformBox& d) const {
      std::string s = "uniform_box lo=";
      for (std::size_t l = 0; l < d.lo.size(); ++l)
        s += (l ? "," : "") + format_label(d.lo[l]);
      s += " hi=";
      for (std::size_t l = 0; l < d.hi.size(); ++l)
        s += (l ? "," : "") + format_label(d.hi[l]);
      return s;
    }
    std::string operator()(const MvNormal& d) const {
      return "mvnormal dim=" + std::to_string(d.mean.size());
    }
    std::string operator()(const Empirical& d) const {
      return "empirical points=" + std::to_string(d.points.size());
    }
  };
  return std::visit(Visitor{}, spec.dist());
}

}  // namespace softquant
