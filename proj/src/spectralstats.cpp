#include "kqr/spectralstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kqr {

namespace {

std::vector<double> sorted_vector(const RVec& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return s;
}

double mean_ratio(const std::vector<double>& spacings, bool circular, double zero_tol) {
  const std::size_t m = spacings.size();
  double acc = 0.0;
  std::size_t count = 0;
  const std::size_t pairs = circular ? m : m - 1;
  for (std::size_t i = 0; i < pairs; ++i) {
    double s1 = spacings[i];
    double s2 = spacings[(i + 1) % m];
    double hi = std::max(s1, s2);
    double ratio;
    if (hi <= zero_tol) {
      ratio = 0.0;  // two coincident levels on both sides: 0/0 := 0
    } else {
      ratio = std::min(s1, s2) / hi;
    }
    acc += ratio;
    ++count;
  }
  return acc / static_cast<double>(count);
}

}  // namespace

double r_statistic(const RVec& levels) {
  if (levels.size() < 3) throw std::invalid_argument("r_statistic: need at least 3 levels");
  std::vector<double> s = sorted_vector(levels);
  const double range = s.back() - s.front();
  const double tol = 1e-12 * range;
  // Collapse numerically tied levels.
  std::vector<double> distinct;
  distinct.reserve(s.size());
  distinct.push_back(s.front());
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] - distinct.back() > tol) distinct.push_back(s[i]);
  }
  if (distinct.size() < 3) {
    throw std::invalid_argument("r_statistic: fewer than 3 distinct levels");
  }
  std::vector<double> spacings(distinct.size() - 1);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) spacings[i] = distinct[i + 1] - distinct[i];
  return mean_ratio(spacings, /*circular=*/false, /*zero_tol=*/0.0);
}

double r_statistic_phases(const RVec& phases, double degeneracy_tol) {
  if (phases.size() < 3) {
    throw std::invalid_argument("r_statistic_phases: need at least 3 phases");
  }
  std::vector<double> s = sorted_vector(phases);
  if (s.front() <= -kPi - 1e-12 || s.back() > kPi + 1e-12) {
    throw std::invalid_argument("r_statistic_phases: phases must lie in (-pi, pi]");
  }
  std::vector<double> spacings(s.size());
  for (std::size_t i = 0; i + 1 < s.size(); ++i) spacings[i] = s[i + 1] - s[i];
  spacings.back() = kTwoPi - (s.back() - s.front());
  int distinct_groups = 0;  // on the circle, one per positive spacing
  for (double& sp : spacings) {
    if (sp <= degeneracy_tol) {
      sp = 0.0;
    } else {
      ++distinct_groups;
    }
  }
  if (distinct_groups < 3) {
    throw std::invalid_argument("r_statistic_phases: fewer than 3 distinct phases");
  }
  return mean_ratio(spacings, /*circular=*/true, /*zero_tol=*/0.0);
}

double heisenberg_time(const RVec& levels, double hbar) {
  if (!(hbar > 0.0)) throw std::invalid_argument("heisenberg_time: hbar must be positive");
  if (levels.size() < 2) throw std::invalid_argument("heisenberg_time: need at least 2 levels");
  std::vector<double> s = sorted_vector(levels);
  const auto d = static_cast<std::ptrdiff_t>(s.size());
  auto lo = static_cast<std::ptrdiff_t>(std::llround(0.1 * d));
  auto hi = static_cast<std::ptrdiff_t>(std::llround(0.9 * d));
  hi = std::min(hi, d);
  if (hi - lo < 2) {
    lo = 0;
    hi = d;
  }
  double mean = (s[hi - 1] - s[lo]) / static_cast<double>(hi - 1 - lo);
  if (!(mean > 0.0)) {
    throw std::invalid_argument("heisenberg_time: spectrum is fully degenerate");
  }
  return kTwoPi * hbar / mean;
}

SpectralSummary spectral_summary(const RVec& levels, double hbar) {
  SpectralSummary out;
  std::vector<double> s = sorted_vector(levels);
  out.levels = Eigen::Map<RVec>(s.data(), static_cast<Eigen::Index>(s.size()));
  out.r_bar = r_statistic(levels);
  out.t_heisenberg = heisenberg_time(levels, hbar);
  out.mean_spacing = kTwoPi * hbar / out.t_heisenberg;
  return out;
}

}  // namespace kqr
