#include "eustwin/metrics.hpp"

#include <algorithm>
#include <sstream>

namespace eustwin {

RegionStats region_stats(std::span<const double> samples) {
  if (samples.empty()) throw DataError("region statistics of an empty sample set");
  RegionStats s;
  s.count = samples.size();
  const double n = static_cast<double>(s.count);
  double sum = 0.0;
  s.max = samples.front();
  for (double v : samples) {
    sum += v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / n;
  double sq = 0.0;
  for (double v : samples) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / n);
  return s;
}

double fwhm(std::span<const double> profile, double spacing) {
  if (profile.empty()) throw DataError("FWHM of an empty profile");
  const auto peak_it = std::max_element(profile.begin(), profile.end());
  const double peak = *peak_it;
  if (!(peak > 0.0)) throw DataError("FWHM needs a positive peak");
  const double half = peak / 2.0;
  const auto p = static_cast<std::size_t>(peak_it - profile.begin());

  std::optional<double> left, right;
  for (std::size_t i = p; i-- > 0;) {
    if (profile[i] < half) {
      left = static_cast<double>(i) + (half - profile[i]) / (profile[i + 1] - profile[i]);
      break;
    }
  }
  for (std::size_t i = p + 1; i < profile.size(); ++i) {
    if (profile[i] < half) {
      right = static_cast<double>(i) - (half - profile[i]) / (profile[i - 1] - profile[i]);
      break;
    }
  }
  if (!left || !right) {
    std::ostringstream os;
    os << "no half-maximum crossing on the " << (!left ? "left" : "right")
       << " of the peak at sample " << p;
    throw BoundaryError(os.str());
  }
  return (*right - *left) * spacing;
}

double esnr(const RegionStats& signal, const RegionStats& noise) {
  if (!(noise.std > 0.0)) throw UndefinedMetric("eSNR undefined: noise standard deviation is zero");
  return 20.0 * std::log10(signal.max / noise.std);
}

double cnr(const RegionStats& target, const RegionStats& background) {
  const double spread = target.std * target.std + background.std * background.std;
  if (!(spread > 0.0)) throw UndefinedMetric("CNR undefined: both regions have zero deviation");
  return std::abs(target.mean - background.mean) / std::sqrt(spread);
}

double ssnr(const RegionStats& speckle) {
  if (!(speckle.std > 0.0)) throw UndefinedMetric("SSNR undefined: constant speckle region");
  return speckle.mean / speckle.std;
}

void SSIMParams::validate() const {
  if (!(L > 0.0)) throw ConfigError("SSIM dynamic range L must be > 0");
  if (window < 0 || (window != 0 && window % 2 == 0))
    throw ConfigError("SSIM window must be odd (or 0 for global statistics)");
}

namespace {

Aggregate summarize(const std::vector<double>& values, bool infinite) {
  Aggregate a;
  a.infinite = infinite;
  if (values.empty()) return a;
  if (infinite) {
    a.mean = std::numeric_limits<double>::infinity();
    a.std = 0.0;
    return a;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.std = std::sqrt(sq / static_cast<double>(values.size()));
  return a;
}

}  // namespace

ScoreReport aggregate_scores(std::vector<PairScore> pairs) {
  ScoreReport report;
  std::vector<double> s, p, r;
  bool any_infinite = false;
  for (const auto& e : pairs) {
    s.push_back(e.ssim);
    r.push_back(e.rmse);
    p.push_back(e.psnr.db);
    any_infinite = any_infinite || e.psnr.infinite;
  }
  report.ssim = summarize(s, false);
  report.rmse = summarize(r, false);
  report.psnr = summarize(p, any_infinite);
  report.pairs = std::move(pairs);
  return report;
}

}  // namespace eustwin
