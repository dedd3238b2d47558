// Copyright 2026 The Compx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compx/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "compx/error.h"

namespace compx::metrics {

namespace {

void check_same_shape(const imaging::ImageBuffer& a, const imaging::ImageBuffer& b) {
  if (a.width() != b.width() || a.height() != b.height() ||
      a.channels() != b.channels()) {
    throw Error(ErrorCode::kDimensionMismatch, "images differ in shape");
  }
}

double to_db(double mse, double peak) {
  if (mse <= 0.0) return kInfinity;
  return 10.0 * std::log10(peak * peak / mse);
}

int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace

std::string format_db(double value, int decimals) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

void RoiWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || std::abs(alpha + beta - 1.0) > 1e-6) {
    throw Error(ErrorCode::kRatioSumViolation,
                "RoI weights must be >= 0 and sum to 1");
  }
}

double psnr(const imaging::ImageBuffer& a, const imaging::ImageBuffer& b,
            double peak) {
  check_same_shape(a, b);
  const auto pa = a.data(), pb = b.data();
  double sse = 0.0;
  for (size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    sse += d * d;
  }
  return to_db(sse / static_cast<double>(pa.size()), peak);
}

double weighted_psnr(const imaging::ImageBuffer& a, const imaging::ImageBuffer& b,
                     std::span<const uint8_t> roi, const RoiWeights& w,
                     double peak) {
  check_same_shape(a, b);
  w.validate();
  if (roi.size() != a.pixel_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "RoI mask size differs from image");
  }
  const uint32_t ch = a.channels();
  const auto pa = a.data(), pb = b.data();
  double sse[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  for (size_t p = 0; p < roi.size(); ++p) {
    if (roi[p] > 1) throw Error(ErrorCode::kNonBinaryMask, "RoI mask must be 0/1");
    const int region = roi[p];
    for (uint32_t c = 0; c < ch; ++c) {
      const double d = static_cast<double>(pa[p * ch + c]) - static_cast<double>(pb[p * ch + c]);
      sse[region] += d * d;
    }
    count[region] += ch;
  }
  const double num = w.alpha * sse[1] + w.beta * sse[0];
  const double den = w.alpha * count[1] + w.beta * count[0];
  if (num == 0.0) return kInfinity;
  if (den == 0.0) {
    throw Error(ErrorCode::kInvariantViolation, "weights leave no pixels counted");
  }
  return to_db(num / den, peak);
}

double bpp(uint64_t total_bits, uint32_t width, uint32_t height) {
  if (width == 0 || height == 0) throw Error(ErrorCode::kZeroDims, "zero image size");
  return static_cast<double>(total_bits) /
         (static_cast<double>(width) * static_cast<double>(height));
}

void validate_curve(std::span<const RdPoint> curve) {
  if (curve.size() < 4) {
    throw Error(ErrorCode::kDegenerateCurve, "RD curve needs at least 4 points");
  }
  for (size_t i = 0; i < curve.size(); ++i) {
    if (!(curve[i].bpp > 0.0) || !std::isfinite(curve[i].bpp) ||
        !std::isfinite(curve[i].metric)) {
      throw Error(ErrorCode::kDegenerateCurve,
                  "RD point " + std::to_string(i) + " is not finite and positive");
    }
    if (i == 0) continue;
    if (!(curve[i].bpp > curve[i - 1].bpp)) {
      throw Error(ErrorCode::kDegenerateCurve, "bpp not strictly increasing");
    }
    if (curve[i].metric < curve[i - 1].metric - kCurveSlackDb) {
      throw Error(ErrorCode::kDegenerateCurve, "metric decreases along the curve");
    }
  }
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw Error(ErrorCode::kDegenerateCurve, "interpolant needs >= 2 matching points");
  }
  for (size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw Error(ErrorCode::kDegenerateCurve, "abscissae not strictly increasing");
    }
  }
  std::vector<double> h(n - 1), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (size_t k = 1; k + 1 < n; ++k) {
    if (sign(delta[k - 1]) * sign(delta[k]) <= 0) continue;
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  auto end_slope = [](double h0, double h1, double m0, double m1) {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (sign(d) != sign(m0)) {
      d = 0.0;
    } else if (sign(m0) != sign(m1) && std::abs(d) > 3 * std::abs(m0)) {
      d = 3 * m0;
    }
    return d;
  };
  d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

size_t Pchip::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  size_t i = it == x_.begin() ? 0 : static_cast<size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double Pchip::operator()(double x) const {
  const size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * d_[i + 1];
}

double Pchip::segment_integral(size_t i, double t0, double t1) const {
  const double h = x_[i + 1] - x_[i];
  auto antiderivative = [&](double t) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return (t4 / 2 - t3 + t) * y_[i] + (t4 / 4 - 2 * t3 / 3 + t2 / 2) * h * d_[i] +
           (-t4 / 2 + t3) * y_[i + 1] + (t4 / 4 - t3 / 3) * h * d_[i + 1];
  };
  return h * (antiderivative(t1) - antiderivative(t0));
}

double Pchip::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  double total = 0.0;
  for (size_t i = 0; i + 1 < x_.size(); ++i) {
    const double lo = std::max(a, x_[i]);
    const double hi = std::min(b, x_[i + 1]);
    if (hi <= lo) continue;
    const double h = x_[i + 1] - x_[i];
    total += segment_integral(i, (lo - x_[i]) / h, (hi - x_[i]) / h);
  }
  return total;
}

double bd_delta(std::span<const RdPoint> reference, std::span<const RdPoint> test,
                BdMode mode) {
  validate_curve(reference);
  validate_curve(test);
  auto build = [mode](std::span<const RdPoint> curve) {
    std::vector<double> x, y;
    for (const auto& p : curve) {
      const double lr = std::log10(p.bpp);
      x.push_back(mode == BdMode::kPsnr ? lr : p.metric);
      y.push_back(mode == BdMode::kPsnr ? p.metric : lr);
    }
    if (mode == BdMode::kRate) {
      for (size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) {
          throw Error(ErrorCode::kDegenerateCurve,
                      "BD-rate needs strictly increasing metric values");
        }
      }
    }
    return Pchip(std::move(x), std::move(y));
  };
  const Pchip ref = build(reference);
  const Pchip tst = build(test);
  const double lo = std::max(ref.x_min(), tst.x_min());
  const double hi = std::min(ref.x_max(), tst.x_max());
  if (!(hi > lo)) throw Error(ErrorCode::kNoOverlap, "curves do not overlap");
  const double mean_gap = (tst.integral(lo, hi) - ref.integral(lo, hi)) / (hi - lo);
  if (mode == BdMode::kPsnr) return mean_gap;
  return (std::pow(10.0, mean_gap) - 1.0) * 100.0;
}

}  // namespace compx::metrics
