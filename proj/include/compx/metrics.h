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

#ifndef COMPX_METRICS_H_
#define COMPX_METRICS_H_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "compx/imaging.h"

namespace compx::metrics {

// Returned for identical images; reports render it as "inf".
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Renders a metric value, "inf" for the infinity sentinel.
std::string format_db(double value, int decimals = 4);

struct RoiWeights {
  double alpha = 0.5;  // RoI
  double beta = 0.5;   // non-RoI

  // Throws RatioSumViolation unless both are >= 0 and sum to 1 +- 1e-6.
  void validate() const;
};

double psnr(const imaging::ImageBuffer& a, const imaging::ImageBuffer& b,
            double peak = 255.0);

// Region-weighted PSNR. With S the per-region sum of squared error over all
// samples and N the per-region pixel count scaled by the channel count:
//
//   wMSE = (alpha * S_roi + beta * S_non) / (alpha * N_roi + beta * N_non)
//
// `roi` holds one 0/1 entry per pixel.
double weighted_psnr(const imaging::ImageBuffer& a, const imaging::ImageBuffer& b,
                     std::span<const uint8_t> roi, const RoiWeights& weights,
                     double peak = 255.0);

// bits / (width * height).
double bpp(uint64_t total_bits, uint32_t width, uint32_t height);
inline double bpp_of_bytes(uint64_t bytes, uint32_t width, uint32_t height) {
  return bpp(bytes * 8, width, height);
}

struct RdPoint {
  double bpp = 0.0;
  double metric = 0.0;
};

// At least 4 points, strictly increasing bpp, metric nondecreasing within
// `kCurveSlackDb`. Throws DegenerateCurve otherwise.
inline constexpr double kCurveSlackDb = 0.1;
void validate_curve(std::span<const RdPoint> curve);

// Shape-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
// slopes) over strictly increasing abscissae.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  // Exact integral over [a, b] within the data range.
  double integral(double a, double b) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  size_t segment(double x) const;
  double segment_integral(size_t i, double t0, double t1) const;

  std::vector<double> x_, y_, d_;
};

enum class BdMode { kPsnr, kRate };

// Bjontegaard delta of `test` against `reference` over the shared log10-rate
// (kPsnr, dB) or metric (kRate, percent) interval. Errors: DegenerateCurve,
// NoOverlap.
double bd_delta(std::span<const RdPoint> reference, std::span<const RdPoint> test,
                BdMode mode);

}  // namespace compx::metrics

#endif  // COMPX_METRICS_H_
