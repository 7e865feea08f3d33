#pragma once

#include <vector>

#include "wncs/matlite.hpp"

namespace wncs {

enum class ControllabilityClass { OneStep, VStep, NonFiniteStep };

// A matrix power below this is treated as vanished when classifying.
inline constexpr double kNilpotentTol = 1e-9;

struct PlantModel {
  Mat A, B, K, Q, R;
  Mat M;       // A + B K
  Mat R_chol;  // lower Cholesky factor of R; shapes the process noise
  std::vector<Mat> KM;  // K M^j for j = 0..v-1, the queued-command gains
  ControllabilityClass cls = ControllabilityClass::OneStep;
  int v = 1;  // nilpotency index of M, or the chosen approximation depth
              // for plants where no power of M vanishes
  int n = 0, m = 0;
};

// Smallest j <= n with M^j ~ 0, reported through min_v; NonFiniteStep when
// no such power exists (min_v left untouched).
ControllabilityClass classify(const Mat& A, const Mat& B, const Mat& K, int& min_v);

// Validates dimensions, definiteness and spectral requirements; throws
// std::invalid_argument naming the offending field.
PlantModel make_plant(Mat A, Mat B, Mat K, Mat Q, Mat R, int v);

// Covariance ladder F(1) = R, F(t+1) = A F(t) A^T + R, built once up front.
struct FTable {
  std::vector<Mat> f;
  FTable(const PlantModel& p, int max_tau);
  const Mat& operator()(int t) const;
  int max_tau() const { return static_cast<int>(f.size()) - 1; }
};

// M^x Y (M^x)^T; negative x is clamped to 0 so that callers may feed
// enumerated index tuples that no trajectory actually visits.
Mat g_transform(const PlantModel& p, int x, const Mat& y);

double stage_cost_one_step(const PlantModel& p, const FTable& f, int phi);

// Plant-state covariance from the indicator registers. taus_tail holds
// tau^1..tau^{v-1} (empty when v = 1); phis holds phi^0..phi^{v-1}.
Mat covariance_vstep(const PlantModel& p, const FTable& f,
                     const std::vector<int>& taus_tail,
                     const std::vector<int>& phis);

double stage_cost_vstep(const PlantModel& p, const FTable& f,
                        const std::vector<int>& taus_tail,
                        const std::vector<int>& phis);

}  // namespace wncs
