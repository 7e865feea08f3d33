#include "wncs/plant.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wncs {

ControllabilityClass classify(const Mat& A, const Mat& B, const Mat& K, int& min_v) {
  Mat m = A + B * K;
  Mat power = m;
  for (int j = 1; j <= A.rows; ++j) {
    if (max_abs(power) <= kNilpotentTol) {
      min_v = j;
      return j == 1 ? ControllabilityClass::OneStep : ControllabilityClass::VStep;
    }
    power = power * m;
  }
  // Cayley-Hamilton: if M^n is nonzero, no later power vanishes either.
  return ControllabilityClass::NonFiniteStep;
}

PlantModel make_plant(Mat A, Mat B, Mat K, Mat Q, Mat R, int v) {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw std::invalid_argument(field + ": " + msg);
  };

  if (!A.square() || A.rows == 0) fail("plant.A", "must be square and nonempty");
  int n = A.rows;
  if (n > 8) fail("plant.A", "dimension above 8 is not supported");
  if (B.rows != n || B.cols < 1) fail("plant.B", "must be n x m");
  int m = B.cols;
  if (K.rows != m || K.cols != n) fail("plant.K", "must be m x n");
  if (Q.rows != n || Q.cols != n) fail("plant.Q", "must be n x n");
  if (R.rows != n || R.cols != n) fail("plant.R", "must be n x n");
  if (!is_symmetric(Q)) fail("plant.Q", "must be symmetric");
  if (!is_symmetric(R)) fail("plant.R", "must be symmetric");
  if (min_sym_eigenvalue(Q) < -1e-8) fail("plant.Q", "must be positive semidefinite");

  PlantModel p;
  try {
    p.R_chol = cholesky(R);
  } catch (const std::domain_error&) {
    fail("plant.R", "must be positive definite");
  }
  if (spectral_radius(A) <= 1.0)
    fail("plant.A", "spectral radius must exceed 1 (the scheduling problem is trivial otherwise)");

  int min_v = 0;
  p.cls = classify(A, B, K, min_v);
  p.M = A + B * K;
  if (p.cls == ControllabilityClass::NonFiniteStep) {
    if (spectral_radius(p.M) >= 1.0)
      fail("plant.K", "closed-loop matrix A+BK must be Schur stable");
    if (v < 1) fail("plant.v", "approximation depth must be at least 1");
    p.v = v;
  } else {
    if (v != min_v)
      fail("plant.v", "must equal the controllability step " + std::to_string(min_v));
    p.v = min_v;
  }

  p.A = std::move(A);
  p.B = std::move(B);
  p.K = std::move(K);
  p.Q = std::move(Q);
  p.R = std::move(R);
  p.n = n;
  p.m = m;
  p.KM.reserve(p.v);
  for (int j = 0; j < p.v; ++j) p.KM.push_back(p.K * mat_pow(p.M, j));
  return p;
}

FTable::FTable(const PlantModel& p, int max_tau) {
  f.resize(static_cast<size_t>(std::max(max_tau, 1)) + 1);
  f[1] = p.R;
  for (int t = 2; t <= max_tau; ++t) f[t] = p.A * f[t - 1] * transpose(p.A) + p.R;
}

const Mat& FTable::operator()(int t) const {
  if (t < 1 || t >= static_cast<int>(f.size()))
    throw std::out_of_range("FTable: tau " + std::to_string(t) + " outside table");
  return f[t];
}

Mat g_transform(const PlantModel& p, int x, const Mat& y) {
  if (x <= 0) return y;
  Mat mx = mat_pow(p.M, x);
  return mx * y * transpose(mx);
}

double stage_cost_one_step(const PlantModel& p, const FTable& f, int phi) {
  const Mat& cov = f(phi);
  double c = 0.0;
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) c += p.Q(i, j) * cov(j, i);
  return c;
}

Mat covariance_vstep(const PlantModel& p, const FTable& f,
                     const std::vector<int>& taus_tail,
                     const std::vector<int>& phis) {
  if (phis.empty() || taus_tail.size() + 1 != phis.size())
    throw std::invalid_argument("covariance_vstep: register sizes do not match");
  Mat cov = f(phis[0]);
  int v = static_cast<int>(phis.size());
  int exponent = 0;
  for (int i = 0; i + 1 < v; ++i) {
    exponent += phis[i] - taus_tail[i];
    int tau_next = taus_tail[i];
    int phi_next = phis[i + 1];
    if (phi_next > tau_next)
      cov = cov + g_transform(p, std::max(exponent, 0), f(phi_next) - f(tau_next));
  }
  return cov;
}

double stage_cost_vstep(const PlantModel& p, const FTable& f,
                        const std::vector<int>& taus_tail,
                        const std::vector<int>& phis) {
  if (phis.size() == 1) return stage_cost_one_step(p, f, phis[0]);
  Mat cov = covariance_vstep(p, f, taus_tail, phis);
  double c = 0.0;
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j) c += p.Q(i, j) * cov(j, i);
  return c;
}

}  // namespace wncs
