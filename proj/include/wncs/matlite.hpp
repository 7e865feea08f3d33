#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace wncs {

// Small dense row-major matrix. Everything here is written for control-sized
// problems (n <= 8); no blocking, no pivoting heroics.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  Mat(int r, int c, std::initializer_list<double> vals);

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  bool square() const { return rows == cols; }
};

using Vec = std::vector<double>;

Mat identity(int n);
Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat operator*(double s, const Mat& x);
Mat transpose(const Mat& x);
Vec matvec(const Mat& x, const Vec& v);

double trace(const Mat& x);
double max_abs(const Mat& x);
double frob_norm(const Mat& x);
bool is_symmetric(const Mat& x, double tol = 1e-9);

// x^k by repeated squaring, k >= 0; x^0 = I.
Mat mat_pow(const Mat& x, int k);

// All eigenvalues of a real square matrix: closed forms for n <= 2,
// Hessenberg reduction + implicit double-shift QR for larger n.
std::vector<std::complex<double>> eigenvalues(const Mat& x);
double spectral_radius(const Mat& x);

// Eigenvalues of a symmetric matrix via cyclic Jacobi, ascending order.
std::vector<double> sym_eigenvalues(const Mat& s);
double min_sym_eigenvalue(const Mat& s);

// Lower-triangular factor L with L L^T = s; throws std::domain_error if the
// input is not positive definite.
Mat cholesky(const Mat& s);

}  // namespace wncs
