#include "wncs/matlite.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace wncs {

Mat::Mat(int r, int c, std::initializer_list<double> vals) : rows(r), cols(c), a(vals) {
  if (a.size() != static_cast<size_t>(r) * c)
    throw std::invalid_argument("Mat: initializer size does not match dimensions");
}

Mat identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat operator+(const Mat& x, const Mat& y) {
  assert(x.rows == y.rows && x.cols == y.cols);
  Mat r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

Mat operator-(const Mat& x, const Mat& y) {
  assert(x.rows == y.rows && x.cols == y.cols);
  Mat r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
  return r;
}

Mat operator*(const Mat& x, const Mat& y) {
  assert(x.cols == y.rows);
  Mat r(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      double xik = x(i, k);
      if (xik == 0.0) continue;
      for (int j = 0; j < y.cols; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

Mat operator*(double s, const Mat& x) {
  Mat r = x;
  for (double& e : r.a) e *= s;
  return r;
}

Mat transpose(const Mat& x) {
  Mat r(x.cols, x.rows);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
  return r;
}

Vec matvec(const Mat& x, const Vec& v) {
  assert(static_cast<size_t>(x.cols) == v.size());
  Vec y(x.rows, 0.0);
  for (int i = 0; i < x.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < x.cols; ++j) s += x(i, j) * v[j];
    y[i] = s;
  }
  return y;
}

double trace(const Mat& x) {
  assert(x.square());
  double t = 0.0;
  for (int i = 0; i < x.rows; ++i) t += x(i, i);
  return t;
}

double max_abs(const Mat& x) {
  double m = 0.0;
  for (double e : x.a) m = std::max(m, std::abs(e));
  return m;
}

double frob_norm(const Mat& x) {
  double s = 0.0;
  for (double e : x.a) s += e * e;
  return std::sqrt(s);
}

bool is_symmetric(const Mat& x, double tol) {
  if (!x.square()) return false;
  for (int i = 0; i < x.rows; ++i)
    for (int j = i + 1; j < x.cols; ++j)
      if (std::abs(x(i, j) - x(j, i)) > tol) return false;
  return true;
}

Mat mat_pow(const Mat& x, int k) {
  assert(x.square() && k >= 0);
  Mat result = identity(x.rows);
  Mat base = x;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

// ------------------------------------------------------------ eigenvalues

namespace {

// Householder reduction to upper Hessenberg form, in place.
void to_hessenberg(Mat& h) {
  int n = h.rows;
  std::vector<double> v(n, 0.0);
  for (int k = 0; k + 2 < n; ++k) {
    double scale = 0.0;
    for (int i = k + 1; i < n; ++i) scale += std::abs(h(i, k));
    if (scale == 0.0) continue;
    double hh = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[i] = h(i, k) / scale;
      hh += v[i] * v[i];
    }
    double g = std::sqrt(hh);
    if (v[k + 1] > 0.0) g = -g;
    hh -= v[k + 1] * g;
    v[k + 1] -= g;
    // similarity transform with P = I - v v^T / hh
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = k + 1; i < n; ++i) s += v[i] * h(i, j);
      s /= hh;
      for (int i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      s /= hh;
      for (int j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
    }
    h(k + 1, k) = scale * g;
    for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

void eig_2x2(double p, double q, double r, double s,
             std::vector<std::complex<double>>& out) {
  double half = 0.5 * (p + s);
  double det = p * s - q * r;
  double disc = half * half - det;
  if (disc >= 0.0) {
    double sd = std::sqrt(disc);
    double r1 = half >= 0.0 ? half + sd : half - sd;
    double r2 = (r1 != 0.0) ? det / r1 : half - sd;
    out.emplace_back(r1, 0.0);
    out.emplace_back(r2, 0.0);
  } else {
    double im = std::sqrt(-disc);
    out.emplace_back(half, im);
    out.emplace_back(half, -im);
  }
}

// One implicit double-shift QR step on the active window [l, m] of a
// Hessenberg matrix. s/t give the sum and product of the two shifts.
void francis_step(Mat& h, int l, int m, double s, double t) {
  double x = h(l, l) * h(l, l) + h(l, l + 1) * h(l + 1, l) - s * h(l, l) + t;
  double y = h(l + 1, l) * (h(l, l) + h(l + 1, l + 1) - s);
  double z = (l + 2 <= m) ? h(l + 2, l + 1) * h(l + 1, l) : 0.0;
  for (int k = l; k <= m - 1; ++k) {
    // Householder on (x,y,z): rows k..k+2 (or k..k+1 at the tail)
    int last = std::min(k + 2, m);
    double v0 = x, v1 = y, v2 = (last == k + 2) ? z : 0.0;
    double nrm = std::sqrt(v0 * v0 + v1 * v1 + v2 * v2);
    if (nrm != 0.0) {
      double g = (v0 >= 0.0) ? -nrm : nrm;
      double h0 = v0 - g;
      double denom = -g * h0;  // = ||v||^2 / 2 after the v0 shift
      if (denom != 0.0) {
        double w0 = h0, w1 = v1, w2 = v2;
        for (int j = std::max(l, k - 1); j <= m; ++j) {
          double sum = w0 * h(k, j) + w1 * h(k + 1, j);
          if (last == k + 2) sum += w2 * h(k + 2, j);
          sum /= denom;
          h(k, j) -= sum * w0;
          h(k + 1, j) -= sum * w1;
          if (last == k + 2) h(k + 2, j) -= sum * w2;
        }
        int top = std::min(k + 3, m);
        for (int i = l; i <= top; ++i) {
          double sum = w0 * h(i, k) + w1 * h(i, k + 1);
          if (last == k + 2) sum += w2 * h(i, k + 2);
          sum /= denom;
          h(i, k) -= sum * w0;
          h(i, k + 1) -= sum * w1;
          if (last == k + 2) h(i, k + 2) -= sum * w2;
        }
      }
    }
    if (k + 1 <= m - 1) {
      x = h(k + 1, k);
      y = h(k + 2, k);
      z = (k + 3 <= m) ? h(k + 3, k) : 0.0;
    }
  }
  // clear the numerical debris the bulge chase leaves below the subdiagonal
  for (int i = l + 2; i <= m; ++i)
    for (int j = l; j <= i - 2; ++j) h(i, j) = 0.0;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Mat& x) {
  if (!x.square()) throw std::invalid_argument("eigenvalues: matrix not square");
  int n = x.rows;
  std::vector<std::complex<double>> out;
  if (n == 0) return out;
  if (n == 1) {
    out.emplace_back(x(0, 0), 0.0);
    return out;
  }
  if (n == 2) {
    eig_2x2(x(0, 0), x(0, 1), x(1, 0), x(1, 1), out);
    return out;
  }

  Mat h = x;
  to_hessenberg(h);
  const double eps = 2.22e-16;
  const double floor = eps * (frob_norm(h) + 1e-300);
  int m = n - 1;
  int its = 0, total = 0;
  while (m >= 0) {
    if (++total > 100 * n) throw std::runtime_error("eigenvalues: QR iteration stalled");
    // deflate negligible subdiagonals
    for (int i = 1; i <= m; ++i) {
      double small = eps * (std::abs(h(i - 1, i - 1)) + std::abs(h(i, i)));
      if (std::abs(h(i, i - 1)) <= std::max(small, floor)) h(i, i - 1) = 0.0;
    }
    int l = m;
    while (l > 0 && h(l, l - 1) != 0.0) --l;
    if (l == m) {
      out.emplace_back(h(m, m), 0.0);
      m -= 1;
      its = 0;
      continue;
    }
    if (l == m - 1) {
      eig_2x2(h(m - 1, m - 1), h(m - 1, m), h(m, m - 1), h(m, m), out);
      m -= 2;
      its = 0;
      continue;
    }
    double s, t;
    if (its > 0 && its % 10 == 0) {
      // ad hoc shifts to break the (rare) cycling of the standard choice
      double d = std::abs(h(m, m - 1)) + std::abs(h(m - 1, m - 2));
      s = 1.5 * d;
      t = -0.4375 * d * d;
    } else {
      s = h(m - 1, m - 1) + h(m, m);
      t = h(m - 1, m - 1) * h(m, m) - h(m - 1, m) * h(m, m - 1);
    }
    ++its;
    francis_step(h, l, m, s, t);
  }
  return out;
}

double spectral_radius(const Mat& x) {
  double r = 0.0;
  for (const auto& ev : eigenvalues(x)) r = std::max(r, std::abs(ev));
  return r;
}

std::vector<double> sym_eigenvalues(const Mat& s_in) {
  if (!s_in.square()) throw std::invalid_argument("sym_eigenvalues: matrix not square");
  Mat s = s_in;
  int n = s.rows;
  double thresh = 1e-15 * (frob_norm(s) + 1e-300);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(s(p, q)));
    if (off <= thresh) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(s(p, q)) <= thresh * 1e-2) continue;
        double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * c;
        for (int i = 0; i < n; ++i) {
          double sip = s(i, p), siq = s(i, q);
          s(i, p) = c * sip - sn * siq;
          s(i, q) = sn * sip + c * siq;
        }
        for (int j = 0; j < n; ++j) {
          double spj = s(p, j), sqj = s(q, j);
          s(p, j) = c * spj - sn * sqj;
          s(q, j) = sn * spj + c * sqj;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = s(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double min_sym_eigenvalue(const Mat& s) { return sym_eigenvalues(s).front(); }

Mat cholesky(const Mat& s) {
  if (!s.square()) throw std::invalid_argument("cholesky: matrix not square");
  int n = s.rows;
  Mat l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = s(i, j);
      for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (sum <= 0.0) throw std::domain_error("cholesky: matrix not positive definite");
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace wncs
