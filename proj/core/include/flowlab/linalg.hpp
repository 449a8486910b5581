#pragma once

#include <array>
#include <cassert>
#include <cmath>

namespace flowlab {

// fixed-capacity small vector / matrix for state dimension d <= 3
struct Vec {
  int d{0};
  std::array<double, 3> a{};

  Vec() = default;
  Vec(int dim) : d(dim) { assert(dim >= 0 && dim <= 3); }
  double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < d; ++i) a[i] += o.a[i];
    return *this;
  }
  friend Vec operator+(Vec l, const Vec& r) { return l += r; }
  friend Vec operator-(Vec l, const Vec& r) {
    for (int i = 0; i < l.d; ++i) l.a[i] -= r.a[i];
    return l;
  }
  friend Vec operator*(double s, Vec v) {
    for (int i = 0; i < v.d; ++i) v.a[i] *= s;
    return v;
  }
  double norm() const {
    double s = 0;
    for (int i = 0; i < d; ++i) s += a[i] * a[i];
    return std::sqrt(s);
  }
};

inline Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}
inline Vec vec2(double x, double y) {
  Vec v(2);
  v[0] = x;
  v[1] = y;
  return v;
}

struct Mat {
  int d{0};
  std::array<double, 9> a{};

  Mat() = default;
  explicit Mat(int dim) : d(dim) { assert(dim >= 0 && dim <= 3); }
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * d + j)]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * d + j)]; }

  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  friend Mat operator*(const Mat& l, const Mat& r) {
    Mat m(l.d);
    for (int i = 0; i < l.d; ++i)
      for (int j = 0; j < l.d; ++j) {
        double s = 0;
        for (int k = 0; k < l.d; ++k) s += l(i, k) * r(k, j);
        m(i, j) = s;
      }
    return m;
  }
  friend Mat operator+(Mat l, const Mat& r) {
    for (int i = 0; i < l.d * l.d; ++i) l.a[i] += r.a[i];
    return l;
  }
  friend Mat operator*(double s, Mat m) {
    for (int i = 0; i < m.d * m.d; ++i) m.a[i] *= s;
    return m;
  }
  // matrix-vector product
  friend Vec operator*(const Mat& m, const Vec& v) {
    Vec out(m.d);
    for (int i = 0; i < m.d; ++i) {
      double s = 0;
      for (int j = 0; j < m.d; ++j) s += m(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }
  // row-vector times matrix (gradient chain rule)
  friend Vec operator*(const Vec& v, const Mat& m) {
    Vec out(m.d);
    for (int j = 0; j < m.d; ++j) {
      double s = 0;
      for (int i = 0; i < m.d; ++i) s += v[i] * m(i, j);
      out[j] = s;
    }
    return out;
  }

  double det() const {
    if (d == 1) return a[0];
    if (d == 2) return a[0] * a[3] - a[1] * a[2];
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }

  double frobenius() const {
    double s = 0;
    for (int i = 0; i < d * d; ++i) s += a[i] * a[i];
    return std::sqrt(s);
  }

  Mat inverse() const {
    Mat m(d);
    const double dt = det();
    if (d == 1) {
      m.a[0] = 1.0 / dt;
      return m;
    }
    if (d == 2) {
      m.a[0] = a[3] / dt;
      m.a[1] = -a[1] / dt;
      m.a[2] = -a[2] / dt;
      m.a[3] = a[0] / dt;
      return m;
    }
    const Mat& s = *this;
    m(0, 0) = (s(1, 1) * s(2, 2) - s(1, 2) * s(2, 1)) / dt;
    m(0, 1) = (s(0, 2) * s(2, 1) - s(0, 1) * s(2, 2)) / dt;
    m(0, 2) = (s(0, 1) * s(1, 2) - s(0, 2) * s(1, 1)) / dt;
    m(1, 0) = (s(1, 2) * s(2, 0) - s(1, 0) * s(2, 2)) / dt;
    m(1, 1) = (s(0, 0) * s(2, 2) - s(0, 2) * s(2, 0)) / dt;
    m(1, 2) = (s(0, 2) * s(1, 0) - s(0, 0) * s(1, 2)) / dt;
    m(2, 0) = (s(1, 0) * s(2, 1) - s(1, 1) * s(2, 0)) / dt;
    m(2, 1) = (s(0, 1) * s(2, 0) - s(0, 0) * s(2, 1)) / dt;
    m(2, 2) = (s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0)) / dt;
    return m;
  }
};

} // namespace flowlab
