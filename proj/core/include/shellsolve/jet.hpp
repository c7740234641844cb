#pragma once

#include <array>
#include <functional>

namespace shellsolve {

/// Bivariate Taylor polynomial truncated at total degree 4:
/// f(x0 + dx, y0 + dy) ~ sum_{a+b<=4} c(a,b) dx^a dy^b.
/// Arithmetic on jets propagates exact partial derivatives through order 4.
class Jet {
 public:
  static constexpr int kOrder = 4;

  Jet() { c_.fill(0.0); }
  Jet(double value) : Jet() { c_[0] = value; }  // NOLINT(google-explicit-constructor)

  static Jet x(double x0);
  static Jet y(double y0);

  double coeff(int a, int b) const { return c_[index(a, b)]; }
  double& coeff(int a, int b) { return c_[index(a, b)]; }
  double value() const { return c_[0]; }
  /// d^{a+b} f / dx^a dy^b = a! b! c(a,b).
  double derivative(int a, int b) const;
  double biharmonic() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, const Jet& b) { return a *= b; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }

 private:
  static constexpr int index(int a, int b) {
    // Degree-major layout: all terms of total degree d follow those of d - 1.
    const int d = a + b;
    return d * (d + 1) / 2 + b;
  }
  std::array<double, 15> c_;
};

Jet sin(const Jet& u);
Jet cos(const Jet& u);
Jet pow(const Jet& u, int n);

/// L[u, v] = u_xx v_yy + u_yy v_xx - 2 u_xy v_xy at the jet's expansion point.
double bilinear_L(const Jet& u, const Jet& v);

using JetField = std::function<Jet(const Jet&, const Jet&)>;

}  // namespace shellsolve
