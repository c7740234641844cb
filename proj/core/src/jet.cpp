#include "shellsolve/jet.hpp"

#include <cmath>

namespace shellsolve {

namespace {

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};

// Composition g(u) = sum_k g^(k)(u0) (u - u0)^k / k!, given the derivatives of g at u0.
Jet compose(const Jet& u, const std::array<double, 5>& g_derivs) {
  Jet delta = u;
  delta.coeff(0, 0) = 0.0;
  Jet out(g_derivs[0]);
  Jet power(1.0);
  for (int k = 1; k <= Jet::kOrder; ++k) {
    power *= delta;
    out += (g_derivs[static_cast<std::size_t>(k)] / kFactorial[k]) * power;
  }
  return out;
}

}  // namespace

Jet Jet::x(double x0) {
  Jet j(x0);
  j.coeff(1, 0) = 1.0;
  return j;
}

Jet Jet::y(double y0) {
  Jet j(y0);
  j.coeff(0, 1) = 1.0;
  return j;
}

double Jet::derivative(int a, int b) const { return kFactorial[a] * kFactorial[b] * coeff(a, b); }

double Jet::biharmonic() const { return 24.0 * coeff(4, 0) + 8.0 * coeff(2, 2) + 24.0 * coeff(0, 4); }

Jet& Jet::operator+=(const Jet& o) {
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  Jet out;
  for (int a1 = 0; a1 <= kOrder; ++a1) {
    for (int b1 = 0; a1 + b1 <= kOrder; ++b1) {
      const double p = coeff(a1, b1);
      if (p == 0.0) continue;
      for (int a2 = 0; a1 + b1 + a2 <= kOrder; ++a2) {
        for (int b2 = 0; a1 + b1 + a2 + b2 <= kOrder; ++b2) {
          out.coeff(a1 + a2, b1 + b2) += p * o.coeff(a2, b2);
        }
      }
    }
  }
  *this = out;
  return *this;
}

Jet sin(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return compose(u, {s, c, -s, -c, s});
}

Jet cos(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return compose(u, {c, -s, -c, s, c});
}

Jet pow(const Jet& u, int n) {
  Jet out(1.0);
  for (int k = 0; k < n; ++k) out *= u;
  return out;
}

double bilinear_L(const Jet& u, const Jet& v) {
  return u.derivative(2, 0) * v.derivative(0, 2) + u.derivative(0, 2) * v.derivative(2, 0) -
         2.0 * u.derivative(1, 1) * v.derivative(1, 1);
}

}  // namespace shellsolve
