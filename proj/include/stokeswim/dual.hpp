#pragma once

#include <Eigen/Core>
#include <cmath>
#include <type_traits>

namespace stokeswim {

// Forward-mode scalar carrying one directional derivative. Nesting
// (Dual<Dual<double>> etc.) yields exact higher directional derivatives,
// which is what the iterated Lie brackets need. Only the operations the
// model pipeline actually uses are provided.
template <class T>
struct Dual {
  T v{};  // value
  T d{};  // directional derivative

  Dual() = default;
  Dual(T value, T deriv) : v(std::move(value)), d(std::move(deriv)) {}

  // Implicit lift from any arithmetic type (constant: zero derivative).
  // The recursive T(x) makes nested duals constructible from plain doubles.
  template <class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
  Dual(U x) : v(T(x)), d() {}

  Dual(T value) : v(std::move(value)), d() {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v = v * o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v = v / o.v;
    return *this;
  }

  Dual operator-() const { return Dual(-v, -d); }
};

inline double scalar_value(double x) { return x; }
template <class T>
double scalar_value(const Dual<T>& x) { return scalar_value(x.v); }

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }

// Mixed arithmetic with plain numbers (kept explicit so nested duals do not
// need chained implicit conversions inside expression templates).
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator+(const Dual<T>& a, U b) { return a + Dual<T>(b); }
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator+(U a, const Dual<T>& b) { return Dual<T>(a) + b; }
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator-(const Dual<T>& a, U b) { return a - Dual<T>(b); }
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator-(U a, const Dual<T>& b) { return Dual<T>(a) - b; }
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator*(const Dual<T>& a, U b) { return a * Dual<T>(b); }
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator*(U a, const Dual<T>& b) { return Dual<T>(a) * b; }
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator/(const Dual<T>& a, U b) { return a / Dual<T>(b); }
template <class T, class U, std::enable_if_t<std::is_arithmetic_v<U>, int> = 0>
Dual<T> operator/(U a, const Dual<T>& b) { return Dual<T>(a) / b; }

// Comparisons act on the underlying values (branching in pivoted solves).
template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return scalar_value(a) < scalar_value(b); }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return scalar_value(a) > scalar_value(b); }
template <class T> bool operator<=(const Dual<T>& a, const Dual<T>& b) { return scalar_value(a) <= scalar_value(b); }
template <class T> bool operator>=(const Dual<T>& a, const Dual<T>& b) { return scalar_value(a) >= scalar_value(b); }
template <class T> bool operator==(const Dual<T>& a, const Dual<T>& b) { return scalar_value(a) == scalar_value(b); }
template <class T> bool operator!=(const Dual<T>& a, const Dual<T>& b) { return scalar_value(a) != scalar_value(b); }

using std::abs;
using std::cos;
using std::sin;
using std::sqrt;

template <class T>
Dual<T> sin(const Dual<T>& x) {
  return Dual<T>(sin(x.v), cos(x.v) * x.d);
}
template <class T>
Dual<T> cos(const Dual<T>& x) {
  return Dual<T>(cos(x.v), -sin(x.v) * x.d);
}
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  T r = sqrt(x.v);
  return Dual<T>(r, x.d / (2.0 * r));
}
template <class T>
Dual<T> abs(const Dual<T>& x) {
  return scalar_value(x) < 0.0 ? -x : x;
}

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual1>;
using Dual3 = Dual<Dual2>;

}  // namespace stokeswim

namespace Eigen {

template <class T>
struct NumTraits<stokeswim::Dual<T>> : NumTraits<double> {
  using Real = stokeswim::Dual<T>;
  using NonInteger = stokeswim::Dual<T>;
  using Nested = stokeswim::Dual<T>;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2 * NumTraits<T>::ReadCost,
    AddCost = 2 * NumTraits<T>::AddCost,
    MulCost = 4 * NumTraits<T>::MulCost,
  };
  static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
  static inline Real dummy_precision() { return Real(NumTraits<double>::dummy_precision()); }
  static inline Real highest() { return Real(NumTraits<double>::highest()); }
  static inline Real lowest() { return Real(NumTraits<double>::lowest()); }
  static inline int digits10() { return NumTraits<double>::digits10(); }
};

}  // namespace Eigen
