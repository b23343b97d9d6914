#pragma once

#include "evo/types.hpp"
#include "evo/rng.hpp"

#include <initializer_list>
#include <optional>

namespace testing {

// Error code raised by f, or nullopt when it returns normally.
template <class F>
std::optional<evo::Errc> errc_of(F&& f) {
  try {
    f();
  } catch (const evo::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline evo::Vector vec(std::initializer_list<double> v) {
  evo::Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

inline evo::Vector gaussian(int d, evo::Rng& rng) {
  evo::Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.normal();
  return v;
}

inline evo::Matrix random_orthogonal(int d, evo::Rng& rng) {
  evo::Matrix g(d, d);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  Eigen::HouseholderQR<evo::Matrix> qr(g);
  return qr.householderQ();
}

}  // namespace testing
