#pragma once

#include <random>

#include "minnorm/types.hpp"

namespace testing {

inline minnorm::Matrix gaussian(minnorm::Index r, minnorm::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  minnorm::Matrix M(r, c);
  for (minnorm::Index i = 0; i < r; ++i)
    for (minnorm::Index j = 0; j < c; ++j) M(i, j) = z(rng);
  return M;
}

inline minnorm::Vector gaussian_vec(minnorm::Index n, std::mt19937_64& rng, double sd = 1) {
  std::normal_distribution<double> z(0, sd);
  minnorm::Vector v(n);
  for (minnorm::Index i = 0; i < n; ++i) v(i) = z(rng);
  return v;
}

inline double rel(const minnorm::Vector& a, const minnorm::Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline minnorm::DatasetPair random_pair(minnorm::Index n1, minnorm::Index n2, minnorm::Index p,
                                        std::mt19937_64& rng) {
  minnorm::DatasetPair d;
  d.X1 = gaussian(n1, p, rng);
  d.X2 = gaussian(n2, p, rng);
  d.y1 = gaussian_vec(n1, rng);
  d.y2 = gaussian_vec(n2, rng);
  return d;
}

}  // namespace testing
