#pragma once

#include "evo/types.hpp"

#include <span>

namespace evo {

// 300 at d = 4096.
double default_radius(int dim);

struct SphereParams {
  double radius = 0.0;
  int dim = 0;
  double lr = 1.5;
  int population = 40;
  int cutoff = 0;  // 0 selects floor(B/2), at least 1

  static SphereParams defaults(int dim, int population = 40);
  int effective_cutoff() const;
  void validate() const;
};

enum class DecayKind { Exponential, Inverse };

struct DecaySchedule {
  DecayKind kind = DecayKind::Exponential;
  double mu0 = 0.4;
  double mu_min = 0.05;
  double tau = 25.0;

  // Defaults for a run of `generations` steps.
  static DecaySchedule exponential(int generations = 75);
  static DecaySchedule inverse();
  void validate() const;
};

double decay_eval(const DecaySchedule& s, int t);

Vector exp_map(const VecRef& m, const VecRef& v, double mu);
Vector slerp(const VecRef& m, const VecRef& p, double t);
Vector tangent_project(const VecRef& u, const VecRef& m);

// Log-rank weights on the top K scores. Equal scores rank by ascending index.
Vector rank_weight(std::span<const double> scores, int K);

// Angle between two non-zero vectors, clamped against rounding.
double angle_between(const VecRef& a, const VecRef& b);

}  // namespace evo
