#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "graphon.hpp"

namespace graphldp {

// Gradients of the rate integrands blow up at 0 and 1; solver code sees them
// through this clamp.
inline constexpr double kGradClamp = 50.0;

// Binary relative entropy x log(x/p) + (1-x) log((1-x)/(1-p)), halved for the
// symmetric-kernel convention.  Natural logs throughout.
inline double i_p_scalar(double p, double x) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("i_p_scalar: need 0 < p < 1");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("i_p_scalar: need 0 <= x <= 1");
  double term = xlogx(x) - x * std::log(p) + xlogx(1.0 - x) - (1.0 - x) * std::log(1.0 - p);
  return 0.5 * term;
}

// d/dx of i_p_scalar, clamped to +-clamp.
inline double i_p_deriv(double p, double x, double clamp = kGradClamp) {
  double d;
  if (x <= 0.0) d = -clamp;
  else if (x >= 1.0) d = clamp;
  else d = 0.5 * (std::log(x / (1.0 - x)) + std::log((1.0 - p) / p));
  return std::clamp(d, -clamp, clamp);
}

// Halved binary entropy -1/2 (x log x + (1-x) log(1-x)).
inline double h_e(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("h_e: need 0 <= x <= 1");
  return -0.5 * (xlogx(x) + xlogx(1.0 - x));
}

inline double h_e_deriv(double x, double clamp = kGradClamp) {
  double d;
  if (x <= 0.0) d = clamp;
  else if (x >= 1.0) d = -clamp;
  else d = -0.5 * std::log(x / (1.0 - x));
  return std::clamp(d, -clamp, clamp);
}

// Integral of i_p over the square for a step graphon.
inline double i_p_graphon(double p, const StepGraphon& w) {
  double s = 0;
  int k = w.blocks();
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      s += w.weights[a] * w.weights[b] * i_p_scalar(p, std::clamp(w.at(a, b), 0.0, 1.0));
  return s;
}

inline double h_e_graphon(const StepGraphon& w) {
  double s = 0;
  int k = w.blocks();
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      s += w.weights[a] * w.weights[b] * h_e(std::clamp(w.at(a, b), 0.0, 1.0));
  return s;
}

// Gradient of i_p_graphon in the free cells x_ab (a <= b): the cell measure
// (2 - [a==b]) w_a w_b times the clamped scalar derivative.  Full symmetric
// matrix returned, entry (a,b) = entry (b,a) = derivative in the shared
// parameter.
inline std::vector<double> i_p_gradient(double p, const StepGraphon& w, double clamp = kGradClamp) {
  int k = w.blocks();
  std::vector<double> g((std::size_t)k * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      double mu = (a == b ? 1.0 : 2.0) * w.weights[a] * w.weights[b];
      g[(std::size_t)a * k + b] = mu * i_p_deriv(p, std::clamp(w.at(a, b), 0.0, 1.0), clamp);
    }
  return g;
}

inline std::vector<double> h_e_gradient(const StepGraphon& w, double clamp = kGradClamp) {
  int k = w.blocks();
  std::vector<double> g((std::size_t)k * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      double mu = (a == b ? 1.0 : 2.0) * w.weights[a] * w.weights[b];
      g[(std::size_t)a * k + b] = mu * h_e_deriv(std::clamp(w.at(a, b), 0.0, 1.0), clamp);
    }
  return g;
}

}  // namespace graphldp
