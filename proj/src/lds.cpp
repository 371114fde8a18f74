#include "magpc/lds.hpp"

#include "magpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace magpc {

LdsSystem::LdsSystem(Mat a, std::vector<Mat> b, double w)
    : A(std::move(a)), B(std::move(b)), W(w) {
  validate();
}

int LdsSystem::total_controls() const {
  int total = 0;
  for (const auto& b : B) total += static_cast<int>(b.cols());
  return total;
}

double LdsSystem::sum_B_norms() const {
  double s = 0.0;
  for (const auto& b : B) s += spectral_norm(b);
  return s;
}

double LdsSystem::max_B_norm() const {
  double s = 0.0;
  for (const auto& b : B) s = std::max(s, spectral_norm(b));
  return s;
}

void LdsSystem::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw DimensionError("A must be a non-empty square matrix");
  }
  if (B.empty()) throw DimensionError("system needs at least one agent");
  for (int i = 0; i < N(); ++i) {
    if (B[i].rows() != A.rows()) {
      throw DimensionError("B_i must have d = " + std::to_string(d()) + " rows", i);
    }
    if (B[i].cols() < 1) throw DimensionError("B_i needs at least one column", i);
  }
  if (!(W > 0.0) || !std::isfinite(W)) throw ConfigError("disturbance bound W must be positive");
}

Vec step(const LdsSystem& sys, const Vec& x, const std::vector<Vec>& controls,
         const Vec& w) {
  if (x.size() != sys.d()) throw DimensionError("state has wrong dimension");
  if (w.size() != sys.d()) throw DimensionError("disturbance has wrong dimension");
  if (static_cast<int>(controls.size()) != sys.N()) {
    throw DimensionError("expected " + std::to_string(sys.N()) + " controls, got " +
                         std::to_string(controls.size()));
  }
  Vec next = sys.A * x;
  for (int i = 0; i < sys.N(); ++i) {
    if (controls[i].size() != sys.k(i)) {
      throw DimensionError("control has wrong dimension", i);
    }
    next.noalias() += sys.B[i] * controls[i];
  }
  next += w;
  return next;
}

Vec aggregate_other(const LdsSystem& sys, int i, const std::vector<Vec>& controls) {
  Vec agg = Vec::Zero(sys.d());
  for (int j = 0; j < sys.N(); ++j) {
    if (j == i) continue;
    if (controls[j].size() != sys.k(j)) throw DimensionError("control has wrong dimension", j);
    agg.noalias() += sys.B[j] * controls[j];
  }
  return agg;
}

Vec recover_disturbance(const LdsSystem& sys, int i, int setting,
                        const Vec& x_prev, const Vec& x_next, const Vec& own_u,
                        const std::optional<Vec>& aggregate) {
  if (i < 0 || i >= sys.N()) throw DimensionError("agent index out of range", i);
  if (own_u.size() != sys.k(i)) throw DimensionError("control has wrong dimension", i);
  if (x_prev.size() != sys.d() || x_next.size() != sys.d()) {
    throw DimensionError("state has wrong dimension", i);
  }
  Vec w = x_next - sys.A * x_prev - sys.B[i] * own_u;
  if (setting == 2) {
    if (!aggregate) {
      throw ProtocolError("setting 2 recovery needs the aggregate of other controls (agent " +
                          std::to_string(i) + ")");
    }
    if (aggregate->size() != sys.d()) throw DimensionError("aggregate has wrong dimension", i);
    w -= *aggregate;
  } else if (setting != 1) {
    throw ConfigError("information setting must be 1 or 2");
  }
  return w;
}

}  // namespace magpc
