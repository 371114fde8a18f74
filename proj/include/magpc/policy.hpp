#pragma once

#include "magpc/dac.hpp"
#include "magpc/lds.hpp"

#include <optional>
#include <string>
#include <vector>

namespace magpc {

// Read-only view of every agent's (B_j, K_j, M_j) at the current round,
// handed to Setting-2 agents only.
struct JointSnapshot {
  std::vector<Mat> B;
  std::vector<Mat> K;
  std::vector<DacParams> M;
};

struct Observation {
  int t = 0;
  Vec x_next;
  std::optional<Vec> aggregate_other;     // Setting 2 only
  const JointSnapshot* joint = nullptr;   // Setting 2 only
};

// Contract: act(t, x_t) once, then observe(...) once, per round.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int setting() const = 0;
  virtual Vec act(int t, const Vec& x) = 0;
  virtual void observe(const Observation& obs) = 0;
  virtual const Mat& gain() const = 0;
  virtual const DacParams& params() const;
  virtual const Vec& disturbance_estimate() const = 0;
  virtual std::string kind() const = 0;
};

// Shared bookkeeping for disturbance recovery.
class RecoveringPolicy : public Policy {
 public:
  RecoveringPolicy(const LdsSystem& sys, int index, int setting);

  int setting() const override { return setting_; }
  const Vec& disturbance_estimate() const override { return w_est_; }
  int index() const { return index_; }

 protected:
  void begin_round(int t, const Vec& x, const Vec& u);
  // Recovers the setting-appropriate disturbance of the round just played.
  Vec recover(const Observation& obs);

  Mat A_;
  Mat B_;  // own input matrix only
  int d_;
  int index_;
  int setting_;
  bool acted_ = false;
  int round_ = -1;
  Vec x_prev_;
  Vec u_prev_;
  Vec w_est_;
};

// u = -K x
class LinearPolicy : public RecoveringPolicy {
 public:
  LinearPolicy(const LdsSystem& sys, int index, Mat K, int setting = 1);
  Vec act(int t, const Vec& x) override;
  void observe(const Observation& obs) override;
  const Mat& gain() const override { return K_; }
  std::string kind() const override { return "linear"; }

 private:
  Mat K_;
};

// Replays a fixed control sequence (index t, clamped to the last entry).
class OpenLoopPolicy : public RecoveringPolicy {
 public:
  OpenLoopPolicy(const LdsSystem& sys, int index, std::vector<Vec> controls, int setting = 1);
  Vec act(int t, const Vec& x) override;
  void observe(const Observation& obs) override;
  const Mat& gain() const override { return K_; }
  std::string kind() const override { return "open-loop"; }

 private:
  std::vector<Vec> controls_;
  Mat K_;
};

}  // namespace magpc
