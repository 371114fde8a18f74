#pragma once

#include "magpc/linalg.hpp"
#include "magpc/stability.hpp"

#include <deque>
#include <vector>

namespace magpc {

// M = [M^[0], ..., M^[H-1]], each block k x d. Block p-1 multiplies the
// disturbance observed p rounds ago.
struct DacParams {
  std::vector<Mat> blocks;

  DacParams() = default;
  explicit DacParams(std::vector<Mat> b) : blocks(std::move(b)) {}
  static DacParams zeros(int H, int k, int d);

  int H() const { return static_cast<int>(blocks.size()); }
  int k() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
  int d() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().cols()); }
  int size() const { return H() * k() * d(); }
  bool empty() const { return blocks.empty(); }

  // Column-major per block, blocks in order.
  Vec flatten() const;
  static DacParams unflatten(const Vec& v, int H, int k, int d);

  double frobenius_norm() const;
  DacParams& operator+=(const DacParams& o);
  DacParams& operator-=(const DacParams& o);
  DacParams& operator*=(double s);
  friend DacParams operator+(DacParams a, const DacParams& b) { return a += b; }
  friend DacParams operator-(DacParams a, const DacParams& b) { return a -= b; }
  friend DacParams operator*(double s, DacParams a) { return a *= s; }
  bool operator==(const DacParams& o) const;
};

void check_shape(const DacParams& M, int H, int k, int d, int agent = -1);

enum class BallNorm { kSpectral, kFrobenius };

// Product of per-block balls ||M^[p-1]|| <= r_p = tau (1 - gamma)^p, p = 1..H.
struct DacSet {
  int H = 1;
  int k = 1;
  int d = 1;
  double kappa = 1.0;
  double gamma = 0.5;
  double tau = 2.0;
  BallNorm norm = BallNorm::kSpectral;
  std::vector<double> radii;

  static DacSet make(int H, int k, int d, double kappa, double gamma,
                     BallNorm norm = BallNorm::kSpectral, double tau = -1.0);
  static DacSet from_certificate(const StabilityCertificate& cert, int H, int k, int d,
                                 BallNorm norm = BallNorm::kSpectral, double tau = -1.0);
  double radius(int p) const { return radii.at(static_cast<std::size_t>(p - 1)); }
};

// Euclidean (Frobenius-metric) projection, block by block.
DacParams project(const DacParams& M, const DacSet& set);
Mat project_block(const Mat& block, double radius, BallNorm norm = BallNorm::kSpectral);
// Same projection on the flattened parameter, in place.
void project_flat(Vec& m, const DacSet& set);
bool membership(const DacParams& M, const DacSet& set, double tol = 1e-9);
// Diameter bound D_0 = 4 sqrt(2) kappa^2 / gamma (scaled with tau when tau != 2 kappa^2).
double diameter(const DacSet& set);
// Uniform-ish random member (each block scaled into its ball).
DacParams random_member(const DacSet& set, std::uint64_t seed);

// Last few recovered disturbances; lag(p) is the vector pushed p pushes ago
// (lag 1 = most recent), zero before anything was recorded.
class DisturbanceBuffer {
 public:
  DisturbanceBuffer(int capacity, int d);

  void push(const Vec& w);
  const Vec& lag(int p) const;
  int capacity() const { return capacity_; }
  int count() const { return static_cast<int>(data_.size()); }
  int d() const { return static_cast<int>(zero_.size()); }
  // dist[l] = lag(l + 1) for l = 0..n-1.
  std::vector<Vec> window(int n) const;

 private:
  int capacity_;
  std::deque<Vec> data_;
  Vec zero_;
};

// u = -K x + sum_{p=1}^H M^[p-1] buf.lag(p)
Vec control(const Mat& K, const DacParams& M, const DisturbanceBuffer& buf, const Vec& x);

}  // namespace magpc
