#include "magpc/dac.hpp"

#include "magpc/errors.hpp"
#include "magpc/random.hpp"

#include <cmath>
#include <numbers>

namespace magpc {

DacParams DacParams::zeros(int H, int k, int d) {
  if (H < 1 || k < 1 || d < 1) throw DimensionError("DAC parameters need H, k, d >= 1");
  return DacParams(std::vector<Mat>(static_cast<std::size_t>(H), Mat::Zero(k, d)));
}

Vec DacParams::flatten() const {
  Vec v(size());
  Eigen::Index o = 0;
  for (const auto& b : blocks) {
    v.segment(o, b.size()) = Eigen::Map<const Vec>(b.data(), b.size());
    o += b.size();
  }
  return v;
}

DacParams DacParams::unflatten(const Vec& v, int H, int k, int d) {
  if (v.size() != static_cast<Eigen::Index>(H) * k * d) {
    throw DimensionError("flat DAC vector has wrong length");
  }
  DacParams M;
  M.blocks.reserve(static_cast<std::size_t>(H));
  for (int p = 0; p < H; ++p) {
    M.blocks.emplace_back(Eigen::Map<const Mat>(v.data() + static_cast<Eigen::Index>(p) * k * d, k, d));
  }
  return M;
}

double DacParams::frobenius_norm() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.squaredNorm();
  return std::sqrt(s);
}

DacParams& DacParams::operator+=(const DacParams& o) {
  if (o.blocks.size() != blocks.size()) throw DimensionError("DAC parameter length mismatch");
  for (std::size_t p = 0; p < blocks.size(); ++p) blocks[p] += o.blocks[p];
  return *this;
}

DacParams& DacParams::operator-=(const DacParams& o) {
  if (o.blocks.size() != blocks.size()) throw DimensionError("DAC parameter length mismatch");
  for (std::size_t p = 0; p < blocks.size(); ++p) blocks[p] -= o.blocks[p];
  return *this;
}

DacParams& DacParams::operator*=(double s) {
  for (auto& b : blocks) b *= s;
  return *this;
}

bool DacParams::operator==(const DacParams& o) const {
  if (o.blocks.size() != blocks.size()) return false;
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    if (blocks[p].rows() != o.blocks[p].rows() || blocks[p].cols() != o.blocks[p].cols() ||
        blocks[p] != o.blocks[p]) {
      return false;
    }
  }
  return true;
}

void check_shape(const DacParams& M, int H, int k, int d, int agent) {
  if (M.H() != H) throw DimensionError("expected " + std::to_string(H) + " DAC blocks", agent);
  for (const auto& b : M.blocks) {
    if (b.rows() != k || b.cols() != d) throw DimensionError("DAC block must be k x d", agent);
  }
}

DacSet DacSet::make(int H, int k, int d, double kappa, double gamma, BallNorm norm,
                    double tau) {
  if (H < 1) throw ConfigError("memory length H must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(kappa >= 1.0)) throw ConfigError("kappa must be >= 1");
  DacSet s;
  s.H = H;
  s.k = k;
  s.d = d;
  s.kappa = kappa;
  s.gamma = gamma;
  s.tau = tau > 0.0 ? tau : 2.0 * kappa * kappa;
  s.norm = norm;
  s.radii.resize(static_cast<std::size_t>(H));
  for (int p = 1; p <= H; ++p) s.radii[static_cast<std::size_t>(p - 1)] = s.tau * std::pow(1.0 - gamma, p);
  return s;
}

DacSet DacSet::from_certificate(const StabilityCertificate& cert, int H, int k, int d,
                                BallNorm norm, double tau) {
  return make(H, k, d, cert.kappa, cert.gamma, norm, tau);
}

Mat project_block(const Mat& block, double radius, BallNorm norm) {
  if (norm == BallNorm::kFrobenius) {
    const double n = block.norm();
    if (n <= radius) return block;
    return block * (radius / n);
  }
  Eigen::JacobiSVD<Mat> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  if (!s.allFinite()) throw NumericError("singular value decomposition failed in projection");
  if (s.size() == 0 || s(0) <= radius) return block;
  const Vec clipped = s.cwiseMin(radius);
  return svd.matrixU() * clipped.asDiagonal() * svd.matrixV().transpose();
}

DacParams project(const DacParams& M, const DacSet& set) {
  check_shape(M, set.H, set.k, set.d);
  DacParams out = M;
  for (int p = 1; p <= set.H; ++p) {
    auto& b = out.blocks[static_cast<std::size_t>(p - 1)];
    b = project_block(b, set.radius(p), set.norm);
  }
  return out;
}

void project_flat(Vec& m, const DacSet& set) {
  const Eigen::Index kd = static_cast<Eigen::Index>(set.k) * set.d;
  if (m.size() != kd * set.H) throw DimensionError("flattened parameter has the wrong length");
  const bool vector_blocks = set.norm == BallNorm::kFrobenius || set.k == 1 || set.d == 1;
  for (int p = 1; p <= set.H; ++p) {
    auto seg = m.segment(static_cast<Eigen::Index>(p - 1) * kd, kd);
    const double r = set.radius(p);
    if (vector_blocks) {
      // A single row or column has one singular value: its Euclidean norm.
      const double n = seg.norm();
      if (n > r) seg *= r / n;
    } else {
      Eigen::Map<Mat> block(seg.data(), set.k, set.d);
      block = project_block(Mat(block), r, set.norm);
    }
  }
}

bool membership(const DacParams& M, const DacSet& set, double tol) {
  if (M.H() != set.H) return false;
  for (int p = 1; p <= set.H; ++p) {
    const auto& b = M.blocks[static_cast<std::size_t>(p - 1)];
    if (b.rows() != set.k || b.cols() != set.d) return false;
    const double n = set.norm == BallNorm::kSpectral ? spectral_norm(b) : b.norm();
    if (n > set.radius(p) + tol) return false;
  }
  return true;
}

double diameter(const DacSet& set) {
  const double scale = set.tau / (2.0 * set.kappa * set.kappa);
  return scale * 4.0 * std::numbers::sqrt2 * set.kappa * set.kappa / set.gamma;
}

DacParams random_member(const DacSet& set, std::uint64_t seed) {
  Rng rng(seed);
  DacParams M = DacParams::zeros(set.H, set.k, set.d);
  for (int p = 1; p <= set.H; ++p) {
    auto& b = M.blocks[static_cast<std::size_t>(p - 1)];
    for (Eigen::Index j = 0; j < b.size(); ++j) b.data()[j] = rng.normal();
    const double n = set.norm == BallNorm::kSpectral ? spectral_norm(b) : b.norm();
    const double target = set.radius(p) * rng.uniform();
    if (n > 0.0) b *= target / n;
  }
  return M;
}

DisturbanceBuffer::DisturbanceBuffer(int capacity, int d)
    : capacity_(capacity), zero_(Vec::Zero(d)) {
  if (capacity_ < 1 || d < 1) throw DimensionError("disturbance buffer needs capacity, d >= 1");
}

void DisturbanceBuffer::push(const Vec& w) {
  if (w.size() != zero_.size()) throw DimensionError("disturbance has wrong dimension");
  data_.push_front(w);
  if (static_cast<int>(data_.size()) > capacity_) data_.pop_back();
}

const Vec& DisturbanceBuffer::lag(int p) const {
  if (p < 1) throw DimensionError("buffer lag must be >= 1");
  if (p > static_cast<int>(data_.size())) return zero_;
  return data_[static_cast<std::size_t>(p - 1)];
}

std::vector<Vec> DisturbanceBuffer::window(int n) const {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) out.push_back(lag(l + 1));
  return out;
}

Vec control(const Mat& K, const DacParams& M, const DisturbanceBuffer& buf, const Vec& x) {
  if (K.cols() != x.size()) throw DimensionError("gain and state dimensions differ");
  Vec u = -K * x;
  for (int p = 1; p <= M.H(); ++p) {
    const auto& b = M.blocks[static_cast<std::size_t>(p - 1)];
    if (b.rows() != u.size() || b.cols() != buf.d()) throw DimensionError("DAC block has wrong shape");
    u.noalias() += b * buf.lag(p);
  }
  return u;
}

}  // namespace magpc
