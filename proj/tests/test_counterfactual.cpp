#include "helpers.hpp"
#include "magpc/costs.hpp"
#include "magpc/counterfactual.hpp"
#include "magpc/dac.hpp"
#include "magpc/errors.hpp"

#include <gtest/gtest.h>

using namespace magpc;
using magpc::testing::random_matrix;
using magpc::testing::random_vector;

namespace {

std::vector<DacParams> random_history(Rng& rng, int len, int H, int k, int d) {
  std::vector<DacParams> out;
  for (int i = 0; i < len; ++i) {
    std::vector<Mat> blocks;
    for (int p = 0; p < H; ++p) blocks.push_back(random_matrix(rng, k, d, 0.3));
    out.emplace_back(blocks);
  }
  return out;
}

}  // namespace

TEST(TransferStack, PowersAreCached) {
  Rng rng(1);
  const Mat A = random_matrix(rng, 3, 3, 0.5);
  const TransferStack s(A, 2);
  EXPECT_LE((s.power(3) - A * A * A).norm(), 1e-12);
  EXPECT_THROW(s.power(s.max_power() + 1), DimensionError);
}

TEST(Psi, WithoutParametersIsAPlainPower) {
  Rng rng(2);
  const Mat A = random_matrix(rng, 2, 2, 0.5);
  const TransferStack s(A, 3);
  const std::vector<ChannelWindow> none{{random_matrix(rng, 2, 1), std::vector<DacParams>(4, DacParams::zeros(3, 1, 2))}};
  for (int l = 0; l <= 6; ++l) {
    const Mat expect = l <= 3 ? s.power(l) : Mat(Mat::Zero(2, 2));
    EXPECT_LE((psi(s, none, l, 3) - expect).norm(), 1e-14);
  }
}

TEST(UnrollState, MatchesStepByStepSimulation) {
  Rng rng(3);
  const int d = 3, H = 3, h = 4;
  const Mat A = random_matrix(rng, d, d, 0.4);
  const Mat B1 = random_matrix(rng, d, 1), B2 = random_matrix(rng, d, 2);
  const Mat K1 = random_matrix(rng, 1, d, 0.1), K2 = random_matrix(rng, 2, d, 0.1);
  const Mat Acl = A - B1 * K1 - B2 * K2;
  // w[s] for s = t-h-H .. t, indexed by offset from t-h-H.
  const int len = h + H + 1;
  std::vector<Vec> w;
  for (int s = 0; s < len; ++s) w.push_back(random_vector(rng, d, 0.3));
  const auto M1 = random_history(rng, h + 1, H, 1, d), M2 = random_history(rng, h + 1, H, 2, d);
  const Vec x_start = random_vector(rng, d);
  // Play rounds t-h..t directly: u^i = -K_i x + sum_p M^i[p-1] w_{s-p}.
  Vec x = x_start;
  for (int r = 0; r <= h; ++r) {
    const int s = H + r;  // index of w_s in the vector above
    const DacParams& m1 = M1[h - r];
    const DacParams& m2 = M2[h - r];
    Vec u1 = -K1 * x, u2 = -K2 * x;
    for (int p = 1; p <= H; ++p) {
      u1 += m1.blocks[p - 1] * w[s - p];
      u2 += m2.blocks[p - 1] * w[s - p];
    }
    x = A * x + B1 * u1 + B2 * u2 + w[s];
  }
  const TransferStack stack(Acl, H);
  std::vector<Vec> dist;
  for (int l = 0; l <= H + h; ++l) dist.push_back(w[len - 1 - l]);
  const Vec pred = unroll_state(stack, {{B1, M1}, {B2, M2}}, x_start, dist, h);
  EXPECT_LE((pred - x).norm(), 1e-10 * (1 + x.norm()));
}

TEST(IdealState, TransferAndRecursionAgree) {
  Rng rng(4);
  for (int n = 0; n < 20; ++n) {
    const int d = 1 + n % 3, H = 1 + n % 4;
    const TransferStack stack(random_matrix(rng, d, d, 0.4), H);
    std::vector<Channel> ch{{random_matrix(rng, d, 1), random_matrix(rng, 1, d, 0.1), random_history(rng, 1, H, 1, d)[0]},
                            {random_matrix(rng, d, 2), random_matrix(rng, 2, d, 0.1), random_history(rng, 1, H, 2, d)[0]}};
    std::vector<Vec> dist;
    for (int l = 0; l <= 2 * H; ++l) dist.push_back(random_vector(rng, d));
    const Vec a = ideal_state_transfer(stack, ch, dist);
    const Vec b = ideal_state_rollout(stack, ch, dist);
    EXPECT_LE((a - b).norm(), 1e-10 * (1 + a.norm()));
  }
}

TEST(Surrogate, GradientMatchesCentralDifferences) {
  Rng rng(5);
  for (int n = 0; n < 20; ++n) {
    const int d = 1 + n % 3, H = 1 + n % 3;
    const TransferStack stack(random_matrix(rng, d, d, 0.4), H);
    const bool joint = n % 2 == 0;
    const QuadraticTracking own(TargetSignal::constant(random_vector(rng, d)), TargetSignal::constant(Vec::Zero(2)), 0.4);
    const QuadraticTracking shared(TargetSignal::constant(random_vector(rng, d)), TargetSignal::constant(Vec::Zero(3)), 0.4);
    SurrogateProblem prob;
    prob.stack = &stack;
    prob.self = 1;
    prob.scope = joint ? CostScope::kJoint : CostScope::kOwn;
    prob.cost = joint ? static_cast<const CostOracle*>(&shared) : &own;
    prob.channels = {{random_matrix(rng, d, 1), random_matrix(rng, 1, d, 0.1), random_history(rng, 1, H, 1, d)[0]},
                     {random_matrix(rng, d, 2), random_matrix(rng, 2, d, 0.1), random_history(rng, 1, H, 2, d)[0]}};
    for (int l = 0; l <= 2 * H; ++l) prob.dist.push_back(random_vector(rng, d));
    const Vec g = surrogate_loss(prob).grad.flatten();
    Vec fd(g.size());
    const Vec m0 = prob.channels[1].M.flatten();
    for (Eigen::Index e = 0; e < m0.size(); ++e) {
      SurrogateProblem p = prob;
      Vec m = m0;
      m(e) += 1e-6;
      p.channels[1].M = DacParams::unflatten(m, H, 2, d);
      const double up = surrogate_value(p);
      m(e) -= 2e-6;
      p.channels[1].M = DacParams::unflatten(m, H, 2, d);
      fd(e) = (up - surrogate_value(p)) / 2e-6;
    }
    EXPECT_LE((g - fd).norm(), 1e-6 * (1 + fd.norm()));
    const auto all = surrogate_grad_all(prob);
    EXPECT_LE((all[1].flatten() - g).norm(), 1e-12 * (1 + g.norm()));
  }
}

TEST(Surrogate, WindowedLossMatchesStationaryWhenParametersAreFixed) {
  Rng rng(6);
  const int d = 2, H = 2;
  const TransferStack stack(random_matrix(rng, d, d, 0.4), H);
  const QuadraticTracking cost(TargetSignal::constant(random_vector(rng, d)), TargetSignal::constant(Vec::Zero(1)), 0.3);
  const Mat B = random_matrix(rng, d, 1), K = random_matrix(rng, 1, d, 0.1);
  const DacParams M = random_history(rng, 1, H, 1, d)[0];
  std::vector<Vec> dist;
  for (int l = 0; l <= 2 * H; ++l) dist.push_back(random_vector(rng, d));
  SurrogateProblem sp;
  sp.stack = &stack;
  sp.channels = {{B, K, M}};
  sp.cost = &cost;
  sp.dist = dist;
  WindowedProblem wp;
  wp.stack = &stack;
  wp.windows = {{B, std::vector<DacParams>(H + 2, M)}};
  wp.K = {K};
  wp.cost = &cost;
  wp.dist = dist;
  EXPECT_NEAR(windowed_surrogate(wp).loss, surrogate_value(sp), 1e-12);
}
