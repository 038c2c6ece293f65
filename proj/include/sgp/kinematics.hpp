#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sgp/common.hpp"

namespace sgp {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// A joint configuration: n joint angles in radians. Kept as a plain vector;
// all operations validate lengths against the robot model they are given.
using JointConfig = std::vector<double>;

inline double joint_distance(const JointConfig& a, const JointConfig& b) {
  if (a.size() != b.size())
    throw InvalidArgumentError("joint_distance: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

inline double joint_distance_inf(const JointConfig& a, const JointConfig& b) {
  if (a.size() != b.size())
    throw InvalidArgumentError("joint_distance_inf: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ============================================================================
// Planar serial chain. Base at the origin, angles accumulate along the chain.
// Link geometry for collision purposes is a swept disk of radius link_radius.
// ============================================================================

struct RobotModel {
  std::vector<double> link_lengths;
  double link_radius = 0.05;
  std::vector<double> joint_lo;  // per joint, radians
  std::vector<double> joint_hi;

  std::size_t dof() const { return link_lengths.size(); }

  double reach() const {
    double sum = 0.0;
    for (double l : link_lengths) sum += l;
    return sum;
  }

  static RobotModel chain(std::vector<double> links, double radius = 0.05,
                          double lo = -kTwoPi, double hi = kTwoPi) {
    RobotModel m;
    m.link_lengths = std::move(links);
    m.link_radius = radius;
    m.joint_lo.assign(m.link_lengths.size(), lo);
    m.joint_hi.assign(m.link_lengths.size(), hi);
    m.validate();
    return m;
  }

  void validate() const {
    if (link_lengths.empty())
      throw InvalidArgumentError("RobotModel: need at least 1 joint");
    for (double l : link_lengths)
      if (!(l > 0.0)) throw InvalidArgumentError("RobotModel: link lengths must be positive");
    if (!(link_radius >= 0.0))
      throw InvalidArgumentError("RobotModel: link_radius must be nonnegative");
    if (joint_lo.size() != dof() || joint_hi.size() != dof())
      throw InvalidArgumentError("RobotModel: joint limit size mismatch");
    for (std::size_t i = 0; i < dof(); ++i)
      if (!(joint_lo[i] < joint_hi[i]))
        throw InvalidArgumentError("RobotModel: joint_lo must be < joint_hi");
  }

  void require_config(const JointConfig& q) const {
    if (q.size() != dof())
      throw InvalidArgumentError("config has " + std::to_string(q.size()) +
                                 " joints, robot has " + std::to_string(dof()));
    for (double v : q)
      if (!std::isfinite(v)) throw InvalidArgumentError("config contains non-finite value");
  }

  JointConfig clamp(JointConfig q) const {
    require_config(q);
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] = std::min(std::max(q[i], joint_lo[i]), joint_hi[i]);
    return q;
  }

  bool within_limits(const JointConfig& q) const {
    require_config(q);
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] < joint_lo[i] || q[i] > joint_hi[i]) return false;
    return true;
  }
};

// Weights of the two feature blocks used by the reconstruction metric:
// alpha on the workspace (kinematic) block, 1-alpha on the encoded joint block
// with `levels` trigonometric octaves.
struct FeatureParams {
  double alpha = 0.5;
  int levels = 2;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw InvalidArgumentError("FeatureParams: alpha must be in [0,1]");
    if (levels < 0) throw InvalidArgumentError("FeatureParams: levels must be >= 0");
  }
};

// ============================================================================
// Forward kinematics
// ============================================================================

// Base point (0,0) followed by each link endpoint; point k depends only on
// q[0..k-1], so errors at proximal joints displace more of the chain.
inline std::vector<Point2> forward_kinematics(const RobotModel& model,
                                              const JointConfig& q) {
  model.require_config(q);
  std::vector<Point2> pts(model.dof() + 1);
  pts[0] = {0.0, 0.0};
  double angle = 0.0;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    angle += q[i];
    pts[i + 1].x = pts[i].x + model.link_lengths[i] * std::cos(angle);
    pts[i + 1].y = pts[i].y + model.link_lengths[i] * std::sin(angle);
  }
  return pts;
}

// Flattened endpoint coordinates [p0x, p0y, p1x, p1y, ...]; the workspace
// feature block.
inline std::vector<double> fk_features(const RobotModel& model, const JointConfig& q) {
  const auto pts = forward_kinematics(model, q);
  std::vector<double> flat(2 * pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    flat[2 * i] = pts[i].x;
    flat[2 * i + 1] = pts[i].y;
  }
  return flat;
}

// Accumulates d(loss)/dq given d(loss)/d(fk_features) into dq (+=).
inline void fk_features_backprop(const RobotModel& model, const JointConfig& q,
                                 const std::vector<double>& dflat,
                                 std::vector<double>& dq) {
  model.require_config(q);
  const std::size_t n = model.dof();
  if (dflat.size() != 2 * (n + 1))
    throw InvalidArgumentError("fk_features_backprop: gradient size mismatch");
  if (dq.size() != n) throw InvalidArgumentError("fk_features_backprop: dq size mismatch");

  // d p_k / d q_j = sum_{i=j..k-1} L_i * (-sin a_i, cos a_i).  Regrouping over
  // links gives two suffix sums: S_i = sum of point gradients past link i,
  // then dq_j = sum_{i>=j} L_i * (-sin a_i * S_i.x + cos a_i * S_i.y).
  std::vector<double> angles(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += q[i];
    angles[i] = acc;
  }
  double sx = 0.0, sy = 0.0;  // suffix sums of point gradients
  std::vector<double> per_link(n);
  for (std::size_t i = n; i-- > 0;) {
    sx += dflat[2 * (i + 1)];
    sy += dflat[2 * (i + 1) + 1];
    per_link[i] = model.link_lengths[i] * (-std::sin(angles[i]) * sx + std::cos(angles[i]) * sy);
  }
  double tail = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    tail += per_link[j];
    dq[j] += tail;
  }
}

// ============================================================================
// Positional encoding of joint values
// ============================================================================

inline std::size_t positional_encode_size(std::size_t n, int levels) {
  return n * (2 * static_cast<std::size_t>(levels + 1) + 1);
}

// [q_0..q_{n-1}, then per joint: cos(2^j q), sin(2^j q) for j = 0..levels].
// The raw block is what disambiguates q from q + 2*pi; the trigonometric part
// alone is periodic.
inline std::vector<double> positional_encode(const JointConfig& q, int levels) {
  if (levels < 0) throw InvalidArgumentError("positional_encode: levels must be >= 0");
  for (double v : q)
    if (!std::isfinite(v)) throw InvalidArgumentError("positional_encode: non-finite input");
  const std::size_t n = q.size();
  std::vector<double> out;
  out.reserve(positional_encode_size(n, levels));
  for (double v : q) out.push_back(v);
  for (std::size_t i = 0; i < n; ++i) {
    double scale = 1.0;
    for (int j = 0; j <= levels; ++j) {
      out.push_back(std::cos(scale * q[i]));
      out.push_back(std::sin(scale * q[i]));
      scale *= 2.0;
    }
  }
  return out;
}

// Accumulates d(loss)/dq given d(loss)/d(encoding) into dq (+=).
inline void positional_encode_backprop(const JointConfig& q, int levels,
                                       const std::vector<double>& dfeat,
                                       std::vector<double>& dq) {
  const std::size_t n = q.size();
  if (dfeat.size() != positional_encode_size(n, levels))
    throw InvalidArgumentError("positional_encode_backprop: gradient size mismatch");
  if (dq.size() != n)
    throw InvalidArgumentError("positional_encode_backprop: dq size mismatch");
  for (std::size_t i = 0; i < n; ++i) dq[i] += dfeat[i];
  std::size_t k = n;
  for (std::size_t i = 0; i < n; ++i) {
    double scale = 1.0;
    for (int j = 0; j <= levels; ++j) {
      dq[i] += dfeat[k++] * (-scale * std::sin(scale * q[i]));
      dq[i] += dfeat[k++] * (scale * std::cos(scale * q[i]));
      scale *= 2.0;
    }
  }
}

// ============================================================================
// Feature-space reconstruction metric
// ============================================================================

// alpha * |fk(x) - fk(x_hat)|^2 + (1 - alpha) * |enc(x) - enc(x_hat)|^2.
// Symmetric, nonnegative, zero iff both feature blocks agree.
inline double feature_distance_sq(const JointConfig& x, const JointConfig& x_hat,
                                  const RobotModel& model, const FeatureParams& params) {
  params.validate();
  model.require_config(x);
  model.require_config(x_hat);
  double fk_term = 0.0;
  if (params.alpha > 0.0) {
    const auto fa = fk_features(model, x);
    const auto fb = fk_features(model, x_hat);
    for (std::size_t i = 0; i < fa.size(); ++i) {
      const double d = fa[i] - fb[i];
      fk_term += d * d;
    }
  }
  double joint_term = 0.0;
  if (params.alpha < 1.0) {
    const auto pa = positional_encode(x, params.levels);
    const auto pb = positional_encode(x_hat, params.levels);
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double d = pa[i] - pb[i];
      joint_term += d * d;
    }
  }
  return params.alpha * fk_term + (1.0 - params.alpha) * joint_term;
}

// Gradient of feature_distance_sq with respect to x_hat.
inline std::vector<double> feature_distance_grad(const JointConfig& x,
                                                 const JointConfig& x_hat,
                                                 const RobotModel& model,
                                                 const FeatureParams& params) {
  params.validate();
  model.require_config(x);
  model.require_config(x_hat);
  std::vector<double> dq(model.dof(), 0.0);
  if (params.alpha > 0.0) {
    const auto fa = fk_features(model, x);
    auto fb = fk_features(model, x_hat);
    for (std::size_t i = 0; i < fb.size(); ++i)
      fb[i] = 2.0 * params.alpha * (fb[i] - fa[i]);
    fk_features_backprop(model, x_hat, fb, dq);
  }
  if (params.alpha < 1.0) {
    const auto pa = positional_encode(x, params.levels);
    auto pb = positional_encode(x_hat, params.levels);
    for (std::size_t i = 0; i < pb.size(); ++i)
      pb[i] = 2.0 * (1.0 - params.alpha) * (pb[i] - pa[i]);
    positional_encode_backprop(x_hat, params.levels, pb, dq);
  }
  return dq;
}

}  // namespace sgp
