#pragma once

#include <cmath>
#include <memory>

#include "fnl/errors.hpp"

namespace fnl {

/// Time-dependent lower/upper solution bounds a(t) <= u <= b(t).
///
/// The exponential kind applies the decay/growth law with rate n*L1, split by
/// the sign of the initial bound: a(t) = a0 e^{-nL1 t} for a0 >= 0 and
/// a0 e^{+nL1 t} otherwise; b(t) = b0 e^{+nL1 t} for b0 >= 0 and
/// b0 e^{-nL1 t} otherwise.  Both bounds move monotonically away from the
/// initial band's interior, so [a0,b0] ⊆ [a(t),b(t)] for t >= 0.
///
/// The perturbed kind widens the initial values by eps (a0-eps, b0+eps) while
/// keeping the sign split on the unperturbed a0, b0.
///
/// The piecewise kind is a staircase envelope of another envelope: constant
/// on steps [kh,(k+1)h), taking the minimum of a and the maximum of b over
/// each step (endpoint-inclusive sampling), hence a_h <= a and b_h >= b.
class BoundsEnvelope {
 public:
  enum class Kind { Constant, Exponential, Perturbed, Piecewise };

  static BoundsEnvelope constant(double a0, double b0) {
    check(a0, b0);
    BoundsEnvelope e;
    e.kind_ = Kind::Constant;
    e.a0_ = a0;
    e.b0_ = b0;
    return e;
  }

  static BoundsEnvelope exponential(double a0, double b0, double L1, int n) {
    check(a0, b0);
    if (L1 < 0 || n < 1) throw PreconditionError("envelope: need L1 >= 0 and n >= 1");
    BoundsEnvelope e;
    e.kind_ = Kind::Exponential;
    e.a0_ = a0;
    e.b0_ = b0;
    e.rate_ = n * L1;
    return e;
  }

  static BoundsEnvelope perturbed(double a0, double b0, double L1, int n, double eps) {
    if (eps < 0) throw PreconditionError("envelope: need eps >= 0");
    BoundsEnvelope e = exponential(a0, b0, L1, n);
    e.kind_ = Kind::Perturbed;
    e.eps_ = eps;
    return e;
  }

  static BoundsEnvelope piecewise(const BoundsEnvelope& base, double h, int samples = 65) {
    if (!(h > 0)) throw PreconditionError("envelope: step width must be positive");
    if (samples < 65) samples = 65;
    BoundsEnvelope e;
    e.kind_ = Kind::Piecewise;
    e.base_ = std::make_shared<BoundsEnvelope>(base);
    e.step_ = h;
    e.samples_ = samples;
    return e;
  }

  Kind kind() const { return kind_; }
  double step_width() const { return step_; }

  double a(double t) const {
    switch (kind_) {
      case Kind::Constant:
        return a0_;
      case Kind::Exponential:
        return decayed_lower(a0_, t);
      case Kind::Perturbed:
        // Sign split stays on the unperturbed a0.
        return a0_ >= 0 ? (a0_ - eps_) * std::exp(-rate_ * t) : (a0_ - eps_) * std::exp(rate_ * t);
      case Kind::Piecewise: {
        auto [lo, hi] = step_range(t);
        double m = base_->a(lo);
        for (int i = 1; i < samples_; ++i)
          m = std::min(m, base_->a(lo + (hi - lo) * i / (samples_ - 1)));
        return m;
      }
    }
    return a0_;
  }

  double b(double t) const {
    switch (kind_) {
      case Kind::Constant:
        return b0_;
      case Kind::Exponential:
        return grown_upper(b0_, t);
      case Kind::Perturbed:
        return b0_ >= 0 ? (b0_ + eps_) * std::exp(rate_ * t) : (b0_ + eps_) * std::exp(-rate_ * t);
      case Kind::Piecewise: {
        auto [lo, hi] = step_range(t);
        double m = base_->b(lo);
        for (int i = 1; i < samples_; ++i)
          m = std::max(m, base_->b(lo + (hi - lo) * i / (samples_ - 1)));
        return m;
      }
    }
    return b0_;
  }

 private:
  static void check(double a0, double b0) {
    if (!(a0 <= b0)) throw PreconditionError("envelope: need a0 <= b0");
  }
  double decayed_lower(double v, double t) const {
    return v >= 0 ? v * std::exp(-rate_ * t) : v * std::exp(rate_ * t);
  }
  double grown_upper(double v, double t) const {
    return v >= 0 ? v * std::exp(rate_ * t) : v * std::exp(-rate_ * t);
  }
  std::pair<double, double> step_range(double t) const {
    double k = std::floor(std::max(0.0, t) / step_);
    return {k * step_, (k + 1) * step_};
  }

  Kind kind_ = Kind::Constant;
  double a0_ = 0, b0_ = 0, rate_ = 0, eps_ = 0;
  std::shared_ptr<BoundsEnvelope> base_;
  double step_ = 0;
  int samples_ = 65;
};

}  // namespace fnl
