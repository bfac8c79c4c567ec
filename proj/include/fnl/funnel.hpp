#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fnl/geometry.hpp"
#include "fnl/velocity.hpp"

namespace fnl {

enum class Direction { Forward, Backward };

/// Reachable-set tube of a differential inclusion, stored as one grid set per
/// time.  Times ascend; forward funnels start at the seed set, backward ones
/// end at it.  Slices carry the sub-cell level raster used to propagate them
/// (mask == level <= 0), so refining operations keep sub-cell accuracy.
struct Funnel {
  Direction direction = Direction::Forward;
  std::vector<double> times;
  std::vector<GridSet> slices;

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  const GridSet& slice_at(double t, double tol = 1e-9) const {
    for (size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - t) <= tol) return slices[i];
    throw PreconditionError("funnel: no slice at requested time");
  }
};

/// Velocity sets F(t,x) that drive a propagation.  When `separable` is true,
/// at(t,x) == shape(t) translated by drift(t,x) and propagation hulls the
/// shape once per step.
class VelocityProvider {
 public:
  virtual ~VelocityProvider() = default;
  virtual int dim() const = 0;
  virtual VelocitySet at(double t, Vec2 x) const = 0;
  virtual bool separable() const { return false; }
  virtual VelocitySet shape(double t) const { return at(t, Vec2{0, 0}); }
  virtual Vec2 drift(double, Vec2) const { return {0, 0}; }
  virtual double speed_bound() const = 0;

  /// >= 0 iff F(t,x) = B(0, r) for all (t,x).  Balls admit an exact level
  /// update (distance calculus: the level just drops by r*dt), so propagation
  /// takes that path instead of resampling every step.
  virtual double isotropic_radius() const { return -1; }

  /// True iff F(t,x) = {v} for all (t,x), writing v.  Constant translations
  /// are sampled once per slice straight from the seed level, which keeps the
  /// interpolation error from compounding across steps.
  virtual bool constant_velocity(Vec2&) const { return false; }
};

/// F(t,x) = hull of ∂f/∂u(t, x, [a(t), b(t)]).
class FluxProvider : public VelocityProvider {
 public:
  FluxProvider(const FluxModel& flux, const BoundsEnvelope& env, int nsamp = 64)
      : flux_(flux), env_(env), nsamp_(nsamp) {}
  int dim() const override { return flux_.dim; }
  VelocitySet at(double t, Vec2 x) const override {
    return velocity_set(flux_, t, x, env_, nsamp_);
  }
  bool separable() const override { return flux_.separable; }
  VelocitySet shape(double t) const override;
  Vec2 drift(double t, Vec2 x) const override { return flux_.drift(t, x); }
  double speed_bound() const override { return flux_.speed_bound; }

 private:
  const FluxModel& flux_;
  const BoundsEnvelope& env_;
  int nsamp_;
};

/// F = closed ball B(0, c) (interval [-c, c] in 1D).
class IsotropicProvider : public VelocityProvider {
 public:
  IsotropicProvider(double c, int dim, int nverts = 64) : c_(c), dim_(dim), nverts_(nverts) {}
  int dim() const override { return dim_; }
  VelocitySet at(double t, Vec2) const override { return shape(t); }
  bool separable() const override { return true; }
  VelocitySet shape(double) const override;
  double speed_bound() const override { return c_; }
  double isotropic_radius() const override { return c_; }

 private:
  double c_;
  int dim_;
  int nverts_;
};

/// F = {c}: single velocity, rigid translation.
class SingletonProvider : public VelocityProvider {
 public:
  SingletonProvider(Vec2 c, int dim) : c_(c), dim_(dim) {}
  int dim() const override { return dim_; }
  VelocitySet at(double, Vec2) const override { return VelocitySet::singleton(c_, dim_); }
  bool separable() const override { return true; }
  VelocitySet shape(double) const override { return VelocitySet::singleton(c_, dim_); }
  double speed_bound() const override { return norm(c_); }
  bool constant_velocity(Vec2& v) const override {
    v = c_;
    return true;
  }

 private:
  Vec2 c_;
  int dim_;
};

/// Propagate the integral funnel of the provider's velocity sets from seed K
/// over [tau0, tau].  dt is an upper bound on the uniform step actually used
/// (the span is divided evenly); it must satisfy dt * speed <= spacing.
/// Backward funnels run the reversed field \hat F(t,y) = -F(tau+tau0-t, y)
/// forward and re-index the slices, so one code path serves both directions.
Funnel propagate_funnel(const VelocityProvider& field, const GridSet& seed, double tau0,
                        double tau, double dt, Direction direction);

/// Convenience overload: velocity sets from a flux and an envelope.
Funnel propagate_funnel(const FluxModel& flux, const GridSet& seed, const BoundsEnvelope& env,
                        double tau0, double tau, double dt, Direction direction,
                        int nsamp = 64);

struct ConvergenceRow {
  double step_width = 0;      // envelope staircase width
  double max_sym_diff = 0;    // worst slice-wise symmetric difference
  double final_sym_diff = 0;  // symmetric difference at the final slice
};

/// Propagate with staircase envelopes of widths `steps` and report symmetric
/// difference against the funnel driven by the continuous envelope.
std::vector<ConvergenceRow> funnel_convergence(const FluxModel& flux, const GridSet& seed,
                                               const BoundsEnvelope& env, double tau0,
                                               double tau, double dt,
                                               const std::vector<double>& steps,
                                               Direction direction = Direction::Forward,
                                               int nsamp = 64);

struct ResidualStats {
  int evaluated = 0;
  int skipped = 0;  // degenerate normals (|zeta| too small)
  double median = 0;
  double mean = 0;
  double p90 = 0;
  double max = 0;
};

/// Residual of the lateral-boundary normal condition: |theta + H(t,x,zeta)|
/// for forward funnels, |-theta + H(t,x,-zeta)| backward, where (theta,zeta)
/// comes from central differences of the space-time signed distance of the
/// funnel body (time as an extra axis with its own spacing) and zeta is
/// normalized.  Evaluated on boundary cells strictly between the end times.
ResidualStats proximal_residual(const Funnel& funnel, const VelocityProvider& field);
ResidualStats proximal_residual(const Funnel& funnel, const FluxModel& flux,
                                const BoundsEnvelope& env, int nsamp = 64);

/// Persistence: a directory with one mask raster and one level raster per
/// slice plus an index.json naming direction, times and the grid.
void save_funnel(const Funnel& funnel, const std::string& dir);
Funnel load_funnel(const std::string& dir);

}  // namespace fnl
