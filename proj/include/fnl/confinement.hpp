#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fnl/funnel.hpp"
#include "json.hpp"

namespace fnl {

/// Radial attraction profile psi(d); the drift toward a control point xi is
/// v(x) = psi(|x - xi|) * (x - xi), so confinement wants psi < 0.
struct RadialProfile {
  enum class Kind { Constant, PowerLaw, Table };
  Kind kind = Kind::Constant;
  double value = -1.0;              // Constant
  double coeff = -1.0, exponent = 0;  // PowerLaw: coeff * d^exponent
  std::vector<double> xs, ys;       // Table: linear interpolation, clamped ends

  double operator()(double d) const;

  static RadialProfile constant(double v) {
    RadialProfile p;
    p.kind = Kind::Constant;
    p.value = v;
    return p;
  }
  static RadialProfile power_law(double coeff, double exponent) {
    RadialProfile p;
    p.kind = Kind::PowerLaw;
    p.coeff = coeff;
    p.exponent = exponent;
    return p;
  }
  static RadialProfile table(std::vector<double> xs, std::vector<double> ys);
};

/// Source perturbation G(u) entering the flux as f = v*u + G(u); only its
/// derivative bound c reaches the velocity sets.  G itself matters for the
/// PDE cross-check.
struct SourceTerm {
  enum class Kind { Zero, Linear, Sine };
  Kind kind = Kind::Zero;
  double c = 0;       // bound on |G'|
  Vec2 dir{1, 0};     // direction of the vector-valued G

  Vec2 value(double u) const;       // G(u), with G(0) = 0 and |G'| <= c
  Vec2 derivative(double u) const;  // G'(u)
};

struct ConfinementScenario {
  int n = 2;  // ambient dimension for the condition (simulation runs in 2D)
  RadialProfile psi;
  SourceTerm source;
  double R = 1;        // control circle radius
  double Rminus = 1;   // inner radius of the protected band
  double Rplus = 2;    // outer radius: supports must stay inside B(0, Rplus)
  double T = 5;
  int cells = 128;
  double box_halfwidth = 0;  // 0: auto from Rplus
  double omega = 0;          // rotating control rate; 0: heuristic default

  static ConfinementScenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Left-hand side of the confinement condition at radius Rstar: the averaged
/// inward flux of the attraction field over the sphere directions,
///   Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2)) *
///   Int_0^pi psi(sqrt(R^2 + Rstar^2 - 2 R Rstar cos(th)))
///          * (Rstar - R cos(th)) * sin(th)^{n-2} dth,
/// evaluated with Gauss-Legendre quadrature.
double condition_lhs(const std::function<double(double)>& psi, double n, double R, double Rstar,
                     int nodes = 64);

struct ConditionVerdict {
  bool satisfied = false;
  double margin = 0;       // -c - max_lhs (positive when satisfied)
  double max_lhs = 0;
  double worst_rstar = 0;  // argmax of the lhs over [Rminus, Rplus]
};

/// Scan Rstar over [Rminus, Rplus] (at least 101 samples) and compare the
/// worst lhs against -c.
ConditionVerdict check_condition(const ConfinementScenario& sc, int samples = 101);

/// Velocity set of the controlled flux at (t, x): the drift
/// psi(|x-xi|)(x-xi) fattened by the ball B(0, c) (a polygon with nverts
/// vertices; a singleton when c = 0).
VelocitySet controlled_velocity_set(const ConfinementScenario& sc, Vec2 xi, double t, Vec2 x,
                                    int nverts = 32);

struct ControlPath {
  std::function<Vec2(double)> xi;
  std::string description;
};

/// xi(t) = R (cos wt, sin wt).
ControlPath rotating_control(double R, double omega);

/// Default rotation rate: >= 3 revolutions per attraction time 1 / |psi(R)|.
double default_control_rate(const ConfinementScenario& sc);

/// Velocity sets of the controlled dynamics as a propagation field.
class ControlledProvider : public VelocityProvider {
 public:
  ControlledProvider(const ConfinementScenario& sc, const ControlPath& control,
                     double box_halfwidth, int nverts = 32);
  int dim() const override { return 2; }
  VelocitySet at(double t, Vec2 x) const override;
  bool separable() const override { return true; }
  VelocitySet shape(double) const override { return ball_; }
  Vec2 drift(double t, Vec2 x) const override;
  double speed_bound() const override { return speed_; }

 private:
  const ConfinementScenario& sc_;
  ControlPath control_;
  VelocitySet ball_;
  double speed_ = 0;
};

struct ConfinementResult {
  bool confined = false;   // every slice inside B(0, Rplus) + 2 cells
  double max_radius = 0;   // largest |x| over all slice cells
  double worst_time = 0;
  bool condition_ok = false;  // verdict of check_condition (warn-only)
  Funnel funnel;
};

/// Propagate the initial set under the controlled velocity sets and check it
/// stays inside B(0, Rplus).  K0 must sit inside B(0, Rminus).  A failing
/// confinement condition does not abort the run; it is reported.
ConfinementResult simulate_confinement(const ConfinementScenario& sc, const ControlPath& control,
                                       const GridSet& k0, double T, double dt = 0);

/// Flux of the controlled conservation law f(t,x,u) = v(t,x)u + G(u) for the
/// PDE cross-check of a confinement run.  Its wave speed does not depend on
/// the u range: d/du f = v(t,x) + G'(u) with |G'| <= c.
FluxModel controlled_flux(const ConfinementScenario& sc, const ControlPath& control,
                          double box_halfwidth);

}  // namespace fnl
