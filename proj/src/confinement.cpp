#include "fnl/confinement.hpp"

#include <algorithm>
#include <cmath>

namespace fnl {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
struct Quadrature {
  std::vector<double> x, w;
};

Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.x.resize(n);
  q.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    q.x[i] = -z;
    q.x[n - 1 - i] = z;
    q.w[i] = q.w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
  }
  return q;
}

const Quadrature& cached_quadrature(int n) {
  static Quadrature q64 = gauss_legendre(64);
  static Quadrature q128 = gauss_legendre(128);
  if (n == 64) return q64;
  if (n == 128) return q128;
  thread_local Quadrature q;
  q = gauss_legendre(n);
  return q;
}

}  // namespace

double RadialProfile::operator()(double d) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::PowerLaw:
      return coeff * std::pow(std::max(d, 1e-300), exponent);
    case Kind::Table: {
      if (d <= xs.front()) return ys.front();
      if (d >= xs.back()) return ys.back();
      auto it = std::upper_bound(xs.begin(), xs.end(), d);
      const size_t i = static_cast<size_t>(it - xs.begin());
      const double t = (d - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] * (1 - t) + ys[i] * t;
    }
  }
  return value;
}

RadialProfile RadialProfile::table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 2 || xs.size() != ys.size())
    throw PreconditionError("psi table: need matching xs/ys with at least two rows");
  if (!std::is_sorted(xs.begin(), xs.end()))
    throw PreconditionError("psi table: xs must increase");
  RadialProfile p;
  p.kind = Kind::Table;
  p.xs = std::move(xs);
  p.ys = std::move(ys);
  return p;
}

Vec2 SourceTerm::value(double u) const {
  switch (kind) {
    case Kind::Zero:
      return {0, 0};
    case Kind::Linear:
      return (c * u) * dir;
    case Kind::Sine:
      return (c * std::sin(u)) * dir;
  }
  return {0, 0};
}

Vec2 SourceTerm::derivative(double u) const {
  switch (kind) {
    case Kind::Zero:
      return {0, 0};
    case Kind::Linear:
      return c * dir;
    case Kind::Sine:
      return (c * std::cos(u)) * dir;
  }
  return {0, 0};
}

double condition_lhs(const std::function<double(double)>& psi, double n, double R, double Rstar,
                     int nodes) {
  if (!(n >= 2)) throw PreconditionError("condition_lhs: need n >= 2");
  if (!(R > 0) || !(Rstar > 0)) throw PreconditionError("condition_lhs: need R, Rstar > 0");
  const Quadrature& q = cached_quadrature(nodes);
  // Map [-1,1] -> [0,pi].
  double integral = 0;
  for (size_t i = 0; i < q.x.size(); ++i) {
    const double th = 0.5 * M_PI * (q.x[i] + 1.0);
    const double sinth = std::sin(th), costh = std::cos(th);
    const double dist = std::sqrt(std::max(0.0, R * R + Rstar * Rstar - 2 * R * Rstar * costh));
    const double sinpow = n == 2 ? 1.0 : std::pow(sinth, n - 2.0);
    integral += q.w[i] * psi(dist) * (Rstar - R * costh) * sinpow;
  }
  integral *= 0.5 * M_PI;
  const double prefactor =
      std::exp(std::lgamma(0.5 * n) - std::lgamma(0.5 * (n - 1))) / std::sqrt(M_PI);
  return prefactor * integral;
}

ConditionVerdict check_condition(const ConfinementScenario& sc, int samples) {
  if (!(sc.Rminus <= sc.Rplus))
    throw PreconditionError("check_condition: need Rminus <= Rplus");
  samples = std::max(samples, 101);
  ConditionVerdict v;
  v.max_lhs = -1e300;
  auto psi = [&](double d) { return sc.psi(d); };
  for (int i = 0; i < samples; ++i) {
    const double rstar =
        sc.Rminus + (sc.Rplus - sc.Rminus) * (samples == 1 ? 0.0 : i / double(samples - 1));
    const double lhs = condition_lhs(psi, sc.n, sc.R, rstar);
    if (lhs > v.max_lhs) {
      v.max_lhs = lhs;
      v.worst_rstar = rstar;
    }
  }
  v.satisfied = v.max_lhs < -sc.source.c;
  v.margin = -sc.source.c - v.max_lhs;
  return v;
}

VelocitySet controlled_velocity_set(const ConfinementScenario& sc, Vec2 xi, double t, Vec2 x,
                                    int nverts) {
  (void)t;
  Vec2 d = x - xi;
  Vec2 center = sc.psi(norm(d)) * d;
  const double c = sc.source.c;
  if (c <= 0) return VelocitySet::singleton(center, 2);
  std::vector<Vec2> pts;
  nverts = std::max(8, nverts);
  pts.reserve(nverts);
  const double rr = c / std::cos(M_PI / nverts);  // circumscribed: contains B(0,c)
  for (int i = 0; i < nverts; ++i) {
    const double ang = 2 * M_PI * i / nverts;
    pts.push_back(center + Vec2{rr * std::cos(ang), rr * std::sin(ang)});
  }
  return VelocitySet::polygon(std::move(pts));
}

ControlPath rotating_control(double R, double omega) {
  ControlPath c;
  c.xi = [R, omega](double t) { return Vec2{R * std::cos(omega * t), R * std::sin(omega * t)}; };
  c.description = "rotating(R=" + std::to_string(R) + ", omega=" + std::to_string(omega) + ")";
  return c;
}

double default_control_rate(const ConfinementScenario& sc) {
  const double attraction = std::abs(sc.psi(sc.R));
  return 6.0 * M_PI * std::max(attraction, 1e-6);
}

ControlledProvider::ControlledProvider(const ConfinementScenario& sc, const ControlPath& control,
                                       double box_halfwidth, int nverts)
    : sc_(sc), control_(control) {
  const double c = sc.source.c;
  if (c <= 0) {
    ball_ = VelocitySet::singleton({0, 0}, 2);
  } else {
    std::vector<Vec2> pts;
    nverts = std::max(8, nverts);
    const double rr = c / std::cos(M_PI / nverts);
    for (int i = 0; i < nverts; ++i) {
      const double ang = 2 * M_PI * i / nverts;
      pts.push_back({rr * std::cos(ang), rr * std::sin(ang)});
    }
    ball_ = VelocitySet::polygon(std::move(pts));
  }
  // Largest |psi(d)*d| for d up to the box diagonal plus the control radius.
  const double dmax = std::sqrt(2.0) * box_halfwidth + sc.R;
  double worst = 0;
  for (int i = 0; i <= 2048; ++i) {
    const double d = dmax * i / 2048.0;
    worst = std::max(worst, std::abs(sc.psi(d)) * d);
  }
  speed_ = worst * 1.02 + c;  // headroom for off-sample profiles
}

VelocitySet ControlledProvider::at(double t, Vec2 x) const {
  return ball_.translated(drift(t, x));
}

Vec2 ControlledProvider::drift(double t, Vec2 x) const {
  Vec2 d = x - control_.xi(t);
  return sc_.psi(norm(d)) * d;
}

ConfinementResult simulate_confinement(const ConfinementScenario& sc, const ControlPath& control,
                                       const GridSet& k0, double T, double dt) {
  const Grid& g = k0.grid;
  if (g.dim != 2) throw PreconditionError("simulate_confinement: 2D grids only");
  if (k0.empty()) throw EmptySetError("simulate_confinement: empty initial set");
  // Initial set must sit inside the protected band.
  for (int i = 0; i < g.cell_count(); ++i)
    if (k0.mask[i] && norm(g.center(i)) > sc.Rminus + 1e-12)
      throw PreconditionError("simulate_confinement: initial set leaves B(0, Rminus)");

  double halfwidth = 0;
  for (int ax = 0; ax < 2; ++ax) {
    halfwidth = std::max(halfwidth, std::abs(g.origin[ax]));
    halfwidth = std::max(halfwidth, std::abs(g.origin[ax] + g.spacing * g.extents[ax]));
  }
  ControlledProvider provider(sc, control, halfwidth);
  const double step = dt > 0 ? dt : g.spacing / provider.speed_bound();

  ConfinementResult res;
  res.condition_ok = check_condition(sc).satisfied;
  res.funnel = propagate_funnel(provider, k0, 0.0, T, step, Direction::Forward);

  const double limit = sc.Rplus + 2.0 * g.spacing;
  for (size_t s = 0; s < res.funnel.slices.size(); ++s) {
    const GridSet& slice = res.funnel.slices[s];
    for (int i = 0; i < g.cell_count(); ++i)
      if (slice.mask[i]) {
        const double r = norm(g.center(i));
        if (r > res.max_radius) {
          res.max_radius = r;
          res.worst_time = res.funnel.times[s];
        }
      }
  }
  res.confined = res.max_radius <= limit;
  return res;
}

FluxModel controlled_flux(const ConfinementScenario& sc, const ControlPath& control,
                          double box_halfwidth) {
  FluxModel m;
  m.name = "controlled";
  m.dim = 2;
  RadialProfile psi = sc.psi;
  SourceTerm src = sc.source;
  auto xi = control.xi;
  m.flux = [psi, src, xi](double t, Vec2 x, double u) {
    Vec2 d = x - xi(t);
    return (psi(norm(d)) * u) * d + src.value(u);
  };
  m.dflux_du = [psi, src, xi](double t, Vec2 x, double u) {
    Vec2 d = x - xi(t);
    return psi(norm(d)) * d + src.derivative(u);
  };
  // Lipschitz modulus of x -> psi(|x-xi|)(x-xi): estimated numerically on
  // radii up to the box diagonal (exact for constant psi).
  const double dmax = std::sqrt(2.0) * box_halfwidth + sc.R;
  double lip = 0, speed = 0;
  double prev = sc.psi(0.0) * 0.0;
  const int ns = 2048;
  for (int i = 1; i <= ns; ++i) {
    const double d = dmax * i / ns;
    const double cur = sc.psi(d) * d;
    lip = std::max(lip, std::abs(cur - prev) / (dmax / ns));
    speed = std::max(speed, std::abs(cur));
    prev = cur;
  }
  m.lip_x = lip * 1.05;
  m.speed_bound = speed * 1.02 + sc.source.c;
  m.satisfies_f4 = true;
  m.separable = true;
  m.drift = [psi, xi](double t, Vec2 x) {
    Vec2 d = x - xi(t);
    return psi(norm(d)) * d;
  };
  m.ushape = [src](double, double u) { return src.derivative(u); };
  return m;
}

ConfinementScenario ConfinementScenario::from_json(const nlohmann::json& j) {
  ConfinementScenario sc;
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key))
      throw PreconditionError(std::string("scenario: missing required key \"") + key + "\"");
    return j.at(key);
  };
  sc.n = need("n").get<int>();
  if (sc.n != 2 && sc.n != 3) throw PreconditionError("scenario: key \"n\" must be 2 or 3");

  const auto& jp = need("psi");
  const std::string pk = jp.at("kind").get<std::string>();
  const auto& pp = jp.contains("params") ? jp.at("params") : nlohmann::json::object();
  if (pk == "constant")
    sc.psi = RadialProfile::constant(pp.at("value").get<double>());
  else if (pk == "powerlaw")
    sc.psi = RadialProfile::power_law(pp.at("coeff").get<double>(),
                                      pp.at("exponent").get<double>());
  else if (pk == "table")
    sc.psi = RadialProfile::table(pp.at("xs").get<std::vector<double>>(),
                                  pp.at("ys").get<std::vector<double>>());
  else
    throw PreconditionError("scenario: key \"psi.kind\" must be constant|powerlaw|table");

  const auto& jg = need("G");
  const std::string gk = jg.at("kind").get<std::string>();
  if (gk == "zero")
    sc.source.kind = SourceTerm::Kind::Zero;
  else if (gk == "linear")
    sc.source.kind = SourceTerm::Kind::Linear;
  else if (gk == "sine")
    sc.source.kind = SourceTerm::Kind::Sine;
  else
    throw PreconditionError("scenario: key \"G.kind\" must be zero|linear|sine");
  sc.source.c = jg.at("c").get<double>();
  if (sc.source.c < 0) throw PreconditionError("scenario: key \"G.c\" must be >= 0");

  sc.R = need("R").get<double>();
  sc.Rminus = need("Rminus").get<double>();
  sc.Rplus = need("Rplus").get<double>();
  if (!(sc.R > 0) || !(sc.Rminus > 0) || !(sc.Rminus <= sc.Rplus))
    throw PreconditionError("scenario: need R > 0 and 0 < Rminus <= Rplus");
  sc.T = j.value("T", 5.0);
  if (j.contains("grid")) {
    sc.cells = j.at("grid").value("cells", 128);
    sc.box_halfwidth = j.at("grid").value("half_extent", 0.0);
  }
  if (j.contains("control")) {
    const auto& jc = j.at("control");
    if (jc.value("kind", std::string("rotating")) != "rotating")
      throw PreconditionError("scenario: key \"control.kind\" must be rotating");
    sc.omega = jc.value("omega", 0.0);
  }
  return sc;
}

nlohmann::json ConfinementScenario::to_json() const {
  nlohmann::json jp;
  switch (psi.kind) {
    case RadialProfile::Kind::Constant:
      jp = {{"kind", "constant"}, {"params", {{"value", psi.value}}}};
      break;
    case RadialProfile::Kind::PowerLaw:
      jp = {{"kind", "powerlaw"}, {"params", {{"coeff", psi.coeff}, {"exponent", psi.exponent}}}};
      break;
    case RadialProfile::Kind::Table:
      jp = {{"kind", "table"}, {"params", {{"xs", psi.xs}, {"ys", psi.ys}}}};
      break;
  }
  const char* gk = source.kind == SourceTerm::Kind::Zero
                       ? "zero"
                       : (source.kind == SourceTerm::Kind::Linear ? "linear" : "sine");
  return nlohmann::json{{"n", n},
                        {"psi", jp},
                        {"G", {{"kind", gk}, {"c", source.c}}},
                        {"R", R},
                        {"Rminus", Rminus},
                        {"Rplus", Rplus},
                        {"control", {{"kind", "rotating"}, {"omega", omega}}},
                        {"T", T},
                        {"grid", {{"cells", cells}, {"half_extent", box_halfwidth}}}};
}

}  // namespace fnl
