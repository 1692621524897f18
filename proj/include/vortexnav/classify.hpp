#pragma once

// Closed-form fate of every geodesic leaving r0 with initial angle alpha.
//
// Along an extremal p_theta is constant and p_r^2 = phi(r) = P(1/r^2) with
// P(X) = a X^2 + b X + c. The roots of P are the turning radii; the
// critical momentum p_theta* where the two roots merge at r = 2|mu|
// separates the geodesics falling into the vortex (set Lambda) from those
// escaping to infinity (set Theta). The separating geodesics (set Psi)
// spiral onto the invariant circle r = 2|mu|.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "flow.hpp"
#include "model.hpp"

namespace vortexnav {

inline constexpr double exceptional_tol = 1e-12;
inline constexpr double boundary_tol = 1e-6;

enum class Fate { ToVortex, ToInfinity, Separatrix, ReebCircle };
enum class GeodesicType { Hyperbolic, Elliptic, Exceptional };
enum class RadialProfile { StrictlyMonotone, OneOscillation, Constant };

inline const char* to_string(Fate f) {
  switch (f) {
    case Fate::ToVortex: return "to_vortex";
    case Fate::ToInfinity: return "to_infinity";
    case Fate::Separatrix: return "separatrix";
    case Fate::ReebCircle: return "reeb_circle";
  }
  return "?";
}

inline const char* to_string(GeodesicType g) {
  switch (g) {
    case GeodesicType::Hyperbolic: return "hyperbolic";
    case GeodesicType::Elliptic: return "elliptic";
    case GeodesicType::Exceptional: return "exceptional";
  }
  return "?";
}

inline const char* to_string(RadialProfile p) {
  switch (p) {
    case RadialProfile::StrictlyMonotone: return "strictly_monotone";
    case RadialProfile::OneOscillation: return "one_oscillation";
    case RadialProfile::Constant: return "constant";
  }
  return "?";
}

// The exceptional geodesics, where H(alpha) = 0, i.e. sin(alpha) = -r0/mu.
struct AbnormalAngles {
  int count = 0;
  std::array<double, 2> alpha{0.0, 0.0};
};

inline AbnormalAngles abnormal_angles(double r0, double mu) {
  if (!(r0 > 0.0)) throw InvalidArgument("abnormal_angles: r0 must be positive");
  AbnormalAngles out;
  switch (drift_strength_at_radius(r0, mu)) {
    case DriftStrength::Weak: return out;
    case DriftStrength::Moderate:
      out.count = 1;
      out.alpha[0] = out.alpha[1] = mu > 0.0 ? 1.5 * pi : 0.5 * pi;
      return out;
    case DriftStrength::Strong: break;
  }
  const double s = std::asin(r0 / std::fabs(mu));
  out.count = 2;
  if (mu > 0.0) {
    out.alpha[0] = pi + s;
    out.alpha[1] = 3.0 * pi - out.alpha[0];
  } else {
    out.alpha[0] = s;
    out.alpha[1] = pi - out.alpha[0];
  }
  return out;
}

inline double critical_momentum(double r0, double mu) {
  return -4.0 * mu / (1.0 + 4.0 * mu * mu / (r0 * r0));
}

// True when r0 = 2|mu| up to the moderate-drift relative tolerance.
inline bool on_reeb_radius(double r0, double mu) {
  return std::fabs(r0 - 2.0 * std::fabs(mu)) <= moderate_rtol * r0;
}

struct CriticalAngles {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

// The two initial angles whose momentum equals p_theta*.
inline CriticalAngles critical_angles(double r0, double mu) {
  if (!(r0 > 0.0) || mu == 0.0) throw InvalidArgument("critical_angles: need r0 > 0, mu != 0");
  if (on_reeb_radius(r0, mu)) {
    const double a = mu > 0.0 ? 1.5 * pi : 0.5 * pi;
    return {a, a};
  }
  const double s = std::clamp(critical_momentum(r0, mu) / r0, -1.0, 1.0);
  const double a = std::asin(s);
  if (mu > 0.0) return {pi - a, two_pi + a};
  return {a, pi - a};
}

struct DiscriminantData {
  double a = 0.0, b = 0.0, c = 0.0;
  double delta = 0.0;
  double p_theta_star = 0.0;
  bool degenerate = false;  // p_theta = 0, P is constant
  bool has_roots = false;
  double x_minus = 0.0, x_plus = 0.0;
  double r1 = infinity, r2 = infinity;  // r1 <= r2, turning radii
  std::optional<CriticalAngles> alpha_stars;
};

inline double radius_of_root(double x) {
  return x > 0.0 ? 1.0 / std::sqrt(x) : infinity;
}

inline DiscriminantData discriminant_data(double p_theta, double r0, double mu) {
  if (!(r0 > 0.0)) throw InvalidArgument("discriminant_data: r0 must be positive");
  if (mu == 0.0) throw InvalidArgument("discriminant_data: mu must be nonzero");
  DiscriminantData d;
  const double r02 = r0 * r0;
  d.a = mu * mu * p_theta * p_theta;
  d.b = -p_theta * (p_theta + 2.0 * mu + 2.0 * p_theta * mu * mu / r02);
  d.c = 1.0 - p_theta * p_theta / r02 - d.a / (r02 * r02) - d.b / r02;
  d.delta = p_theta * p_theta * p_theta * (p_theta * (1.0 + 4.0 * mu * mu / r02) + 4.0 * mu);
  d.p_theta_star = critical_momentum(r0, mu);
  d.alpha_stars = critical_angles(r0, mu);
  d.degenerate = p_theta == 0.0;
  if (!d.degenerate && d.delta >= 0.0) {
    const double sq = std::sqrt(d.delta);
    d.has_roots = true;
    // the product of the roots is c / a; use it for the smaller one
    const double q = -0.5 * (d.b + (d.b >= 0.0 ? sq : -sq));
    double xa = q / d.a;
    double xb = q != 0.0 ? d.c / q : xa;
    if (xa > xb) std::swap(xa, xb);
    d.x_minus = std::max(xa, 0.0);
    d.x_plus = xb;
    d.r1 = radius_of_root(d.x_plus);
    d.r2 = radius_of_root(d.x_minus);
  }
  return d;
}

// phi(r) = p_r^2 along the extremal through (r0, p_theta) with unit costate
// norm at r0.
inline double phi(double r, double p_theta, double r0, double mu) {
  const double a = mu * mu * p_theta * p_theta;
  const double b = -p_theta * (p_theta + 2.0 * mu + 2.0 * p_theta * mu * mu / (r0 * r0));
  const double ir2 = 1.0 / (r * r), ir02 = 1.0 / (r0 * r0);
  return a * (ir2 * ir2 - ir02 * ir02) + b * (ir2 - ir02) + 1.0 - p_theta * p_theta * ir02;
}

// Magnitude of the terms summed in phi, the natural scale of its rounding error.
inline double phi_scale(double r, double p_theta, double r0, double mu) {
  const double a = mu * mu * p_theta * p_theta;
  const double b = -p_theta * (p_theta + 2.0 * mu + 2.0 * p_theta * mu * mu / (r0 * r0));
  const double ir2 = 1.0 / (r * r), ir02 = 1.0 / (r0 * r0);
  return a * (ir2 * ir2 + ir02 * ir02) + std::fabs(b) * (ir2 + ir02) + 1.0 +
         p_theta * p_theta * ir02;
}

namespace detail {

inline Fate fate_positive(double alpha, double r0, double mu, const CriticalAngles& ca) {
  const double two_mu = 2.0 * mu;
  const bool reeb = on_reeb_radius(r0, mu);
  const bool ge = reeb || r0 >= two_mu;
  const bool gt = !reeb && r0 > two_mu;
  const double lam_end = ge ? ca.alpha1 : ca.alpha2;
  if (alpha >= pi && alpha < lam_end) return Fate::ToVortex;
  const double psi = gt ? ca.alpha1 : ca.alpha2;
  if (alpha == psi) return reeb ? Fate::ReebCircle : Fate::Separatrix;
  // Theta: [0, pi) united with (psi, 2pi)
  return Fate::ToInfinity;
}

inline Fate fate_negative(double alpha, double r0, double mu, const CriticalAngles& ca) {
  const double two_mu = 2.0 * std::fabs(mu);
  const bool reeb = on_reeb_radius(r0, mu);
  const bool ge = reeb || r0 >= two_mu;
  const bool le = reeb || r0 <= two_mu;
  const double lam_begin = ge ? ca.alpha2 : ca.alpha1;
  if (alpha > lam_begin && alpha <= pi) return Fate::ToVortex;
  const double psi = le ? ca.alpha1 : ca.alpha2;
  if (alpha == psi) return reeb ? Fate::ReebCircle : Fate::Separatrix;
  return Fate::ToInfinity;
}

}  // namespace detail

inline Fate fate(double alpha, double r0, double mu) {
  if (!(r0 > 0.0)) throw InvalidArgument("fate: r0 must be positive");
  alpha = wrap_angle(alpha);
  if (std::sin(alpha) == 0.0 || alpha == 0.0 || alpha == pi || mu == 0.0) {
    // radial, or no current: straight to the vortex only when aimed at it
    return alpha == pi ? Fate::ToVortex : Fate::ToInfinity;
  }
  const CriticalAngles ca = critical_angles(r0, mu);
  return mu > 0.0 ? detail::fate_positive(alpha, r0, mu, ca)
                  : detail::fate_negative(alpha, r0, mu, ca);
}

inline GeodesicType geodesic_type(double alpha, double r0, double mu) {
  const double h = initial_hamiltonian(alpha, r0, mu);
  if (std::fabs(h) < exceptional_tol) return GeodesicType::Exceptional;
  return h > 0.0 ? GeodesicType::Hyperbolic : GeodesicType::Elliptic;
}

struct GeodesicClassification {
  double alpha = 0.0;
  Fate fate = Fate::ToInfinity;
  GeodesicType gtype = GeodesicType::Hyperbolic;
  RadialProfile monotonicity = RadialProfile::StrictlyMonotone;
  DiscriminantData discriminant;
  // alpha lies within boundary_tol of a critical or exceptional angle, or
  // r0 sits on the measure-zero radius 2|mu| where the case tables switch
  bool near_boundary = false;
};

inline RadialProfile radial_profile(double alpha, double r0, double mu) {
  alpha = wrap_angle(alpha);
  const Fate f = fate(alpha, r0, mu);
  if (f == Fate::ReebCircle) return RadialProfile::Constant;
  const double p_theta = r0 * std::sin(alpha);
  if (mu == 0.0 || p_theta == 0.0) return RadialProfile::StrictlyMonotone;
  const DiscriminantData d = discriminant_data(p_theta, r0, mu);
  if (!d.has_roots || d.delta <= 0.0) return RadialProfile::StrictlyMonotone;
  const double p_r0 = std::cos(alpha);
  if ((r0 > d.r2 && p_r0 < 0.0) || (r0 < d.r1 && p_r0 > 0.0)) return RadialProfile::OneOscillation;
  return RadialProfile::StrictlyMonotone;
}

inline bool near_classification_boundary(double alpha, double r0, double mu) {
  if (mu == 0.0) return false;
  alpha = wrap_angle(alpha);
  auto close = [alpha](double b) { return std::fabs(angle_difference(alpha, b)) < boundary_tol; };
  const CriticalAngles ca = critical_angles(r0, mu);
  if (close(ca.alpha1) || close(ca.alpha2)) return true;
  const AbnormalAngles ab = abnormal_angles(r0, mu);
  for (int i = 0; i < ab.count; ++i)
    if (close(ab.alpha[i])) return true;
  return false;
}

inline GeodesicClassification classify(double alpha, double r0, double mu) {
  GeodesicClassification g;
  g.alpha = wrap_angle(alpha);
  g.fate = fate(g.alpha, r0, mu);
  g.gtype = geodesic_type(g.alpha, r0, mu);
  g.monotonicity = radial_profile(g.alpha, r0, mu);
  if (mu != 0.0) {
    g.discriminant = discriminant_data(r0 * std::sin(g.alpha), r0, mu);
    g.near_boundary = near_classification_boundary(g.alpha, r0, mu) || on_reeb_radius(r0, mu);
  }
  return g;
}

// Radial reduction of the separating geodesics inside the disk r < 2|mu|.
struct SeparatrixRate {
  double r_dot = 0.0;
  double theta_dot = 0.0;
};

namespace detail {
inline double separatrix_check(double r, double mu) {
  const double m = std::fabs(mu);
  if (mu == 0.0) throw DomainError("separatrix: mu must be nonzero");
  if (!(r > 0.0) || !(r < 2.0 * m)) throw DomainError("separatrix: need 0 < r < 2|mu|");
  return m;
}
}  // namespace detail

// For mu < 0 the angular motion is mirrored.
inline SeparatrixRate separatrix_rhs(double r, double mu) {
  const double m = detail::separatrix_check(r, mu);
  const double m2 = 4.0 * m * m, r2 = r * r;
  SeparatrixRate s;
  s.r_dot = (m2 - r2) / (m2 + r2);
  s.theta_dot = std::copysign(1.0, mu) * (m / r2) * (m2 - 3.0 * r2) / (m2 + r2);
  return s;
}

// Time to travel from r0 to r along the separating geodesic.
inline double separatrix_time(double r, double r0, double mu) {
  const double m = detail::separatrix_check(r, mu);
  detail::separatrix_check(r0, mu);
  auto g = [m](double x) { return 4.0 * m * std::atanh(x / (2.0 * m)) - x; };
  return g(r) - g(r0);
}

// Inverse of separatrix_time: radius reached after time t >= 0.
inline double separatrix_radius(double t, double r0, double mu) {
  const double m = detail::separatrix_check(r0, mu);
  if (!(t >= 0.0)) throw DomainError("separatrix_radius: t must be nonnegative");
  double lo = r0, hi = 2.0 * m;
  double r = r0;
  for (int it = 0; it < 200; ++it) {
    const double f = separatrix_time(r, r0, mu) - t;
    if (f == 0.0) return r;
    if (f < 0.0) lo = r; else hi = r;
    // dt/dr = 1 / r_dot
    double next = r - f * separatrix_rhs(r, mu).r_dot;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
    r = next;
  }
  return r;
}

// Angle reached at radius r along the separating geodesic leaving (r0, 0).
inline double separatrix_theta(double r, double r0, double mu) {
  const double m = detail::separatrix_check(r, mu);
  detail::separatrix_check(r0, mu);
  auto g = [m](double x) { return -std::atanh(x / (2.0 * m)) - m / x; };
  return std::copysign(1.0, mu) * (g(r) - g(r0));
}

// f(r) = sqrt((2|mu| - r) / (2|mu| + r)) exp(-|mu| / r), with f(0) = 0.
inline double reeb_f(double r, double mu) {
  const double m = std::fabs(mu);
  if (mu == 0.0) throw DomainError("reeb_f: mu must be nonzero");
  if (r < 0.0 || r > 2.0 * m) throw DomainError("reeb_f: need 0 <= r <= 2|mu|");
  if (r == 0.0) return 0.0;
  return std::sqrt((2.0 * m - r) / (2.0 * m + r)) * std::exp(-m / r);
}

// First integral of the separating geodesics in the punctured disk: each
// one is a level set of F.
inline double reeb_F(double r, double theta, double mu) {
  return reeb_f(r, mu) * std::exp(-std::copysign(1.0, mu) * theta);
}

}  // namespace vortexnav
