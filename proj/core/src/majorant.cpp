#include "gradcert/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gradcert {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_radius(const BoundData& bounds, double r) {
  if (!(r >= 0.0) || r > bounds.R * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "radius r=" << r << " outside [0, R=" << bounds.R << "]";
    throw InputError(os.str());
  }
}

void check_phi(double phi) {
  if (!(phi >= 0.0) || !std::isfinite(phi)) {
    throw InputError("phi must be finite and nonnegative");
  }
}

const std::vector<double>& tabulated_row(const TabulatedModulus& tab, double r) {
  const auto it = std::lower_bound(tab.radii.begin(), tab.radii.end(), r);
  if (it == tab.radii.end()) {
    throw InputError("tabulated modulus has no row for radius " + std::to_string(r));
  }
  return tab.values[static_cast<std::size_t>(it - tab.radii.begin())];
}

double tabulated_value(const TabulatedModulus& tab, double r, double t) {
  const auto& row = tabulated_row(tab, r);
  const auto& grid = tab.t;
  const std::size_t n = grid.size();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), t) - grid.begin());
  k = std::clamp<std::size_t>(k, 1, n - 1);
  const double slope = (row[k] - row[k - 1]) / (grid[k] - grid[k - 1]);
  return row[k - 1] + slope * (t - grid[k - 1]);
}

// Exact integral of the piecewise-linear interpolant (with linear extrapolation).
double tabulated_integral(const TabulatedModulus& tab, double r, double t) {
  const auto& row = tabulated_row(tab, r);
  const auto& grid = tab.t;
  const std::size_t n = grid.size();
  double total = 0.0;
  for (std::size_t k = 1; k < n && grid[k - 1] < t; ++k) {
    const bool last = (k == n - 1);
    const double hi = last ? t : std::min(t, grid[k]);
    const double slope = (row[k] - row[k - 1]) / (grid[k] - grid[k - 1]);
    const double width = hi - grid[k - 1];
    total += width * (row[k - 1] + 0.5 * slope * width);
  }
  return total;
}

void validate_tabulated(const TabulatedModulus& tab) {
  if (tab.t.size() < 2 || tab.t.front() != 0.0) {
    throw InputError("tabulated modulus: t-grid needs >= 2 knots starting at 0");
  }
  if (!std::is_sorted(tab.t.begin(), tab.t.end(), std::less_equal<>{}) ||
      std::adjacent_find(tab.t.begin(), tab.t.end()) != tab.t.end()) {
    throw InputError("tabulated modulus: t-grid must be strictly increasing");
  }
  if (tab.radii.empty() || tab.radii.size() != tab.values.size()) {
    throw InputError("tabulated modulus: one value row per radius knot required");
  }
  if (!std::is_sorted(tab.radii.begin(), tab.radii.end()) ||
      std::adjacent_find(tab.radii.begin(), tab.radii.end()) != tab.radii.end()) {
    throw InputError("tabulated modulus: radii must be strictly increasing");
  }
  for (std::size_t i = 0; i < tab.values.size(); ++i) {
    const auto& row = tab.values[i];
    if (row.size() != tab.t.size()) throw InputError("tabulated modulus: row length mismatch");
    if (row.front() != 0.0) throw InputError("tabulated modulus: omega(r, 0) must be 0");
    if (!std::is_sorted(row.begin(), row.end())) {
      throw InputError("tabulated modulus: rows must be nondecreasing in t");
    }
    if (i > 0) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k] < tab.values[i - 1][k]) {
          throw InputError("tabulated modulus: rows must be nondecreasing in r");
        }
      }
    }
  }
}

}  // namespace

Modulus lipschitz_modulus(double L) {
  return LipschitzModulus{[L](double) { return L; }};
}

Modulus lipschitz_modulus(RadialFn L) { return LipschitzModulus{std::move(L)}; }

Modulus holder_modulus(double L, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("Hoelder exponent must lie in (0, 1]");
  return HolderModulus{[L](double) { return L; }, alpha};
}

Modulus zero_modulus() { return lipschitz_modulus(0.0); }

double omega_value(const Modulus& omega, double r, double t) {
  if (!(t >= 0.0)) throw InputError("omega: t must be nonnegative");
  return std::visit(overloaded{
                        [&](const LipschitzModulus& m) { return m.L(r) * t; },
                        [&](const HolderModulus& m) { return m.L(r) * std::pow(t, m.alpha); },
                        [&](const TabulatedModulus& m) { return tabulated_value(m, r, t); },
                    },
                    omega);
}

BoundData constant_bounds(double lambda, double theta, double mu, Modulus omega, double R) {
  BoundData b;
  b.lambda = [lambda](double) { return lambda; };
  b.theta = [theta](double) { return theta; };
  b.contraction = DirectContraction{[mu](double) { return mu; }};
  b.omega = std::move(omega);
  b.R = R;
  return b;
}

double mu_from_nu_min(double nu, double sigma) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InputError("nu must lie in (0, 1]");
  if (!(sigma >= 1.0)) throw InputError("sigma must be >= 1");
  return std::sqrt(1.0 - nu * nu / sigma);
}

double mu_from_nu_altman(double nu, double vartheta, double sigma) {
  if (!(nu > 0.0 && nu <= 1.0)) throw InputError("nu must lie in (0, 1]");
  if (!(vartheta > 0.0 && vartheta <= 2.0)) throw InputError("vartheta must lie in (0, 2]");
  if (!(sigma >= 1.0)) throw InputError("sigma must be >= 1");
  if (nu <= std::sqrt(sigma / (2.0 * vartheta))) {
    std::ostringstream os;
    os << "Altman step not certifiable: nu=" << nu << " <= sqrt(sigma/(2 vartheta))="
       << std::sqrt(sigma / (2.0 * vartheta));
    throw ValidityError(os.str());
  }
  const double radicand = 1.0 - 2.0 / vartheta + sigma / (vartheta * vartheta * nu * nu);
  if (radicand < 0.0) throw Error("mu_from_nu_altman: negative radicand");
  return std::sqrt(radicand);
}

double contraction_at(const BoundData& bounds, double sigma, double r) {
  return std::visit(overloaded{
                        [&](const DirectContraction& c) { return c.mu(r); },
                        [&](const NuContraction& c) {
                          const double nu = c.nu(r);
                          return c.rule == StepRule::MinQuadratic
                                     ? mu_from_nu_min(nu, sigma)
                                     : mu_from_nu_altman(nu, c.vartheta, sigma);
                        },
                    },
                    bounds.contraction);
}

double lambda_theta(const BoundData& bounds, double r) { return bounds.lambda(r) * bounds.theta(r); }

double big_omega(const BoundData& bounds, double r, double t) {
  if (!(t >= 0.0)) throw InputError("Omega: t must be nonnegative");
  if (t == 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const LipschitzModulus& m) { return 0.5 * m.L(r) * t * t; },
                        [&](const HolderModulus& m) {
                          return m.L(r) * std::pow(t, 1.0 + m.alpha) / (1.0 + m.alpha);
                        },
                        [&](const TabulatedModulus& m) { return tabulated_integral(m, r, t); },
                    },
                    bounds.omega);
}

double relax_d(const BoundData& bounds, double sigma, double r, double phi) {
  check_radius(bounds, r);
  check_phi(phi);
  const double mu = contraction_at(bounds, sigma, r);
  return mu * phi + sigma * big_omega(bounds, r, lambda_theta(bounds, r) * phi);
}

double relax_d_iter(const BoundData& bounds, double sigma, double r, double phi, std::size_t n) {
  double value = phi;
  for (std::size_t k = 0; k < n; ++k) value = relax_d(bounds, sigma, r, value);
  return value;
}

std::optional<double> phi_star(const BoundData& bounds, double sigma, double r, double scale_hint,
                               const MajorantSettings& settings) {
  check_radius(bounds, r);
  const double mu = contraction_at(bounds, sigma, r);
  if (!(mu < 1.0)) {
    std::ostringstream os;
    os << "mu(r)=" << mu << " >= 1 at r=" << r << ": no certificate possible";
    throw InfeasibleError(os.str());
  }
  const double lt = lambda_theta(bounds, r);
  if (lt == 0.0) return std::nullopt;

  const double phi_max = 10.0 * std::max({scale_hint, bounds.R, bounds.R / lt});
  // d(phi)/phi - 1: negative (mu - 1) near 0, changes sign at the first positive root.
  const auto excess = [&](double phi) {
    return phi == 0.0 ? mu - 1.0 : relax_d(bounds, sigma, r, phi) / phi - 1.0;
  };

  const std::size_t n = std::max<std::size_t>(settings.root_scan_points, 2);
  const double lo_end = phi_max * 1e-12;
  const double ratio = std::pow(phi_max / lo_end, 1.0 / static_cast<double>(n - 1));
  double lo = 0.0;
  double hi = -1.0;
  double grid = lo_end;
  for (std::size_t k = 0; k < n; ++k, grid *= ratio) {
    const double phi = (k == n - 1) ? phi_max : grid;
    if (excess(phi) >= 0.0) {
      hi = phi;
      break;
    }
    lo = phi;
  }
  if (hi < 0.0) return std::nullopt;

  for (int it = 0; it < 400; ++it) {
    const double width = hi - lo;
    if (width <= settings.root_tolerance ||
        width <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      break;
    }
    const double mid = lo + 0.5 * width;
    if (excess(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double majorant_w(const BoundData& bounds, double sigma, double r, double phi,
                  const MajorantSettings& settings) {
  check_radius(bounds, r);
  check_phi(phi);
  if (phi == 0.0) return 0.0;

  const auto root = phi_star(bounds, sigma, r, phi, settings);
  if (root && phi >= *root) {
    std::ostringstream os;
    os << "w(r, phi) diverges: phi=" << phi << " >= phi*(r)=" << *root;
    throw DivergenceError(os.str());
  }

  double sum = 0.0;
  double term = phi;
  int contracting = 0;
  for (std::size_t k = 0; k < settings.max_series_terms; ++k) {
    sum += term;
    const double next = relax_d(bounds, sigma, r, term);
    if (next == 0.0) return sum;
    if (!(next < term)) {
      throw DivergenceError("w(r, phi): iterates of d stopped decreasing");
    }
    const double q = next / term;
    contracting = q < 1.0 ? contracting + 1 : 0;
    const double tail = next / (1.0 - q);
    if (contracting >= 5 && tail < settings.series_tolerance * sum) {
      // d(phi)/phi is nondecreasing for convex d, so the tail is at most geometric in q.
      return sum + tail;
    }
    term = next;
  }
  throw DivergenceError("w(r, phi): series did not settle within the term cap");
}

double majorant_w_upper(const BoundData& bounds, double sigma, double r, double phi) {
  if (phi == 0.0) return 0.0;
  const double d = relax_d(bounds, sigma, r, phi);
  if (!(d < phi)) return std::numeric_limits<double>::infinity();
  return phi * phi / (phi - d);
}

void validate_bounds(const BoundData& bounds, double sigma, std::size_t grid) {
  if (!(bounds.R > 0.0) || !std::isfinite(bounds.R)) throw InputError("R must be positive");
  if (!bounds.lambda || !bounds.theta) throw InputError("lambda and theta functions required");
  if (const auto* tab = std::get_if<TabulatedModulus>(&bounds.omega)) {
    validate_tabulated(*tab);
    if (tab->radii.back() < bounds.R) {
      throw InputError("tabulated modulus must cover radii up to R");
    }
  }
  const std::size_t n = std::max<std::size_t>(grid, 2);
  const auto slack = [](double v) { return 1e-12 * std::max(1.0, std::abs(v)); };
  double prev_lambda = 0.0, prev_theta = 0.0, prev_mu = 0.0;
  double prev_nu = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = bounds.R * static_cast<double>(i) / static_cast<double>(n - 1);
    const double lam = bounds.lambda(r);
    const double th = bounds.theta(r);
    if (!(lam >= 0.0) || !(th >= 0.0) || !std::isfinite(lam) || !std::isfinite(th)) {
      throw InputError("lambda(r), theta(r) must be finite and nonnegative at r=" + std::to_string(r));
    }
    if (i > 0 && (lam < prev_lambda - slack(prev_lambda) || th < prev_theta - slack(prev_theta))) {
      throw InputError("lambda and theta must be nondecreasing in r");
    }
    prev_lambda = lam;
    prev_theta = th;

    if (const auto* nc = std::get_if<NuContraction>(&bounds.contraction)) {
      const double nu = nc->nu(r);
      if (nu > prev_nu + slack(prev_nu)) throw InputError("nu must be nonincreasing in r");
      prev_nu = nu;
    } else {
      const double mu = std::get<DirectContraction>(bounds.contraction).mu(r);
      if (!(mu >= 0.0) || !std::isfinite(mu)) throw InputError("mu(r) must be finite and >= 0");
      if (i > 0 && mu < prev_mu - slack(prev_mu)) throw InputError("mu must be nondecreasing in r");
      prev_mu = mu;
    }

    if (omega_value(bounds.omega, r, 0.0) != 0.0) throw InputError("omega(r, 0) must be 0");
    double prev_w = 0.0;
    for (double t : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
      const double w = omega_value(bounds.omega, r, t);
      if (!(w >= prev_w - slack(prev_w))) throw InputError("omega must be nondecreasing in t");
      prev_w = w;
    }
  }
  (void)sigma;
}

namespace {

struct RadiusEvaluation {
  bool feasible = false;
  std::optional<double> phi_star;
  std::optional<double> w;
  std::optional<double> condition;
  std::string reason;
};

RadiusEvaluation evaluate_radius(const BoundData& bounds, double sigma, double a, double r,
                                 const MajorantSettings& settings) {
  RadiusEvaluation ev;
  try {
    ev.phi_star = phi_star(bounds, sigma, r, a, settings);
    if (ev.phi_star && a >= *ev.phi_star) {
      std::ostringstream os;
      os << "a=" << a << " >= phi*(r)=" << *ev.phi_star;
      ev.reason = os.str();
      return ev;
    }
    ev.w = majorant_w(bounds, sigma, r, a, settings);
    ev.condition = lambda_theta(bounds, r) * *ev.w;
    ev.feasible = *ev.condition <= r;
    if (!ev.feasible) {
      std::ostringstream os;
      os << "lambda*theta*w(r,a)=" << *ev.condition << " > r=" << r;
      ev.reason = os.str();
    }
  } catch (const Error& e) {
    ev.reason = e.what();
  }
  return ev;
}

void fill_certificate(MajorantCertificate& cert, const BoundData& bounds, double r,
                      const RadiusEvaluation& ev) {
  cert.r = r;
  cert.phi_star = ev.phi_star;
  cert.w_of_a = ev.w;
  cert.condition_value = ev.condition;
  cert.lambda_theta = lambda_theta(bounds, r);
  try {
    const double mu = contraction_at(bounds, cert.sigma, r);
    cert.linear_rate = mu;
    cert.velo_bound = relax_d(bounds, cert.sigma, r, cert.a) / cert.a;
  } catch (const Error&) {
    cert.linear_rate.reset();
    cert.velo_bound.reset();
  }
}

}  // namespace

MajorantCertificate certify(const BoundData& bounds, double sigma, double a,
                            const MajorantSettings& settings) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InputError("certify: a = ||f(x0)|| must be positive");
  if (!(sigma >= 1.0)) throw InputError("certify: sigma must be >= 1");
  validate_bounds(bounds, sigma);

  MajorantCertificate cert;
  cert.a = a;
  cert.sigma = sigma;
  cert.R = bounds.R;

  const double R = bounds.R;
  const double r_lo = std::max(a * lambda_theta(bounds, 0.0), 1e-12 * R);
  if (r_lo > R) {
    fill_certificate(cert, bounds, R, evaluate_radius(bounds, sigma, a, R, settings));
    cert.feasible = false;
    std::ostringstream os;
    os << "a*lambda(0)*theta(0)=" << r_lo << " exceeds R=" << R;
    cert.diagnostics = os.str();
    return cert;
  }

  const std::size_t n = std::max<std::size_t>(settings.radius_scan_points, 2);
  double prev_r = r_lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i == n - 1) ? R : r_lo + (R - r_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    RadiusEvaluation ev = evaluate_radius(bounds, sigma, a, r, settings);
    if (!ev.feasible) {
      prev_r = r;
      continue;
    }
    double hi = r;
    if (i > 0) {
      double lo = prev_r;
      for (int it = 0; it < 200 && hi - lo > settings.root_tolerance * std::max(1.0, R); ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        RadiusEvaluation mid_ev = evaluate_radius(bounds, sigma, a, mid, settings);
        if (mid_ev.feasible) {
          hi = mid;
          ev = std::move(mid_ev);
        } else {
          lo = mid;
        }
      }
    }
    fill_certificate(cert, bounds, hi, ev);
    cert.feasible = true;
    return cert;
  }

  const RadiusEvaluation at_R = evaluate_radius(bounds, sigma, a, R, settings);
  fill_certificate(cert, bounds, R, at_R);
  cert.feasible = false;
  cert.diagnostics = "no feasible radius in [" + std::to_string(r_lo) + ", " + std::to_string(R) +
                     "]; at R: " + at_R.reason;
  return cert;
}

double apriori_bound(const MajorantCertificate& cert, const BoundData& bounds, std::size_t n) {
  if (!cert.feasible) throw InputError("apriori_bound requires a feasible certificate");
  const double dn = relax_d_iter(bounds, cert.sigma, cert.r, cert.a, n);
  return lambda_theta(bounds, cert.r) * majorant_w(bounds, cert.sigma, cert.r, dn);
}

double aposteriori_bound(const MajorantCertificate& cert, const BoundData& bounds,
                         double res_norm) {
  check_phi(res_norm);
  if (res_norm == 0.0) return 0.0;
  return lambda_theta(bounds, cert.r) * majorant_w(bounds, cert.sigma, cert.r, res_norm);
}

RateBounds rate_bounds(const MajorantCertificate& cert, const BoundData& bounds) {
  if (!cert.feasible) throw InputError("rate_bounds requires a feasible certificate");
  if (!(cert.a > 0.0)) throw InputError("rate_bounds: a must be positive");
  return {relax_d(bounds, cert.sigma, cert.r, cert.a) / cert.a,
          contraction_at(bounds, cert.sigma, cert.r)};
}

}  // namespace gradcert
