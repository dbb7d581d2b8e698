#include "beurling/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "beurling/csv.hpp"

namespace beurling {

namespace {

void require_eps(double eps) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// integral_{-inf}^{c} e^(lambda v) g_eps(v) dv.
double tilted_mass(double c, double lambda, double eps) {
  return std::exp(0.5 * lambda * lambda * eps * eps) * normal_cdf((c - lambda * eps * eps) / eps);
}

}  // namespace

double gamma(double eps, double t) {
  require_eps(eps);
  return std::exp(-0.5 * eps * eps * t * t);
}

double gauss_kernel(double eps, double v) {
  require_eps(eps);
  return std::exp(-0.5 * v * v / (eps * eps)) / (std::sqrt(2.0 * std::numbers::pi) * eps);
}

std::string to_string(Side s) { return s == Side::kFourier ? "FOURIER" : "CONVOLUTION"; }

void SmoothedCounting::write_csv(std::ostream& out) const {
  CsvWriter w(out, {"u", "value", "side", "eps", "tilt"});
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    w.cell(u_grid[i]).cell(values[i]).cell(to_string(side)).cell(epsilon).cell(tilt_sigma);
    w.end_row();
  }
}

// ------------------------------------------------------------ convolution

SmoothedCounting smooth_counting(const StepFunction& N, double eps, std::span<const double> u_grid,
                                 double tilt_sigma) {
  require_eps(eps);
  SmoothedCounting r;
  r.epsilon = eps;
  r.side = Side::kConvolution;
  r.tilt_sigma = tilt_sigma;
  r.u_grid.assign(u_grid.begin(), u_grid.end());
  if (u_grid.empty()) return r;
  const double u_max = *std::max_element(u_grid.begin(), u_grid.end());
  const double needed = std::exp(u_max + kKernelWidth * eps);
  if (N.horizon() < needed * (1.0 - 1e-12)) {
    throw DomainError("smooth_counting: horizon " + format_real(N.horizon()) +
                      " below the needed e^(u_max + 8 eps) = " + format_real(needed));
  }
  const double sigma = tilt_sigma;
  const auto atoms = N.atoms();
  std::vector<double> logs(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) logs[j] = std::log(atoms[j].location);
  // Beyond this many eps below u the normal cdf rounds to 1.
  const double flat = 9.0 + std::abs(sigma) * eps;
  const double full = std::exp(0.5 * sigma * sigma * eps * eps);

  for (double u : u_grid) {
    double v = N.base() * tilted_mass(u, sigma, eps);
    const double lo = u - flat * eps, hi = u + kKernelWidth * eps;
    const auto first = static_cast<std::size_t>(std::lower_bound(logs.begin(), logs.end(), lo) - logs.begin());
    if (first > 0) v += N.atomic_part(atoms[first - 1].location) * full;
    for (std::size_t j = first; j < logs.size() && logs[j] <= hi; ++j) {
      v += atoms[j].weight * tilted_mass(u - logs[j], sigma, eps);
    }
    double err = 0.0;
    if (const auto& sp = N.smooth()) {
      if (sp->kind() == SmoothPart::Kind::kRamps) {
        for (const Knot& k : sp->knots()) {
          const double c = u - std::log(k.x);
          if (c < -kKernelWidth * eps) break;
          v += k.slope * (std::exp(u) * tilted_mass(c, sigma - 1.0, eps) - k.x * tilted_mass(c, sigma, eps));
        }
      } else {
        const double top = std::min(u, kKernelWidth * eps);
        const double bottom = -kKernelWidth * eps;
        if (top > bottom) {
          auto f = [&](double w) { return sp->value(std::exp(u - w)) * std::exp(sigma * w) * gauss_kernel(eps, w); };
          const double scale = std::max(1.0, sp->value(std::exp(u - bottom)));
          const auto q = adaptive_simpson(f, bottom, top, 1e-13 * scale);
          v += q.value;
          err = q.error;
        }
      }
    }
    r.values.push_back(v);
    r.error.push_back(err);
  }
  return r;
}

// ---------------------------------------------------------------- Fourier

LineRule LineRule::build(double t_max, double h, int order) {
  if (!(t_max > 0.0) || !(h > 0.0)) throw DomainError("LineRule: need t_max, h > 0");
  const auto panels = static_cast<std::size_t>(std::ceil(t_max / h));
  const double width = t_max / static_cast<double>(panels);
  const GaussRule& g = gauss_legendre(order);
  LineRule r;
  r.t.reserve(panels * g.nodes.size());
  r.w.reserve(panels * g.nodes.size());
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * width;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      r.t.push_back(mid + 0.5 * width * g.nodes[k]);
      r.w.push_back(0.5 * width * g.weights[k]);
    }
  }
  return r;
}

double gamma_cutoff(double eps) {
  require_eps(eps);
  return std::sqrt(-2.0 * std::log(kGammaCut)) / eps;
}

namespace {

// Panel width resolving e^(itu) against line frequencies up to max_log.
double panel_width(double u_abs_max, double max_log) {
  return std::min(0.25, 3.0 / (u_abs_max + max_log + 1.0));
}

// (1/pi) sum_k w_k Re[e^(i t_k u) F(t_k)] for every u, on rules of width h
// and h/2; returns the finer values and |fine - coarse|.
template <class F>
void line_transform(F&& f, double t_max, double h, std::span<const double> u,
                    std::vector<double>& values, std::vector<double>& error) {
  std::vector<double> coarse;
  for (int pass = 0; pass < 2; ++pass) {
    const LineRule rule = LineRule::build(t_max, pass == 0 ? h : 0.5 * h);
    std::vector<cplx> weighted(rule.t.size());
    for (std::size_t k = 0; k < rule.t.size(); ++k) weighted[k] = rule.w[k] * f(rule.t[k]);
    std::vector<double> out;
    out.reserve(u.size());
    for (double x : u) {
      double acc = 0.0, comp = 0.0;
      for (std::size_t k = 0; k < rule.t.size(); ++k) {
        const double term = (std::polar(1.0, rule.t[k] * x) * weighted[k]).real() - comp;
        const double next = acc + term;
        comp = (next - acc) - term;
        acc = next;
      }
      out.push_back(acc / std::numbers::pi);
    }
    if (pass == 0) {
      coarse = std::move(out);
    } else {
      values = std::move(out);
    }
  }
  error.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) error[i] = std::abs(values[i] - coarse[i]);
}

double abs_max(std::span<const double> u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

SmoothedCounting fourier_counting(const Perturbation& a, double sigma, double eps,
                                  std::span<const double> u_grid) {
  require_eps(eps);
  if (!(sigma > 1.0)) throw DomainError("fourier_counting: sigma must exceed 1");
  const TransferChain chain(a);
  SmoothedCounting r;
  r.epsilon = eps;
  r.side = Side::kFourier;
  r.tilt_sigma = sigma;
  r.u_grid.assign(u_grid.begin(), u_grid.end());
  auto f = [&](double t) {
    const cplx s(sigma, t);
    return chain.Z(s) / s * std::exp(-0.5 * eps * eps * t * t);
  };
  line_transform(f, gamma_cutoff(eps), panel_width(abs_max(u_grid), chain.max_log()), u_grid,
                 r.values, r.error);
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    const double grow = std::exp(sigma * u_grid[i]);
    r.values[i] *= grow;
    r.error[i] *= grow;
  }
  return r;
}

FourierDerivative fourier_derivative(const Perturbation& a, double eps, std::span<const double> u_list,
                                     double u_mass_hi) {
  require_eps(eps);
  const TransferChain chain(a);
  FourierDerivative r;
  r.u.assign(u_list.begin(), u_list.end());
  r.c1 = chain.C(cplx(1.0, 0.0)).real();
  auto f = [&](double t) { return chain.C(cplx(1.0, t)) * std::exp(-0.5 * eps * eps * t * t); };
  const double t_max = gamma_cutoff(eps);
  const double u_lo = -12.0 * eps;
  const double h = panel_width(std::max(abs_max(u_list), std::max(std::abs(u_lo), std::abs(u_mass_hi))),
                               chain.max_log());
  std::vector<double> err;
  line_transform(f, t_max, h, u_list, r.values, err);
  for (double e : err) r.error = std::max(r.error, e);

  // Mass: the u-integral over [u_lo, u_mass_hi] taken exactly under the
  // t-quadrature, integral e^(itu) du = (e^(it hi) - e^(it lo)) / (it).
  auto g = [&](double t) {
    const cplx span_factor = (std::polar(1.0, t * u_mass_hi) - std::polar(1.0, t * u_lo)) / cplx(0.0, t);
    return f(t) * span_factor;
  };
  const double zero[] = {0.0};
  std::vector<double> mv, me;
  line_transform(g, t_max, h, zero, mv, me);
  const double mass = mv[0], mass_err = me[0];
  r.mass = mass;
  r.error = std::max(r.error, mass_err);
  return r;
}

json DensityProbe::to_json() const {
  const char* names[] = {"auto", "convolution", "fourier"};
  return {{"estimate", estimate},
          {"reference_C1", reference_c1},
          {"gap", gap},
          {"error", error},
          {"route", names[static_cast<int>(route)]}};
}

namespace {

bool enumerable(const Perturbation& a) {
  if (!a.measure.purely_atomic()) return false;
  for (const Atom& at : a.measure.atoms()) {
    const double m = std::round(at.weight);
    if (a.reference == Reference::kTau && (m < 1.0 || std::abs(at.weight - m) > 1e-12 * m)) {
      return false;
    }
    if (a.reference == Reference::kPi && std::abs(at.weight - m) > 1e-12 * std::max(1.0, std::abs(m))) {
      return false;
    }
  }
  return true;
}

// (1/pi) integral_0^inf Re[e^(iut)(C(1+it) - C(1))/(it)] gamma_eps(t) dt.
void residual_transform(const TransferChain& chain, double eps, std::span<const double> u,
                        std::vector<double>& values, std::vector<double>& error) {
  const cplx c1 = chain.C(cplx(1.0, 0.0));
  auto f = [&](double t) {
    return (chain.C(cplx(1.0, t)) - c1) / cplx(0.0, t) * std::exp(-0.5 * eps * eps * t * t);
  };
  line_transform(f, gamma_cutoff(eps), panel_width(abs_max(u), chain.max_log()), u, values, error);
}

}  // namespace

DensityProbe density_via_C1(const Perturbation& a, double eps, double u_probe, DensityRoute route) {
  require_eps(eps);
  const TransferChain chain(a);
  DensityProbe p;
  p.reference_c1 = chain.C(cplx(1.0, 0.0)).real();
  if (route == DensityRoute::kAuto) {
    route = enumerable(a) && u_probe + kKernelWidth * eps <= std::log(5e7) ? DensityRoute::kConvolution
                                                                          : DensityRoute::kFourier;
  }
  p.route = route;
  if (route == DensityRoute::kConvolution) {
    const double X = std::exp(u_probe + kKernelWidth * eps);
    const StepFunction N = associated_counting(a, X);
    const double u[] = {u_probe};
    const SmoothedCounting s = smooth_counting(N, eps, u, 1.0);
    p.estimate = std::exp(-u_probe) * s.values[0];
    p.error = std::exp(-u_probe) * s.error[0];
  } else {
    if (a.reference == Reference::kPi) {
      // Z = zeta_Y C; fold the reference primes into the chain.
      throw UnsupportedError("density_via_C1: the Fourier route needs reference tau");
    }
    const double u[] = {u_probe};
    std::vector<double> v, e;
    residual_transform(chain, eps, u, v, e);
    p.estimate = p.reference_c1 * normal_cdf(u_probe / eps) + v[0];
    p.error = e[0];
  }
  p.gap = std::abs(p.estimate - p.reference_c1);
  return p;
}

std::vector<double> theorem2_residual(const Perturbation& a, std::span<const double> u_list,
                                      double eps_sum) {
  require_eps(eps_sum);
  const TransferChain chain(a);
  std::vector<double> v, e;
  residual_transform(chain, eps_sum, u_list, v, e);
  return v;
}

// ------------------------------------------------------------------ lemma

json LemmaReport::to_json() const {
  json entries_json = json::array();
  for (const LemmaEntry& e : entries) {
    entries_json.push_back({{"eps", e.eps},
                            {"report", e.smoothed.to_json()},
                            {"matches", e.matches},
                            {"asserted", e.asserted}});
  }
  return {{"unsmoothed", unsmoothed.to_json()}, {"entries", entries_json}, {"all_match", all_match}};
}

LemmaReport lemma_check(const StepFunction& M, std::span<const double> eps_list, double threshold,
                        const DensityOptions& opt) {
  if (!std::isfinite(M.horizon())) throw DomainError("lemma_check: M needs a finite horizon");
  LemmaReport r;
  r.unsmoothed = density_estimate(M, M.horizon(), opt);
  const double decade = std::log(10.0);
  const double step = decade / opt.points_per_decade;
  const double bottom = std::log(opt.x_lo);
  for (double eps : eps_list) {
    LemmaEntry e{eps, {}, false, eps <= threshold};
    const double top = std::log(M.horizon()) - kKernelWidth * eps;
    if (top - bottom < decade) {
      e.smoothed.diagnostics = "horizon too short for eps = " + format_real(eps);
    } else {
      const auto n = static_cast<std::size_t>(std::floor((top - bottom) / step + 1e-9));
      std::vector<double> u(n + 1);
      for (std::size_t i = 0; i <= n; ++i) u[i] = top - static_cast<double>(n - i) * step;
      const SmoothedCounting s = smooth_counting(M, eps, u, 1.0);
      std::vector<double> ratio(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) ratio[i] = std::exp(-u[i]) * s.values[i];
      e.smoothed = classify_ratio(u, ratio, opt);
    }
    e.matches = e.smoothed.trend == r.unsmoothed.trend;
    if (e.matches && r.unsmoothed.trend == Trend::kConvergent) {
      e.matches = std::abs(e.smoothed.estimate - r.unsmoothed.estimate) <=
                  opt.spread_tol * std::abs(r.unsmoothed.estimate);
    }
    if (e.asserted && !e.matches) r.all_match = false;
    r.entries.push_back(std::move(e));
  }
  return r;
}

}  // namespace beurling
