#include "beurling/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "beurling/csv.hpp"
#include "beurling/rng.hpp"

namespace beurling {

namespace {

// Compensated complex accumulator.
struct KahanSum {
  cplx sum{};
  cplx comp{};

  void add(cplx v) {
    const cplx y = v - comp;
    const cplx t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

cplx log_ratio(cplx s) {
  if (s == cplx(1.0, 0.0)) throw PoleError("log(s/(s-1)) has a pole at s = 1");
  return std::log(s / (s - 1.0));
}

}  // namespace

TransferChain::TransferChain(const Perturbation& a, double tol)
    : tol_(tol), horizon_(a.horizon), reference_(a.reference) {
  if (!(tol > 0.0)) throw DomainError("TransferChain: tol must be positive");
  for (const Atom& at : a.measure.atoms()) {
    if (!(at.location > 1.0 + kEpsLoc)) {
      throw ConditioningError("B-series: atom at " + format_real(at.location) +
                              " is too close to 1 for geometric decay");
    }
    logs_.push_back(std::log(at.location));
    weights_.push_back(at.weight);
    max_log_ = std::max(max_log_, logs_.back());
  }
  if (const auto& sp = a.measure.smooth()) {
    if (sp->kind() != SmoothPart::Kind::kTau) {
      throw UnsupportedError("transfer chain: only tau-shaped smooth parts are supported");
    }
    tau_scale_ = sp->scale();
  }
  if (std::isfinite(horizon_)) a_at_horizon_ = a.induced(horizon_);
  if (reference_ == Reference::kPi) {
    if (!std::isfinite(horizon_)) {
      throw DomainError("reference pi needs a finite horizon");
    }
    for (std::uint64_t p : sieve_primes(static_cast<std::uint64_t>(std::floor(horizon_)))) {
      ref_logs_.push_back(std::log(static_cast<double>(p)));
    }
    if (!ref_logs_.empty()) max_log_ = std::max(max_log_, ref_logs_.back());
  }
}

void TransferChain::check(cplx s) const {
  if (!(s.real() >= 1.0)) throw DomainError("transfer chain: need Re s >= 1");
}

cplx TransferChain::A(cplx s) const {
  check(s);
  KahanSum acc;
  for (std::size_t j = 0; j < logs_.size(); ++j) acc.add(weights_[j] * std::exp(-s * logs_[j]));
  cplx v = acc.sum;
  if (tau_scale_ != 0.0) v += tau_scale_ * log_ratio(s);
  return v;
}

cplx TransferChain::B(cplx s) const {
  check(s);
  const double sigma = s.real();
  double scale = 0.0;
  for (std::size_t j = 0; j < logs_.size(); ++j) {
    scale += std::abs(weights_[j]) * std::exp(-sigma * logs_[j]);
  }
  KahanSum acc;
  if (scale > 0.0) {
    for (std::size_t j = 0; j < logs_.size(); ++j) {
      const double r = std::exp(-sigma * logs_[j]);
      // sum_j |w_j| r_j^(K_j+1) / (1 - r_j) <= tol once r_j^K_j <= tol (1 - r_j) / scale.
      const double k_real = std::ceil(std::log(tol_ * (1.0 - r) / scale) / std::log(r));
      if (k_real > 1e7) {
        throw ConditioningError("B-series: more than 1e7 terms needed");
      }
      const int K = std::max(1, static_cast<int>(k_real));
      const cplx z = std::exp(-s * logs_[j]);
      cplx zk = z, inner = z;
      for (int k = 2; k <= K; ++k) {
        zk *= z;
        inner += zk / static_cast<double>(k);
      }
      acc.add(weights_[j] * inner);
    }
  }
  cplx v = acc.sum;
  if (tau_scale_ != 0.0) v += tau_scale_ * log_ratio(s);
  return v;
}

cplx TransferChain::Z(cplx s) const {
  if (reference_ == Reference::kTau) {
    if (s == cplx(1.0, 0.0)) throw PoleError("Z has a pole at s = 1");
    return s / (s - 1.0) * C(s);
  }
  check(s);
  cplx euler(1.0, 0.0);
  for (double l : ref_logs_) euler *= 1.0 - std::polar(std::exp(-s.real() * l), -s.imag() * l);
  return std::exp(B(s)) / euler;
}

double TransferChain::tail_bound(double sigma) const {
  if (!std::isfinite(horizon_)) return 0.0;
  return std::abs(a_at_horizon_) * std::pow(horizon_, -sigma);
}

AValue A_of(const Perturbation& a, cplx s) {
  const TransferChain chain(a);
  return {chain.A(s), chain.tail_bound(s.real())};
}

cplx B_of(const Perturbation& a, cplx s, double tol) { return TransferChain(a, tol).B(s); }
cplx C_of(const Perturbation& a, cplx s) { return TransferChain(a).C(s); }
cplx Z_of(const Perturbation& a, cplx s) { return TransferChain(a).Z(s); }

// ----------------------------------------------------------------- Diamond

std::string to_string(DiamondTrend t) {
  switch (t) {
    case DiamondTrend::kBounded: return "BOUNDED";
    case DiamondTrend::kLogDivergent: return "LOG-DIVERGENT";
    case DiamondTrend::kPowerDivergent: return "POWER-DIVERGENT";
  }
  return "BOUNDED";
}

json DiamondReport::to_json() const {
  json pts = json::array();
  for (const DiamondPoint& p : points) pts.push_back({p.Y, p.value});
  return {{"points", pts}, {"blocks", blocks}, {"slope", slope}, {"trend", to_string(trend)}};
}

namespace {

// Ein(w) = integral_0^w (1 - e^-t)/t dt.
double ein(double w) {
  if (w < 1.0) {
    double term = 1.0, sum = 0.0;
    for (int k = 1; k < 40; ++k) {
      term *= -w / k;
      sum -= term / k;
    }
    return sum;
  }
  return -std::expint(-w) + std::log(w) + std::numbers::egamma;
}

// Antiderivative of tau(y) / y^2.
double tau_over_square(double y) { return -tau(y) / y + ein(std::log(y)); }

// integral over [y0, y1] of |c + s tau(y)| y^-2 dy.
double segment(double y0, double y1, double c, double s) {
  if (!(y1 > y0)) return 0.0;
  if (s == 0.0) return std::abs(c) * (1.0 / y0 - 1.0 / y1);
  auto piece = [&](double a, double b) {
    const double v = c * (1.0 / a - 1.0 / b) + s * (tau_over_square(b) - tau_over_square(a));
    return std::abs(v);
  };
  const double f0 = c + s * tau(y0), f1 = c + s * tau(y1);
  if ((f0 >= 0.0) == (f1 >= 0.0)) return piece(y0, y1);
  double lo = std::log(y0), hi = std::log(y1);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((c + s * tau(std::exp(mid)) >= 0.0) == (f0 >= 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double root = std::exp(0.5 * (lo + hi));
  return piece(y0, root) + piece(root, y1);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

DiamondReport diamond_integral(const Perturbation& a, std::span<const double> Y_grid) {
  double s = 0.0;
  if (const auto& sp = a.measure.smooth()) {
    if (sp->kind() != SmoothPart::Kind::kTau) {
      throw UnsupportedError("diamond_integral: only tau-shaped smooth parts are supported");
    }
    s = sp->scale();
  }
  double y_max = std::numbers::e;
  for (double Y : Y_grid) y_max = std::max(y_max, Y);
  const int N = std::max(1, static_cast<int>(std::floor(std::log(y_max) + 1e-12)));

  // Query points: the grid, then the block ends e^n.
  struct Query {
    double y;
    std::size_t slot;
  };
  std::vector<Query> queries;
  for (std::size_t i = 0; i < Y_grid.size(); ++i) queries.push_back({Y_grid[i], i});
  for (int n = 1; n <= N; ++n) {
    queries.push_back({std::exp(static_cast<double>(n)), Y_grid.size() + static_cast<std::size_t>(n - 1)});
  }
  std::stable_sort(queries.begin(), queries.end(),
                   [](const Query& x, const Query& y) { return x.y < y.y; });

  const auto atoms = a.measure.atoms();
  const double e = std::numbers::e;
  std::size_t next = 0;
  double c = 0.0;
  for (; next < atoms.size() && atoms[next].location <= e; ++next) c += atoms[next].weight;
  double cur = e, acc = 0.0;
  std::vector<double> result(queries.size(), 0.0);
  for (const Query& q : queries) {
    if (q.y <= e) continue;
    for (; next < atoms.size() && atoms[next].location <= q.y; ++next) {
      acc += segment(cur, atoms[next].location, c, s);
      c += atoms[next].weight;
      cur = atoms[next].location;
    }
    acc += segment(cur, q.y, c, s);
    cur = q.y;
    result[q.slot] = acc;
  }

  DiamondReport r;
  for (std::size_t i = 0; i < Y_grid.size(); ++i) r.points.push_back({Y_grid[i], result[i]});
  r.blocks.assign(result.begin() + static_cast<std::ptrdiff_t>(Y_grid.size()), result.end());
  std::vector<double> ln, li;
  for (std::size_t n = 1; n < r.blocks.size(); ++n) {
    const double inc = r.blocks[n] - r.blocks[n - 1];
    if (inc > 1e-300) {
      ln.push_back(std::log(static_cast<double>(n)));
      li.push_back(std::log(inc));
    }
  }
  if (ln.size() < 2) {
    r.slope = 0.0;
    r.trend = DiamondTrend::kBounded;
    return r;
  }
  r.slope = least_squares_slope(ln, li);
  r.trend = r.slope < kBoundedSlope ? DiamondTrend::kBounded
            : r.slope < kPowerSlope ? DiamondTrend::kLogDivergent
                                    : DiamondTrend::kPowerDivergent;
  return r;
}

// ------------------------------------------------------------ line samples

std::string to_string(LineWhich w) {
  switch (w) {
    case LineWhich::kA: return "A";
    case LineWhich::kB: return "B";
    case LineWhich::kC: return "C";
    case LineWhich::kZ: return "Z";
  }
  return "A";
}

LineWhich line_which_from_string(const std::string& s) {
  if (s == "A") return LineWhich::kA;
  if (s == "B") return LineWhich::kB;
  if (s == "C") return LineWhich::kC;
  if (s == "Z") return LineWhich::kZ;
  throw DomainError("unknown line function: " + s);
}

void LineSamples::write_csv(std::ostream& out) const {
  CsvWriter w(out, {"t", "re", "im"});
  for (std::size_t i = 0; i < t.size(); ++i) {
    w.cell(t[i]).cell(values[i].real()).cell(values[i].imag());
    w.end_row();
  }
}

LineSamples sample_line(const Perturbation& a, LineWhich which, double sigma, double T,
                        double dt) {
  if (!(sigma >= 1.0)) throw DomainError("sample_line: sigma must be >= 1");
  if (!(dt > 0.0) || !(T >= 0.0)) throw DomainError("sample_line: need dt > 0 and T >= 0");
  const TransferChain chain(a);
  LineSamples L;
  L.sigma = sigma;
  L.dt = dt;
  L.which = which;
  const auto m = static_cast<long long>(std::llround(T / dt));
  const auto n = static_cast<std::size_t>(2 * m + 1);
  L.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) L.t[i] = static_cast<double>(static_cast<long long>(i) - m) * dt;
  L.values.resize(n);

  if (which != LineWhich::kA) {
    for (std::size_t i = 0; i < n; ++i) {
      const cplx s(sigma, L.t[i]);
      switch (which) {
        case LineWhich::kB: L.values[i] = chain.B(s); break;
        case LineWhich::kC: L.values[i] = chain.C(s); break;
        default: L.values[i] = chain.Z(s); break;
      }
    }
    return L;
  }

  // A on the line: rotate each atom's phasor step by step, re-anchored with
  // an exact exponential every kChunk points.
  constexpr std::size_t kChunk = 256;
  std::vector<double> logs, amps;
  for (const Atom& at : a.measure.atoms()) {
    logs.push_back(std::log(at.location));
    amps.push_back(at.weight * std::exp(-sigma * logs.back()));
  }
  const double tau_scale = a.measure.smooth() ? chain.tau_scale() : 0.0;
  std::vector<cplx> cur(logs.size()), rot(logs.size());
  for (std::size_t j = 0; j < logs.size(); ++j) rot[j] = std::polar(1.0, -logs[j] * dt);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = L.t[i];
    if (i % kChunk == 0) {
      for (std::size_t j = 0; j < logs.size(); ++j) cur[j] = amps[j] * std::polar(1.0, -logs[j] * t);
    } else {
      for (std::size_t j = 0; j < logs.size(); ++j) cur[j] *= rot[j];
    }
    KahanSum acc;
    for (const cplx& c : cur) acc.add(c);
    cplx v = acc.sum;
    if (tau_scale != 0.0) v += tau_scale * log_ratio(cplx(sigma, t));
    L.values[i] = v;
  }
  return L;
}

// ------------------------------------------------------------ Hölder modulus

double ModulusEstimate::at(double delta) const {
  if (deltas.empty()) return 0.0;
  if (delta <= deltas.front()) return omega.front();
  if (delta >= deltas.back()) return omega.back();
  const auto it = std::upper_bound(deltas.begin(), deltas.end(), delta);
  const auto i = static_cast<std::size_t>(it - deltas.begin());
  const double x0 = std::log(deltas[i - 1]), x1 = std::log(deltas[i]);
  const double w0 = omega[i - 1], w1 = omega[i];
  const double f = (std::log(delta) - x0) / (x1 - x0);
  if (w0 > 0.0 && w1 > 0.0) return std::exp(std::log(w0) + f * (std::log(w1) - std::log(w0)));
  return w0 + f * (w1 - w0);
}

json ModulusEstimate::to_json() const {
  json j = {{"deltas", deltas},
            {"omega", omega},
            {"omega_integral_partial", omega_integral_partial},
            {"dt", dt},
            {"fit_lo", fit_lo}};
  j["beta_hat"] = std::isfinite(beta_hat) ? json(beta_hat) : json(nullptr);
  return j;
}

ModulusEstimate holder_modulus(const LineSamples& L, std::span<const double> deltas,
                               const ModulusOptions& opt) {
  if (deltas.empty()) throw DomainError("holder_modulus: no deltas");
  ModulusEstimate r;
  r.deltas.assign(deltas.begin(), deltas.end());
  std::sort(r.deltas.begin(), r.deltas.end());
  r.dt = L.dt;
  r.fit_lo = opt.fit_lo;
  if (!(L.dt <= r.deltas.front() / 4.0 * (1.0 + 1e-12))) {
    throw ResolutionError("holder_modulus: dt = " + format_real(L.dt) +
                          " exceeds a quarter of the smallest delta");
  }
  const std::vector<cplx>& v = L.values;
  double running = 0.0;
  for (double d : r.deltas) {
    const auto K = static_cast<std::size_t>(std::floor(d / L.dt + 1e-9));
    const std::size_t stride = std::max<std::size_t>(1, (K + opt.max_lags - 1) / opt.max_lags);
    const std::size_t lags = K / stride;
    double w = 0.0;
    for (std::size_t k = 1; k <= lags; ++k) {
      const std::size_t gap = k * stride;
      for (std::size_t i = 0; i + gap < v.size(); i += stride) {
        w = std::max(w, std::abs(v[i + gap] - v[i]));
      }
    }
    running = std::max(running, w);
    r.omega.push_back(running);
  }
  // Trapezoid of omega(t)/t dt = omega d(log t) over deltas in [delta_min, 1].
  for (std::size_t i = 1; i < r.deltas.size() && r.deltas[i] <= 1.0 * (1.0 + 1e-12); ++i) {
    r.omega_integral_partial += 0.5 * (r.omega[i] + r.omega[i - 1]) *
                                std::log(r.deltas[i] / r.deltas[i - 1]);
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r.deltas.size(); ++i) {
    if (r.deltas[i] >= opt.fit_lo * (1.0 - 1e-12) && r.omega[i] > 0.0) {
      lx.push_back(std::log(r.deltas[i]));
      ly.push_back(std::log(r.omega[i]));
    }
  }
  r.beta_hat = lx.size() >= 2 ? least_squares_slope(lx, ly)
                              : std::numeric_limits<double>::infinity();
  return r;
}

json CModulusReport::to_json() const {
  return {{"k_hat", k_hat},   {"k_hat_doubled", k_hat_doubled}, {"q90", q90},
          {"stable", stable}, {"pairs", pairs},                 {"skipped", skipped}};
}

CModulusReport c_modulus_bound_check(const Perturbation& a, std::span<const double> sigma_list,
                                     std::size_t n_pairs, const ModulusEstimate& omega, double T,
                                     std::uint64_t seed) {
  if (omega.deltas.empty()) throw DomainError("c_modulus_bound_check: empty modulus");
  const TransferChain chain(a);
  const CounterRng rng(seed);
  const double lo = std::log(omega.deltas.front()), hi = std::log(omega.deltas.back());
  CModulusReport r;
  std::vector<double> ratios;
  std::uint64_t counter = 0;
  for (std::size_t i = 0; i < 2 * n_pairs; ++i) {
    for (double sigma : sigma_list) {
      const double t = T * (2.0 * rng.uniform(counter++) - 1.0);
      const double d = std::exp(lo + (hi - lo) * rng.uniform(counter++));
      const double w = omega.at(d);
      ++r.pairs;
      if (!(w > 0.0)) {
        ++r.skipped;
        continue;
      }
      const double ratio = std::abs(chain.C(cplx(sigma, t + d)) - chain.C(cplx(sigma, t))) / w;
      ratios.push_back(ratio);
      if (i < n_pairs) r.k_hat = std::max(r.k_hat, ratio);
      r.k_hat_doubled = std::max(r.k_hat_doubled, ratio);
    }
  }
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    r.q90 = ratios[static_cast<std::size_t>(0.9 * static_cast<double>(ratios.size() - 1))];
  }
  r.stable = r.k_hat_doubled <= 1.1 * r.k_hat;
  return r;
}

}  // namespace beurling
