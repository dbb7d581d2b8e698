#include "beurling/integer_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "beurling/csv.hpp"

namespace beurling {

IntegerMultiset::IntegerMultiset(std::vector<LatticeEntry> entries, double horizon)
    : entries_(std::move(entries)), horizon_(horizon) {
  if (entries_.empty() || entries_.front().value != 1.0) {
    throw DomainError("IntegerMultiset: first entry must be the empty product 1");
  }
  prefix_.reserve(entries_.size());
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i > 0 && !(entries_[i].value > entries_[i - 1].value)) {
      throw DomainError("IntegerMultiset: values must be strictly increasing");
    }
    if (entries_[i].value > horizon_) {
      throw DomainError("IntegerMultiset: value beyond horizon");
    }
    acc += entries_[i].multiplicity;
    prefix_.push_back(acc);
  }
}

double IntegerMultiset::count(double x) const {
  if (x > horizon_) {
    throw DomainError("count: x = " + format_real(x) + " beyond horizon " + format_real(horizon_));
  }
  const auto it = std::upper_bound(entries_.begin(), entries_.end(), x,
                                   [](double v, const LatticeEntry& e) { return v < e.value; });
  const auto n = static_cast<std::size_t>(it - entries_.begin());
  return n == 0 ? 0.0 : static_cast<double>(prefix_[n - 1]);
}

StepFunction IntegerMultiset::to_step_function() const {
  std::vector<Atom> atoms;
  atoms.reserve(entries_.size());
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    atoms.push_back({entries_[i].value, static_cast<double>(entries_[i].multiplicity)});
  }
  return StepFunction(std::move(atoms), static_cast<double>(entries_.front().multiplicity),
                      std::nullopt, horizon_);
}

void IntegerMultiset::write_csv(std::ostream& out) const {
  CsvWriter w(out, {"value", "multiplicity"});
  for (const LatticeEntry& e : entries_) {
    w.cell(e.value).cell(static_cast<long long>(e.multiplicity));
    w.end_row();
  }
}

// ------------------------------------------------------------- enumeration

namespace {

struct Generator {
  double value;
  std::uint64_t copies;
};

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw EvaluationError("generate: multiplicity overflows 64 bits");
  }
  return r;
}

// C(e + m - 1, e), number of multisets of size e from m identical slots.
std::uint64_t multiset_count(std::uint64_t m, std::uint64_t e) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= e; ++i) {
    r = checked_mul(r, m - 1 + i) / i;
  }
  return r;
}

std::vector<Generator> generators_of(const StepFunction& primes) {
  if (!primes.purely_atomic()) {
    throw UnsupportedError("generate: system has a continuous part; use the analytic module");
  }
  std::vector<Generator> gens;
  for (const Atom& a : primes.atoms()) {
    const double m = std::round(a.weight);
    if (std::abs(a.weight - m) > 1e-12 * std::max(1.0, m) || m < 1.0) {
      throw UnsupportedError("generate: atom weight " + format_real(a.weight) +
                             " is not a positive integer");
    }
    gens.push_back({a.location, static_cast<std::uint64_t>(m)});
  }
  return gens;
}

class Enumerator {
 public:
  Enumerator(const std::vector<Generator>& gens, double X) : gens_(gens), X_(X) {}

  // Appends products to out, stopping once out holds more than limit entries.
  bool collect(std::vector<LatticeEntry>& out, std::size_t limit) {
    out_ = &out;
    limit_ = limit;
    return visit(0, 1.0, 1);
  }

  // Number of products, capped at limit + 1.
  std::size_t count(std::size_t limit) {
    out_ = nullptr;
    limit_ = limit;
    counted_ = 0;
    visit(0, 1.0, 1);
    return counted_;
  }

 private:
  bool visit(std::size_t start, double v, std::uint64_t mult) {
    if (out_) {
      if (out_->size() >= limit_) return false;
      out_->push_back({v, mult});
    } else {
      if (counted_ > limit_) return false;
      ++counted_;
    }
    for (std::size_t i = start; i < gens_.size(); ++i) {
      const Generator& g = gens_[i];
      if (v * g.value > X_) break;
      double w = v;
      for (std::uint64_t e = 1;; ++e) {
        w *= g.value;
        if (w > X_) break;
        const std::uint64_t m =
            g.copies == 1 ? mult : checked_mul(mult, multiset_count(g.copies, e));
        if (!visit(i + 1, w, m)) return false;
      }
    }
    return true;
  }

  const std::vector<Generator>& gens_;
  double X_;
  std::vector<LatticeEntry>* out_ = nullptr;
  std::size_t limit_ = 0;
  std::size_t counted_ = 0;
};

// Largest horizon (to ~1e-3 in log) whose product count fits the budget.
double reached_horizon(const std::vector<Generator>& gens, double X, std::size_t budget) {
  double lo = 0.0, hi = std::log(X);
  for (int it = 0; it < 40 && hi - lo > 1e-3 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    Enumerator e(gens, std::exp(mid));
    if (e.count(budget) <= budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(lo);
}

}  // namespace

IntegerMultiset generate(const StepFunction& primes, double X, const GenerateOptions& opt) {
  if (!(X >= 1.0)) throw DomainError("generate: X must be >= 1");
  if (X > primes.horizon()) {
    throw DomainError("generate: X beyond the system horizon " + format_real(primes.horizon()));
  }
  std::vector<Generator> gens = generators_of(primes);
  std::vector<LatticeEntry> raw;
  Enumerator e(gens, X);
  if (!e.collect(raw, opt.budget)) {
    raw.clear();
    raw.shrink_to_fit();
    const double reached = reached_horizon(gens, X, opt.budget);
    throw CapacityError("generate: more than " + std::to_string(opt.budget) +
                            " products below X; budget reached at X = " + format_real(reached),
                        reached);
  }
  std::sort(raw.begin(), raw.end(),
            [](const LatticeEntry& a, const LatticeEntry& b) { return a.value < b.value; });
  // Merge values whose logs agree within merge_tol of the group's first value.
  std::vector<LatticeEntry> merged;
  merged.reserve(raw.size());
  double group_log = 0.0;
  for (const LatticeEntry& x : raw) {
    const double lx = std::log(x.value);
    if (!merged.empty() && lx - group_log < opt.merge_tol) {
      merged.back().multiplicity += x.multiplicity;
    } else {
      merged.push_back(x);
      group_log = lx;
    }
  }
  return IntegerMultiset(std::move(merged), X);
}

IntegerMultiset generate(const GenPrimeSystem& p, double X, const GenerateOptions& opt) {
  return generate(p.counting, X, opt);
}

// ---------------------------------------------------------------- density

std::string to_string(Trend t) {
  switch (t) {
    case Trend::kConvergent: return "CONVERGENT";
    case Trend::kDivergent: return "DIVERGENT";
    case Trend::kVanishing: return "VANISHING";
    case Trend::kOscillating: return "OSCILLATING";
    case Trend::kUndecided: return "UNDECIDED";
  }
  return "UNDECIDED";
}

json DensityReport::to_json() const {
  return {{"estimate", estimate},
          {"window", {x_lo, x_hi}},
          {"trend", to_string(trend)},
          {"residuals", residuals},
          {"liminf", liminf},
          {"limsup", limsup},
          {"slope", slope},
          {"diagnostics", diagnostics}};
}

DensityReport classify_ratio(std::span<const double> log_x, std::span<const double> ratio,
                             const DensityOptions& opt) {
  if (log_x.size() != ratio.size() || log_x.empty()) {
    throw DomainError("classify_ratio: need matching nonempty samples");
  }
  DensityReport r;
  r.log_x.assign(log_x.begin(), log_x.end());
  r.ratio.assign(ratio.begin(), ratio.end());
  r.x_lo = std::exp(log_x.front());
  r.x_hi = std::exp(log_x.back());
  const double decade = std::log(10.0);
  const double top = log_x.back();
  const int decades = static_cast<int>(std::floor((top - log_x.front()) / decade + 1e-9));
  if (decades < 1) {
    r.estimate = ratio.back();
    r.diagnostics = "window shorter than one decade";
    return r;
  }
  // Decade k (k = 0 is the last) covers (top - (k+1) decade, top - k decade].
  std::vector<double> sum(static_cast<std::size_t>(decades), 0.0);
  std::vector<int> cnt(static_cast<std::size_t>(decades), 0);
  for (std::size_t i = 0; i < log_x.size(); ++i) {
    const double back = (top - log_x[i]) / decade;
    auto k = static_cast<int>(std::floor(back - 1e-12));
    if (k < 0) k = 0;
    if (k >= decades) continue;
    sum[static_cast<std::size_t>(k)] += ratio[i];
    ++cnt[static_cast<std::size_t>(k)];
  }
  for (int k = decades - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    r.residuals.push_back(cnt[idx] ? sum[idx] / cnt[idx] : 0.0);
  }
  const auto& m = r.residuals;
  r.estimate = m.back();
  r.liminf = *std::min_element(m.begin(), m.end());
  r.limsup = *std::max_element(m.begin(), m.end());

  if (decades < opt.min_decades) {
    r.diagnostics = "window spans " + std::to_string(decades) + " decades; need " +
                    std::to_string(opt.min_decades);
    return r;
  }
  // Log-log slope of decade means against decade centres.
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t d = 0; d < m.size(); ++d) {
      if (!(m[d] > 0.0)) continue;
      const double x = top - (static_cast<double>(m.size() - d) - 0.5) * decade;
      const double y = std::log(m[d]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
    }
    const double den = n * sxx - sx * sx;
    r.slope = (n >= 2 && den > 0) ? (n * sxy - sx * sy) / den : 0.0;
  }
  const double last = m[m.size() - 1], prev = m[m.size() - 2];
  if (!(last > 0.0)) {
    r.trend = Trend::kVanishing;
    r.diagnostics = "last decade mean is zero";
    return r;
  }
  const double spread = std::abs(last - prev) / std::abs(last);
  bool rise = false, fall = false;
  for (std::size_t d = 1; d < m.size(); ++d) {
    const double scale = std::max(std::abs(m[d]), std::abs(m[d - 1]));
    if (m[d] - m[d - 1] > opt.spread_tol * scale) rise = true;
    if (m[d - 1] - m[d] > opt.spread_tol * scale) fall = true;
  }
  if (spread < opt.spread_tol) {
    r.trend = Trend::kConvergent;
  } else if (rise && fall) {
    r.trend = Trend::kOscillating;
  } else if (r.slope < -opt.slope_tol) {
    r.trend = Trend::kVanishing;
  } else if (r.slope > opt.slope_tol) {
    r.trend = Trend::kDivergent;
  } else {
    r.trend = Trend::kUndecided;
  }
  r.diagnostics = "last-two-decade spread " + format_real(spread);
  return r;
}

namespace {

template <class F>
DensityReport sample_and_classify(F&& n_of, double x_hi, const DensityOptions& opt) {
  if (!(x_hi > opt.x_lo)) {
    DensityReport r;
    r.x_lo = opt.x_lo;
    r.x_hi = x_hi;
    r.diagnostics = "horizon below x_lo";
    return r;
  }
  const double top = std::log(x_hi), bottom = std::log(opt.x_lo);
  const double step = std::log(10.0) / opt.points_per_decade;
  const auto n = static_cast<std::size_t>(std::floor((top - bottom) / step + 1e-9));
  std::vector<double> lx, ratio;
  lx.reserve(n + 1);
  ratio.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double l = top - static_cast<double>(n - i) * step;
    const double x = i == n ? x_hi : std::exp(l);
    lx.push_back(l);
    ratio.push_back(n_of(x) / x);
  }
  return classify_ratio(lx, ratio, opt);
}

}  // namespace

DensityReport density_estimate(const IntegerMultiset& n, const DensityOptions& opt) {
  return sample_and_classify([&](double x) { return n.count(x); }, n.horizon(), opt);
}

DensityReport density_estimate(const StepFunction& n, double x_hi, const DensityOptions& opt) {
  return sample_and_classify([&](double x) { return n.eval(x); }, x_hi, opt);
}

double euler_density(std::span<const double> removed, std::span<const double> added) {
  double r = 1.0, a = 1.0;
  for (double p : removed) {
    if (!(p > 1.0)) throw DomainError("euler_density: entries must be > 1");
    r *= 1.0 - 1.0 / p;
  }
  for (double p : added) {
    if (!(p > 1.0)) throw DomainError("euler_density: entries must be > 1");
    a *= 1.0 - 1.0 / p;
  }
  return r / a;
}

std::vector<PartialDensityPoint> partial_density_product(const GenPrimeSystem& pplus,
                                                         const GenPrimeSystem& p1,
                                                         std::span<const double> Y_grid) {
  if (!pplus.counting.purely_atomic() || !p1.counting.purely_atomic()) {
    throw UnsupportedError("partial_density_product: systems must be atomic");
  }
  if (!std::is_sorted(Y_grid.begin(), Y_grid.end())) {
    throw DomainError("partial_density_product: Y grid must be increasing");
  }
  const double horizon = std::min(pplus.counting.horizon(), p1.counting.horizon());
  std::vector<PartialDensityPoint> out;
  const auto a = pplus.counting.atoms();
  const auto b = p1.counting.atoms();
  std::size_t i = 0, j = 0;
  double log_plus = 0, log_ref = 0, sum_plus = 0, sum_ref = 0;
  for (double Y : Y_grid) {
    if (Y > horizon) {
      throw DomainError("partial_density_product: Y = " + format_real(Y) + " beyond horizon");
    }
    for (; i < a.size() && a[i].location <= Y; ++i) {
      log_plus -= a[i].weight * std::log1p(-1.0 / a[i].location);
      sum_plus += a[i].weight / a[i].location;
    }
    for (; j < b.size() && b[j].location <= Y; ++j) {
      log_ref += b[j].weight * std::log1p(-1.0 / b[j].location);
      sum_ref += b[j].weight / b[j].location;
    }
    const double lv = log_plus + log_ref;
    out.push_back({Y, std::exp(lv), lv, sum_plus, sum_ref});
  }
  return out;
}

StepFunction reference_convolution(const IntegerMultiset& g) {
  std::vector<Atom> atoms;
  std::vector<Knot> knots;
  const auto e = g.entries();
  knots.push_back({1.0, static_cast<double>(e.front().multiplicity)});
  for (std::size_t i = 1; i < e.size(); ++i) {
    const auto m = static_cast<double>(e[i].multiplicity);
    atoms.push_back({e[i].value, m});
    knots.push_back({e[i].value, m / e[i].value});
  }
  return StepFunction(std::move(atoms), static_cast<double>(e.front().multiplicity),
                      SmoothPart::ramps(std::move(knots)), g.horizon());
}

StepFunction associated_counting(const Perturbation& a, double X, const GenerateOptions& opt) {
  if (!a.measure.purely_atomic()) {
    throw UnsupportedError("associated_counting: perturbation has a continuous part");
  }
  if (a.reference == Reference::kTau) {
    std::vector<Atom> atoms(a.measure.atoms().begin(), a.measure.atoms().end());
    for (const Atom& x : atoms) {
      if (x.weight < 0.0) {
        throw UnsupportedError("associated_counting: negative atom at " + format_real(x.location));
      }
    }
    const StepFunction g(std::move(atoms));
    return reference_convolution(generate(g, X, opt));
  }
  if (X > a.horizon) {
    throw DomainError("associated_counting: X beyond the perturbation horizon");
  }
  std::vector<Atom> atoms(a.measure.atoms().begin(), a.measure.atoms().end());
  for (std::uint64_t p : sieve_primes(static_cast<std::uint64_t>(std::floor(a.horizon)))) {
    atoms.push_back({static_cast<double>(p), 1.0});
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& x, const Atom& y) { return x.location < y.location; });
  std::vector<Atom> merged;
  for (const Atom& x : atoms) {
    if (!merged.empty() && merged.back().location == x.location) {
      merged.back().weight += x.weight;
    } else {
      merged.push_back(x);
    }
  }
  std::vector<Atom> positive;
  for (const Atom& x : merged) {
    if (x.weight < -1e-12) {
      throw UnsupportedError("associated_counting: negative prime weight at " +
                             format_real(x.location));
    }
    if (x.weight > 1e-12) positive.push_back(x);
  }
  return generate(StepFunction(std::move(positive), 0.0, std::nullopt, a.horizon), X, opt)
      .to_step_function();
}

}  // namespace beurling
