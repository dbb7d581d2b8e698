#include "beurling/step_function.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include "beurling/csv.hpp"
#include "beurling/prime_systems.hpp"

namespace beurling {

namespace {

// Sort by location and add the weights of equal locations.
std::vector<Atom> canonical_atoms(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!out.empty() && out.back().location == a.location) {
      out.back().weight += a.weight;
    } else {
      out.push_back(a);
    }
  }
  return out;
}

void check_location(double loc) {
  if (!std::isfinite(loc) || !(loc > 1.0)) {
    throw DomainError("atom location must be finite and > 1, got " +
                      format_real(loc));
  }
}

double parse_real(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
      throw DomainError("not a decimal number: " + s);
    }
    return v;
  }
  return j.get<double>();
}

json atoms_to_json(std::span<const Atom> atoms) {
  json arr = json::array();
  for (const Atom& a : atoms) {
    arr.push_back(json::array({format_real(a.location), a.weight}));
  }
  return arr;
}

std::vector<Atom> atoms_from_json(const json& j) {
  std::vector<Atom> atoms;
  if (!j.contains("atoms")) return atoms;
  for (const json& pair : j.at("atoms")) {
    if (!pair.is_array() || pair.size() != 2) {
      throw DomainError("atoms entries must be [location, weight]");
    }
    atoms.push_back({parse_real(pair[0]), parse_real(pair[1])});
  }
  return atoms;
}

}  // namespace

// ---------------------------------------------------------------- SmoothPart

SmoothPart SmoothPart::tau(double scale) {
  SmoothPart p;
  p.kind_ = Kind::kTau;
  p.scale_ = scale;
  return p;
}

SmoothPart SmoothPart::ramps(std::vector<Knot> knots) {
  for (const Knot& k : knots) {
    if (!std::isfinite(k.x) || k.x < 1.0 || !std::isfinite(k.slope)) {
      throw DomainError("ramp knots must be finite with x >= 1");
    }
  }
  std::sort(knots.begin(), knots.end(),
            [](const Knot& a, const Knot& b) { return a.x < b.x; });
  SmoothPart p;
  p.kind_ = Kind::kRamps;
  p.scale_ = 1.0;
  for (const Knot& k : knots) {
    if (!p.knots_.empty() && p.knots_.back().x == k.x) {
      p.knots_.back().slope += k.slope;
    } else {
      p.knots_.push_back(k);
    }
  }
  p.slope_prefix_.resize(p.knots_.size());
  p.moment_prefix_.resize(p.knots_.size());
  double s = 0.0, m = 0.0;
  for (std::size_t i = 0; i < p.knots_.size(); ++i) {
    s += p.knots_[i].slope;
    m += p.knots_[i].slope * p.knots_[i].x;
    p.slope_prefix_[i] = s;
    p.moment_prefix_[i] = m;
  }
  return p;
}

std::pair<double, double> SmoothPart::ramp_coefficients(double x) const {
  const auto it = std::upper_bound(
      knots_.begin(), knots_.end(), x,
      [](double v, const Knot& k) { return v < k.x; });
  if (it == knots_.begin()) return {0.0, 0.0};
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return {slope_prefix_[i], moment_prefix_[i]};
}

double SmoothPart::value(double x) const {
  if (kind_ == Kind::kTau) return scale_ == 0.0 ? 0.0 : scale_ * beurling::tau(x);
  const auto [s, m] = ramp_coefficients(x);
  return s * x - m;
}

double SmoothPart::density(double x) const {
  if (kind_ == Kind::kTau) {
    if (x <= 1.0) return scale_;
    const double w = std::log(x);
    return scale_ * (-std::expm1(-w)) / w;
  }
  return ramp_coefficients(x).first;
}

bool SmoothPart::nondecreasing() const {
  if (kind_ == Kind::kTau) return scale_ >= 0.0;
  return std::all_of(slope_prefix_.begin(), slope_prefix_.end(),
                     [](double s) { return s >= 0.0; });
}

SmoothPart SmoothPart::scaled(double c) const {
  if (kind_ == Kind::kTau) return tau(scale_ * c);
  std::vector<Knot> k(knots_);
  for (Knot& kn : k) kn.slope *= c;
  return ramps(std::move(k));
}

json SmoothPart::to_json() const {
  if (kind_ == Kind::kTau) {
    return {{"kind", "tau"}, {"params", {{"scale", scale_}}}};
  }
  json knots = json::array();
  for (const Knot& k : knots_) {
    knots.push_back(json::array({format_real(k.x), k.slope}));
  }
  return {{"kind", "ramps"}, {"params", {{"knots", knots}}}};
}

SmoothPart SmoothPart::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  if (kind == "tau") return tau(params.value("scale", 1.0));
  if (kind == "ramps") {
    std::vector<Knot> knots;
    for (const json& k : params.at("knots")) {
      knots.push_back({parse_real(k.at(0)), parse_real(k.at(1))});
    }
    return ramps(std::move(knots));
  }
  throw DomainError("unknown smooth part kind: " + kind);
}

// -------------------------------------------------------------- StepFunction

StepFunction::StepFunction(std::vector<Atom> atoms, double base,
                           std::optional<SmoothPart> smooth, double horizon)
    : base_(base), smooth_(std::move(smooth)), horizon_(horizon) {
  for (const Atom& a : atoms) {
    check_location(a.location);
    if (!std::isfinite(a.weight) || !(a.weight > 0.0)) {
      throw DomainError("step function weights must be finite and > 0");
    }
  }
  if (!std::isfinite(base)) throw DomainError("base value must be finite");
  if (!(horizon >= 1.0)) throw DomainError("horizon must be >= 1");
  if (smooth_ && !smooth_->nondecreasing()) {
    throw DomainError("smooth part of a step function must be nondecreasing");
  }
  atoms_ = canonical_atoms(std::move(atoms));
  prefix_.resize(atoms_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    s += atoms_[i].weight;
    prefix_[i] = s;
  }
}

double StepFunction::atomic_part(double x) const {
  const auto it = std::upper_bound(
      atoms_.begin(), atoms_.end(), x,
      [](double v, const Atom& a) { return v < a.location; });
  if (it == atoms_.begin()) return 0.0;
  return prefix_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double StepFunction::eval(double x) const {
  if (!(x >= 1.0)) throw DomainError("eval_step: x must be >= 1");
  double v = base_ + atomic_part(x);
  if (smooth_) v += smooth_->value(x);
  return v;
}

double StepFunction::eval_left(double x) const {
  if (!(x >= 1.0)) throw DomainError("eval_step: x must be >= 1");
  if (x == 1.0) return 0.0;
  const auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), x,
      [](const Atom& a, double v) { return a.location < v; });
  double v = base_;
  if (it != atoms_.begin()) {
    v += prefix_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
  }
  if (smooth_) v += smooth_->value(x);
  return v;
}

std::vector<double> StepFunction::breakpoints() const {
  std::vector<double> b;
  b.reserve(atoms_.size());
  for (const Atom& a : atoms_) b.push_back(a.location);
  if (smooth_ && smooth_->kind() == SmoothPart::Kind::kRamps) {
    for (const Knot& k : smooth_->knots()) b.push_back(k.x);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  return b;
}

json StepFunction::to_json() const {
  json j = {{"base", base_}, {"atoms", atoms_to_json(atoms_)}};
  if (smooth_) j["smooth"] = smooth_->to_json();
  if (std::isfinite(horizon_)) j["horizon"] = format_real(horizon_);
  return j;
}

StepFunction StepFunction::from_json(const json& j) {
  std::optional<SmoothPart> smooth;
  if (j.contains("smooth") && !j.at("smooth").is_null()) {
    smooth = SmoothPart::from_json(j.at("smooth"));
  }
  const double horizon =
      j.contains("horizon") ? parse_real(j.at("horizon")) : kInfinity;
  return StepFunction(atoms_from_json(j), j.value("base", 0.0), smooth,
                      horizon);
}

// ------------------------------------------------------------- SignedMeasure

SignedMeasure::SignedMeasure(std::vector<Atom> atoms,
                             std::optional<SmoothPart> smooth)
    : smooth_(std::move(smooth)) {
  for (const Atom& a : atoms) {
    check_location(a.location);
    if (!std::isfinite(a.weight)) {
      throw DomainError("measure weights must be finite");
    }
  }
  std::vector<Atom> merged = canonical_atoms(std::move(atoms));
  for (const Atom& a : merged) {
    if (a.weight != 0.0) atoms_.push_back(a);
  }
  if (smooth_ && smooth_->kind() == SmoothPart::Kind::kTau &&
      smooth_->scale() == 0.0) {
    smooth_.reset();
  }
  prefix_.resize(atoms_.size());
  abs_prefix_.resize(atoms_.size());
  double s = 0.0, t = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    s += atoms_[i].weight;
    t += std::abs(atoms_[i].weight);
    prefix_[i] = s;
    abs_prefix_[i] = t;
  }
}

std::pair<std::size_t, std::size_t> SignedMeasure::atom_range(double y0,
                                                              double y1) const {
  auto upper = [&](double x) {
    return static_cast<std::size_t>(
        std::upper_bound(atoms_.begin(), atoms_.end(), x,
                         [](double v, const Atom& a) { return v < a.location; }) -
        atoms_.begin());
  };
  return {upper(y0), upper(y1)};
}

double SignedMeasure::cumulative(double x) const {
  const auto [lo, hi] = atom_range(1.0, x);
  double v = hi > 0 ? prefix_[hi - 1] : 0.0;
  (void)lo;
  if (smooth_) v += smooth_->value(std::max(x, 1.0));
  return v;
}

double SignedMeasure::total_variation(double y0, double y1) const {
  const auto [lo, hi] = atom_range(y0, y1);
  double tv = 0.0;
  if (hi > lo) tv = abs_prefix_[hi - 1] - (lo > 0 ? abs_prefix_[lo - 1] : 0.0);
  if (smooth_ && y1 > y0) {
    const SmoothPart& sp = *smooth_;
    if (sp.kind() == SmoothPart::Kind::kTau) {
      tv += std::abs(sp.scale()) * (beurling::tau(y1) - beurling::tau(y0));
    } else {
      auto f = [&](double y) { return std::abs(sp.density(y)); };
      std::vector<double> cuts{y0};
      for (const Knot& k : sp.knots()) {
        if (k.x > y0 && k.x < y1) cuts.push_back(k.x);
      }
      cuts.push_back(y1);
      // |density| is constant between knots.
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        tv += f(0.5 * (cuts[i] + cuts[i + 1])) * (cuts[i + 1] - cuts[i]);
      }
    }
  }
  return tv;
}

json SignedMeasure::to_json() const {
  json j = {{"base", 0.0}, {"atoms", atoms_to_json(atoms_)}};
  if (smooth_) j["smooth"] = smooth_->to_json();
  return j;
}

SignedMeasure SignedMeasure::from_json(const json& j) {
  std::optional<SmoothPart> smooth;
  if (j.contains("smooth") && !j.at("smooth").is_null()) {
    smooth = SmoothPart::from_json(j.at("smooth"));
  }
  return SignedMeasure(atoms_from_json(j), smooth);
}

// ------------------------------------------------------------- combine_*

namespace {

template <class Pick>
StepFunction combine(const StepFunction& f, const StepFunction& g, Pick pick) {
  if (!f.purely_atomic() || !g.purely_atomic()) {
    throw UnsupportedError("combine_max/min need purely atomic inputs");
  }
  const double hf = f.horizon(), hg = g.horizon();
  const bool same = (hf == hg) ||
                    (std::isfinite(hf) && std::isfinite(hg) &&
                     std::abs(hf - hg) <= 1e-12 * std::max(hf, hg));
  if (!same) {
    throw DomainError("combine_max/min: truncation horizons differ (" +
                      format_real(hf) + " vs " + format_real(hg) + ")");
  }
  std::vector<double> points;
  points.reserve(f.atoms().size() + g.atoms().size());
  for (const Atom& a : f.atoms()) points.push_back(a.location);
  for (const Atom& a : g.atoms()) points.push_back(a.location);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const double base = pick(f.base(), g.base());
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  double previous = base;
  // Walk both atom lists in step with the merged breakpoints.
  std::size_t i = 0, j = 0;
  double fv = f.base(), gv = g.base();
  const auto fa = f.atoms();
  const auto ga = g.atoms();
  for (double p : points) {
    while (i < fa.size() && fa[i].location <= p) fv += fa[i++].weight;
    while (j < ga.size() && ga[j].location <= p) gv += ga[j++].weight;
    const double v = pick(fv, gv);
    const double jump = v - previous;
    if (jump > 0.0) atoms.push_back({p, jump});
    previous = v;
  }
  return StepFunction(std::move(atoms), base, std::nullopt, hf);
}

}  // namespace

StepFunction combine_max(const StepFunction& f, const StepFunction& g) {
  return combine(f, g, [](double a, double b) { return std::max(a, b); });
}

StepFunction combine_min(const StepFunction& f, const StepFunction& g) {
  return combine(f, g, [](double a, double b) { return std::min(a, b); });
}

}  // namespace beurling
