#include "rangeshift/thresholds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "rangeshift/error.hpp"

namespace rangeshift {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  if (n == 0) return;
  const std::size_t w = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

OrderedFamily OrderedFamily::amplitude(double a, double b) {
  std::ostringstream os;
  os << "sigma*chi[" << a << "," << b << "]";
  return {os.str(), [a, b](double s) { return InitialDatum::box(s, a, b); }};
}

OrderedFamily OrderedFamily::width(double amplitude, double center) {
  std::ostringstream os;
  os << amplitude << "*chi[" << center << "-sigma," << center << "+sigma]";
  return {os.str(), [amplitude, center](double s) { return InitialDatum::box(amplitude, center - s, center + s); }};
}

FamilyCheck check_family(const OrderedFamily& family, const std::vector<double>& sigmas) {
  FamilyCheck chk;
  std::vector<double> s = sigmas;
  std::sort(s.begin(), s.end());
  // fine sampling mesh over the union of supports
  auto mesh_for = [&](const InitialDatum& a, const InitialDatum& b) {
    double lo = -50.0, hi = 50.0;
    if (a.support() && b.support()) {
      lo = std::min(a.support()->first, b.support()->first) - 1.0;
      hi = std::max(a.support()->second, b.support()->second) + 1.0;
    }
    std::vector<double> z(200001);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = lo + (hi - lo) * static_cast<double>(i) / (z.size() - 1);
    return z;
  };
  auto l1 = [&](const InitialDatum& a, const InitialDatum& b, bool& ordered, bool& strict) {
    const std::vector<double> z = mesh_for(a, b);
    const double h = z[1] - z[0];
    double sum = 0.0;
    ordered = true;
    strict = false;
    for (const double x : z) {
      const double d = b(x) - a(x);
      if (d < 0.0) ordered = false;
      if (d > 0.0) strict = true;
      sum += std::abs(d) * h;
    }
    return sum;
  };
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    bool ordered = false, strict = false;
    l1(family.generator(s[i]), family.generator(s[i + 1]), ordered, strict);
    if (!ordered || !strict) {
      chk.ordered = false;
      std::ostringstream os;
      os << "ordering fails between sigma = " << s[i] << " and " << s[i + 1];
      chk.detail = os.str();
    }
  }
  if (!s.empty()) {
    const double base = s[s.size() / 2];
    double prev = std::numeric_limits<double>::infinity();
    for (const double h : {1e-1, 1e-2, 1e-3}) {
      bool ordered = false, strict = false;
      const double d = l1(family.generator(base), family.generator(base + h), ordered, strict);
      chk.l1_steps.push_back(d);
      if (d > prev) chk.continuous = false;
      prev = d;
    }
    const double scale = std::max(chk.l1_steps.front(), 1e-300);
    if (chk.l1_steps.back() > 0.05 * scale) chk.continuous = false;
    if (!chk.continuous && chk.detail.empty()) chk.detail = "L1 distance does not shrink with the sigma step";
  }
  return chk;
}

namespace {

Probe run_probe(const InitialDatum& u0, const ShiftedReaction& reaction, double c, const Grid1D& grid,
                SolverConfig solver, const ClassifierConfig& classifier, const References& refs, double param,
                double max_factor) {
  // One run to the largest horizon is equivalent to successive doublings:
  // classification is causal, so a verdict settled by t is settled in any horizon >= t.
  ClassifierConfig cfg = classifier;
  cfg.horizon = classifier.horizon * max_factor;
  solver.keep_fields = false;
  const ClassifiedRun run = run_and_classify(u0, reaction, c, grid, solver, refs, cfg);
  const Outcome& o = run.outcome;
  Probe p;
  p.param = param;
  p.verdict = o.verdict;
  p.settled = o.settled();
  p.decided_at = p.settled && o.resolution ? o.resolved_at : o.decided_at;
  p.min_dist_ground = o.min_dist_ground;
  p.t_min_dist_ground = o.t_min_dist_ground;
  if (p.settled) {
    double h = classifier.horizon;
    while (h < p.decided_at - 1e-9 && h < cfg.horizon) h *= 2.0;
    p.horizon_used = std::min(h, cfg.horizon);
  } else {
    p.horizon_used = cfg.horizon;
    // a Grounding verdict without resolution carries no side information
    p.settled.reset();
  }
  return p;
}

class Bisection {
 public:
  Bisection(std::function<Probe(double)> probe, bool spread_high, int workers)
      : probe_(std::move(probe)), spread_high_(spread_high), workers_(std::max(1, workers)) {}

  void evaluate(const std::vector<double>& params) {
    std::vector<double> todo;
    for (const double p : params) {
      if (!cache_.count(p) && std::find(todo.begin(), todo.end(), p) == todo.end()) todo.push_back(p);
    }
    std::vector<Probe> out(todo.size());
    parallel_for(todo.size(), workers_, [&](std::size_t i) { out[i] = probe_(todo[i]); });
    for (std::size_t i = 0; i < todo.size(); ++i) cache_[todo[i]] = out[i];
  }

  const Probe& at(double p) const { return cache_.at(p); }

  bool high_side(const Probe& p) const {
    return *p.settled == (spread_high_ ? Verdict::Spreading : Verdict::Extinction);
  }

  void check_monotone() const {
    double max_low = -std::numeric_limits<double>::infinity();
    double min_high = std::numeric_limits<double>::infinity();
    for (const auto& [param, p] : cache_) {
      if (!p.settled) continue;
      if (high_side(p)) {
        min_high = std::min(min_high, param);
      } else {
        max_low = std::max(max_low, param);
      }
    }
    if (max_low > min_high) {
      std::ostringstream os;
      os << (spread_high_ ? "Extinction" : "Spreading") << " at " << max_low << " above "
         << (spread_high_ ? "Spreading" : "Extinction") << " at " << min_high;
      throw Error(ErrorKind::NonMonotoneOutcomes, os.str());
    }
  }

  // Returns false for a degenerate range.
  bool run(double a, double b, double tol) {
    evaluate({a, b});
    const Probe& pa = at(a);
    const Probe& pb = at(b);
    if (!pa.settled || !pb.settled) {
      throw Error(ErrorKind::HorizonExhausted, "range endpoint undetermined at the largest horizon");
    }
    check_monotone();
    lo_ = a;
    hi_ = b;
    if (high_side(pa)) {
      degenerate_ = Degenerate::AtLowEnd;
      return false;
    }
    if (!high_side(pb)) {
      degenerate_ = Degenerate::AtHighEnd;
      return false;
    }
    int depth = 0;
    while ((1 << (depth + 1)) - 1 <= workers_) ++depth;
    depth = std::max(depth, 1);

    while (hi_ - lo_ > tol) {
      std::vector<double> tree;
      grow(lo_, hi_, depth, tree);
      evaluate(tree);
      for (int level = 0; level < depth && hi_ - lo_ > tol; ++level) {
        const double m = 0.5 * (lo_ + hi_);
        const Probe& pm = at(m);
        if (pm.settled) {
          (high_side(pm) ? hi_ : lo_) = m;
          continue;
        }
        const double w = hi_ - lo_;
        const double l = m - 0.25 * w;
        const double r = m + 0.25 * w;
        evaluate({l, r});
        const Probe& pl = at(l);
        const Probe& pr = at(r);
        bool progress = false;
        if (pl.settled) {
          (high_side(pl) ? hi_ : lo_) = l;
          progress = true;
        }
        if (pr.settled && !(pl.settled && high_side(pl))) {
          (high_side(pr) ? hi_ : lo_) = r;
          progress = true;
        }
        if (!progress) {
          std::ostringstream os;
          os << "probes at " << l << ", " << m << ", " << r << " undetermined at the largest horizon";
          throw Error(ErrorKind::HorizonExhausted, os.str());
        }
        break;
      }
      check_monotone();
    }
    return true;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  Degenerate degenerate() const { return degenerate_; }

  std::vector<Probe> runs() const {
    std::vector<Probe> out;
    for (const auto& [param, p] : cache_) out.push_back(p);
    return out;
  }

 private:
  static void grow(double lo, double hi, int depth, std::vector<double>& out) {
    if (depth == 0) return;
    const double m = 0.5 * (lo + hi);
    out.push_back(m);
    grow(lo, m, depth - 1, out);
    grow(m, hi, depth - 1, out);
  }

  std::function<Probe(double)> probe_;
  bool spread_high_;
  int workers_;
  std::map<double, Probe> cache_;
  double lo_ = 0.0, hi_ = 0.0;
  Degenerate degenerate_ = Degenerate::None;
};

void fill_bracket(ThresholdResult& res, const Bisection& bis) {
  res.lo = bis.lo();
  res.hi = bis.hi();
  res.outcome_lo = *bis.at(res.lo).settled;
  res.outcome_hi = *bis.at(res.hi).settled;
  res.degenerate = bis.degenerate();
  res.runs = bis.runs();
}

}  // namespace

ThresholdResult find_sigma_star(const OrderedFamily& family, const ShiftedReaction& reaction, double c,
                                const Grid1D& grid, const SolverConfig& solver, const ClassifierConfig& classifier,
                                double tol_sigma, std::pair<double, double> sigma_range,
                                const ThresholdOptions& options) {
  classifier.validate();
  if (!(tol_sigma > 0.0) || !(sigma_range.first > 0.0) || !(sigma_range.first < sigma_range.second)) {
    throw Error(ErrorKind::InvalidArgument, "need tol_sigma > 0 and 0 < sigma_lo < sigma_hi");
  }
  const References refs = make_references(reaction, c);
  auto probe = [&](double sigma) {
    return run_probe(family.generator(sigma), reaction, c, grid, solver, classifier, refs, sigma,
                     options.max_horizon_factor);
  };
  Bisection bis(probe, true, options.workers);
  const bool finite = bis.run(sigma_range.first, sigma_range.second, tol_sigma);
  ThresholdResult res;
  res.parameter = "sigma";
  fill_bracket(res, bis);
  if (!finite) {
    res.value = res.degenerate == Degenerate::AtLowEnd ? 0.0 : std::numeric_limits<double>::infinity();
    res.raw_value = res.value;
    return res;
  }
  res.value = res.raw_value = 0.5 * (res.lo + res.hi);
  if (options.probe_midpoint) {
    bis.evaluate({res.value});
    res.midpoint = bis.at(res.value);
    res.runs = bis.runs();
    bis.check_monotone();
  }
  return res;
}

ThresholdResult find_critical_speed(const InitialDatum& u0, const ShiftedReaction& reaction, const Grid1D& grid,
                                    const SolverConfig& solver, const ClassifierConfig& classifier, double tol_c,
                                    const ThresholdOptions& options) {
  classifier.validate();
  if (!(tol_c > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol_c must be positive");
  const double lin = linear_speed(reaction.growth());
  ShootingTolerances st;
  st.tol_c = std::min(1e-6, tol_c / 100.0);
  const double cstar = minimal_speed(reaction.growth(), st).value;
  const double a = std::max(0.0, lin - 10.0 * tol_c);
  const double b = cstar + 10.0 * tol_c;
  auto probe = [&](double c) {
    return run_probe(u0, reaction, c, grid, solver, classifier, make_references(reaction, c), c,
                     options.max_horizon_factor);
  };
  // An admissible interval shorter than tol_c pins c(u0) (KPP: lin = c*); the
  // endpoints are still probed, but bisecting towards c* would only meet
  // arbitrarily slow spreading.
  const bool pinned = cstar - lin <= tol_c;
  Bisection bis(probe, false, options.workers);
  // c(u0) >= lin for every datum. Extinction at lin therefore fixes the clamped
  // value, and bisecting below lin would meet the same slow spreading.
  double lo_end = a, hi_end = b, tol = pinned ? b - a : tol_c;
  bool stop_at_lin = false;
  if (!pinned) {
    bis.evaluate({lin});
    const std::optional<Verdict> at_lin = bis.at(lin).settled;
    if (at_lin == Verdict::Extinction) {
      hi_end = lin;
      tol = lin - a;
      stop_at_lin = true;
    } else if (at_lin == Verdict::Spreading) {
      lo_end = lin;
    }
  }
  const bool finite = bis.run(lo_end, hi_end, tol);
  ThresholdResult res;
  res.parameter = "c";
  fill_bracket(res, bis);
  if (!finite) {
    res.raw_value = res.degenerate == Degenerate::AtLowEnd ? lo_end : hi_end;
  } else {
    res.raw_value = 0.5 * (res.lo + res.hi);
    if (options.probe_midpoint && !pinned && !stop_at_lin) {
      bis.evaluate({res.raw_value});
      res.midpoint = bis.at(res.raw_value);
      res.runs = bis.runs();
      bis.check_monotone();
    }
  }
  res.value = std::clamp(res.raw_value, lin, cstar);
  res.clamped = res.value != res.raw_value;
  return res;
}

std::vector<SweepRow> sweep(const OrderedFamily& family, const ShiftedReaction& reaction,
                            const std::vector<double>& speeds, const std::vector<double>& sigmas, const Grid1D& grid,
                            const SolverConfig& solver, const ClassifierConfig& classifier,
                            const ThresholdOptions& options) {
  classifier.validate();
  std::vector<References> refs(speeds.size());
  parallel_for(speeds.size(), options.workers, [&](std::size_t i) { refs[i] = make_references(reaction, speeds[i]); });
  std::vector<SweepRow> rows(speeds.size() * sigmas.size());
  parallel_for(rows.size(), options.workers, [&](std::size_t k) {
    const std::size_t i = k / sigmas.size();
    const std::size_t j = k % sigmas.size();
    rows[k].c = speeds[i];
    rows[k].sigma = sigmas[j];
    rows[k].probe = run_probe(family.generator(sigmas[j]), reaction, speeds[i], grid, solver, classifier, refs[i],
                              sigmas[j], options.max_horizon_factor);
  });
  return rows;
}

}  // namespace rangeshift
