#include "ppe/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppe/theoretical_profile.hpp"
#include "ppe/units.hpp"

namespace ppe {

std::vector<double> profile_derivative(std::span<const double> values, double dz_m) {
  if (!(dz_m > 0.0)) throw std::invalid_argument("dz must be positive");
  std::vector<double> d;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) d.push_back((values[k] - values[k + 1]) / dz_m);
  return d;
}

std::vector<double> profile_derivative(const ProfileEstimate& p) { return profile_derivative(p.gamma_prime, p.dz_m); }

std::vector<double> derivative_positions(const ProfileEstimate& p) {
  std::vector<double> z;
  for (std::size_t k = 0; k + 1 < p.z_m.size(); ++k) z.push_back(0.5 * (p.z_m[k] + p.z_m[k + 1]));
  return z;
}

std::vector<Peak> find_peaks(std::span<const double> y, std::span<const double> z_m, double min_height,
                             double min_prominence) {
  if (y.size() != z_m.size()) throw std::invalid_argument("peak search length mismatch");
  std::vector<Peak> peaks;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    // plateau-aware local maximum: strictly above the left neighbour, not below the right
    if (i > 0 && !(y[i] > y[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 < n && y[j + 1] > y[i]) continue;
    if (y[i] < min_height) continue;
    // prominence: drop to the higher of the two lowest points before a taller peak
    double left_min = y[i];
    for (std::size_t t = i; t-- > 0;) {
      if (y[t] > y[i]) break;
      left_min = std::min(left_min, y[t]);
    }
    double right_min = y[i];
    for (std::size_t t = j + 1; t < n; ++t) {
      if (y[t] > y[i]) break;
      right_min = std::min(right_min, y[t]);
    }
    const double prom = y[i] - std::max(left_min, right_min);
    if (prom >= min_prominence) {
      const std::size_t mid = (i + j) / 2;
      peaks.push_back({mid, z_m[mid], y[mid], prom});
    }
    i = j;
  }
  return peaks;
}

namespace {

struct SpanRange {
  std::size_t begin = 0, end = 0;  // grid indices with begin inclusive, end exclusive
};

std::vector<SpanRange> span_ranges(const std::vector<double>& z, const LinkSpec& link) {
  std::vector<SpanRange> r(link.spans().size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto lo = std::lower_bound(z.begin(), z.end(), link.span_start_m(i) - 1e-9);
    const auto hi = std::lower_bound(z.begin(), z.end(), link.span_end_m(i) - 1e-9);
    r[i] = {static_cast<std::size_t>(lo - z.begin()), static_cast<std::size_t>(hi - z.begin())};
  }
  return r;
}

double mean_over(const std::vector<double>& v, const std::vector<bool>& excluded, std::size_t a, std::size_t b) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t k = a; k < b; ++k)
    if (!excluded[k]) {
      s += v[k];
      ++n;
    }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::size_t count_valid(const std::vector<bool>& excluded, std::size_t a, std::size_t b) {
  std::size_t n = 0;
  for (std::size_t k = a; k < b; ++k) n += !excluded[k];
  return n;
}

// Least-squares line through (z, y) over the included indices.
std::pair<double, double> fit_line(const std::vector<double>& z, const std::vector<double>& y,
                                   const std::vector<bool>& use) {
  double n = 0, sz = 0, sy = 0, szz = 0, szy = 0;
  for (std::size_t k = 0; k < z.size(); ++k)
    if (use[k]) {
      n += 1;
      sz += z[k];
      sy += y[k];
      szz += z[k] * z[k];
      szy += z[k] * y[k];
    }
  if (n < 2) return {n > 0 ? sy / n : 0.0, 0.0};
  const double den = n * szz - sz * sz;
  const double slope = den != 0.0 ? (n * szy - sz * sy) / den : 0.0;
  return {(sy - slope * sz) / n, slope};
}

}  // namespace

AnomalyReport detect_anomalies(const ProfileEstimate& profile, const LinkSpec& link, const AnomalyOptions& opts) {
  if (opts.sigma_mode == SigmaMode::fixed && !(opts.sigma_db > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(opts.threshold_factor > 0.0) || !(opts.step_window_m > 0.0) || opts.step_gap_m < 0.0) throw std::invalid_argument("bad anomaly options");
  if (profile.z_m.size() != profile.power_dbm.size()) throw std::invalid_argument("profile has no power values");
  if (!(profile.dz_m > 0.0)) throw std::invalid_argument("profile needs a uniform grid");

  AnomalyReport rep;
  rep.z_m = profile.z_m;
  const std::size_t n = rep.z_m.size();
  const auto edges = span_edges(link);
  rep.excluded.resize(n);
  for (std::size_t k = 0; k < n; ++k) rep.excluded[k] = in_dead_zone(rep.z_m[k], edges, opts.dead_zone_m);
  const auto ranges = span_ranges(rep.z_m, link);

  // nominal tilt line per span
  rep.residual_db.resize(n);
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const double launch = watts_to_dbm(link.launch_power_w(i));
    const double a_db = alpha_to_db_per_km(link.spans()[i].alpha_per_m) / 1000.0;
    for (std::size_t k = ranges[i].begin; k < ranges[i].end; ++k)
      rep.residual_db[k] = profile.power_dbm[k] - (launch - a_db * (rep.z_m[k] - link.span_start_m(i)));
  }

  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(opts.step_window_m / profile.dz_m)));
  const auto g = static_cast<std::size_t>(std::lround(opts.step_gap_m / profile.dz_m));
  // frame-to-frame spread of an averaged profile, as a variance of the mean
  const bool spread = opts.use_profile_spread && profile.profiles_averaged > 1 && profile.std_db.size() == n;
  std::vector<double> var_mean(n, 0.0), step_se(n, 0.0);
  if (spread)
    for (std::size_t k = 0; k < n; ++k)
      var_mean[k] = std::isfinite(profile.std_db[k])
                        ? profile.std_db[k] * profile.std_db[k] / static_cast<double>(profile.profiles_averaged)
                        : 0.0;
  auto compute_steps = [&] {
    rep.step_db.assign(n, 0.0);
    for (const auto& r : ranges)
      for (std::size_t k = r.begin + 1; k < r.end; ++k) {
        if (rep.excluded[k] || rep.excluded[k - 1]) continue;
        // the step sits between k-1 and k; g samples either side are left out
        // because the estimate smears a drop over neighbouring positions
        if (k < r.begin + g + 1 || k + g >= r.end) continue;
        const std::size_t before_end = k - g;
        const std::size_t before_begin = before_end >= r.begin + w ? before_end - w : r.begin;
        const std::size_t after_begin = k + g;
        const std::size_t after_end = std::min(r.end, after_begin + w);
        // half-filled windows at least, so edges do not produce one-sample steps
        if (count_valid(rep.excluded, before_begin, before_end) * 2 < w ||
            count_valid(rep.excluded, after_begin, after_end) * 2 < w)
          continue;
        const double before = mean_over(rep.residual_db, rep.excluded, before_begin, before_end);
        const double after = mean_over(rep.residual_db, rep.excluded, after_begin, after_end);
        rep.step_db[k] = after - before;
        if (spread) {
          const double vb = mean_over(var_mean, rep.excluded, before_begin, before_end) /
                            static_cast<double>(count_valid(rep.excluded, before_begin, before_end));
          const double va = mean_over(var_mean, rep.excluded, after_begin, after_end) /
                            static_cast<double>(count_valid(rep.excluded, after_begin, after_end));
          step_se[k] = std::sqrt(vb + va);
        }
      }
  };

  // per-position sigma
  std::vector<double> sigma(n, opts.sigma_db);
  if (opts.sigma_mode == SigmaMode::global_rms) {
    rep.sigma_db = profile_rms_error(profile, link, opts.dead_zone_m);
    std::fill(sigma.begin(), sigma.end(), rep.sigma_db);
  } else if (opts.sigma_mode == SigmaMode::prior_window) {
    const auto th = theoretical_profile(link, rep.z_m);
    rep.sigma_db = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      std::size_t m = 0;
      for (std::size_t t = 0; t < k; ++t) {
        const double gap = rep.z_m[k] - rep.z_m[t];
        if (rep.excluded[t] || gap < opts.prior_gap_m || gap > opts.prior_gap_m + opts.prior_window_m) continue;
        const double d = profile.power_dbm[t] - th.power_dbm[t];
        s += d * d;
        ++m;
      }
      sigma[k] = m ? std::sqrt(s / static_cast<double>(m)) : std::numeric_limits<double>::infinity();
      if (m) rep.sigma_db = std::max(rep.sigma_db, sigma[k]);
    }
  } else {
    rep.sigma_db = opts.sigma_db;
  }
  if (!(rep.sigma_db > 0.0)) throw std::invalid_argument("sigma must be positive");
  rep.threshold_db = opts.threshold_factor * rep.sigma_db;

  auto detect = [&] {
    rep.events.clear();
    auto fires = [&](std::size_t k) {
      return rep.step_db[k] < -opts.threshold_factor * std::max(sigma[k], step_se[k]);
    };
    for (const auto& r : ranges) {
      double level = 0.0;
      std::vector<std::size_t> at;
      for (std::size_t k = r.begin; k < r.end; ++k) {
        if (!fires(k)) continue;
        // one event per contiguous run, placed at the steepest drop
        std::size_t best = k;
        while (k + 1 < r.end && fires(k + 1)) {
          ++k;
          if (rep.step_db[k] < rep.step_db[best]) best = k;
        }
        at.push_back(best);
      }
      for (std::size_t e = 0; e < at.size(); ++e) {
        const std::size_t stop = e + 1 < at.size() ? at[e + 1] : r.end;
        const double after = mean_over(rep.residual_db, rep.excluded, std::min(at[e] + g, stop), stop);
        AnomalyEvent ev;
        ev.z_m = rep.z_m[at[e]];
        ev.step_db = rep.step_db[at[e]];
        ev.estimated_loss_db = std::max(0.0, level - after);
        if (std::isfinite(after)) level = after;
        rep.events.push_back(ev);
      }
    }
  };

  compute_steps();
  detect();

  if (opts.tilt == TiltMode::fitted) {
    // refit each span on points before its first detected event, once
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        double cut = link.span_end_m(i);
        for (const auto& ev : rep.events)
          if (ev.z_m >= link.span_start_m(i) && ev.z_m < cut) cut = std::min(cut, ev.z_m);
        std::vector<bool> use(n, false);
        for (std::size_t k = ranges[i].begin; k < ranges[i].end; ++k)
          use[k] = !rep.excluded[k] && (pass == 0 || rep.z_m[k] < cut);
        const auto [c0, c1] = fit_line(rep.z_m, profile.power_dbm, use);
        for (std::size_t k = ranges[i].begin; k < ranges[i].end; ++k)
          rep.residual_db[k] = profile.power_dbm[k] - (c0 + c1 * rep.z_m[k]);
      }
      compute_steps();
      detect();
    }
  }
  return rep;
}

double residual_step_at(const AnomalyReport& report, double z_m, double window_m, double gap_m) {
  double sb = 0, sa = 0;
  std::size_t nb = 0, na = 0;
  for (std::size_t k = 0; k < report.z_m.size(); ++k) {
    if (report.excluded[k]) continue;
    const double d = report.z_m[k] - z_m;
    if (d <= -gap_m && d >= -window_m) {
      sb += report.residual_db[k];
      ++nb;
    } else if (d >= gap_m && d <= window_m) {
      sa += report.residual_db[k];
      ++na;
    }
  }
  if (!nb || !na) throw std::invalid_argument("step window has no samples on one side");
  return sa / static_cast<double>(na) - sb / static_cast<double>(nb);
}

}  // namespace ppe
